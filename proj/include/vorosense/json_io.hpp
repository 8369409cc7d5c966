#pragma once

#include <string>

#include "json.hpp"
#include "vorosense/etl_sim.hpp"
#include "vorosense/fortune.hpp"

namespace vorosense {

using json = nlohmann::ordered_json;

inline constexpr int kConfigVersion = 1;

/// Wall time is only emitted on request; it would break replay comparisons.
json stats_to_json(const DiagramStats& stats, bool include_timing = false);

json report_to_json(const SimReport& report);
SimReport report_from_json(const json& j);

/// Throws ConfigError naming the offending field.
PipelineConfig config_from_json(const json& j);
json config_to_json(const PipelineConfig& config);

/// Pretty-printed, newline-terminated.
std::string dump(const json& j);

}  // namespace vorosense
