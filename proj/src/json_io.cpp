#include "vorosense/json_io.hpp"

#include "vorosense/site_io.hpp"

namespace vorosense {
namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "field '" + field + "': " + what);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) config_error(path + key, "is required");
  return j.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) config_error(field, "must be a number");
  return j.get<double>();
}

std::uint64_t unsigned_int(const json& j, const std::string& field) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    config_error(field, "must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

double optional_number(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? number(j.at(key), key) : fallback;
}

const char* kind_name(ServiceKind k) {
  switch (k) {
    case ServiceKind::Exponential: return "exponential";
    case ServiceKind::Deterministic: return "deterministic";
    case ServiceKind::Lognormal: return "lognormal";
  }
  return "exponential";
}

}  // namespace

json stats_to_json(const DiagramStats& stats, bool include_timing) {
  json j;
  j["n_sites"] = stats.n_sites;
  j["site_events"] = stats.site_events;
  j["circle_events_processed"] = stats.circle_events_processed;
  j["circle_events_discarded"] = stats.circle_events_discarded;
  j["circle_events_merged"] = stats.circle_events_merged;
  j["pre_clip_edges"] = stats.pre_clip_edges;
  if (include_timing) {
    j["build_wall_time_s"] = std::chrono::duration<double>(stats.build_wall_time).count();
  }
  return j;
}

json report_to_json(const SimReport& r) {
  json j;
  j["seed"] = r.seed;
  j["published"] = r.published;
  j["served"] = r.served;
  j["stored"] = r.stored;
  j["in_queue_at_end"] = r.in_queue_at_end;
  j["utilization"] = r.utilization;
  j["mean_sojourn_s"] = r.mean_sojourn_s;
  j["kingman_prediction_s"] = r.kingman_prediction_s;
  j["mean_in_system"] = r.mean_in_system;
  j["arrival_histogram"] = r.arrival_histogram;
  json cells = json::array();
  for (const auto& [key, count] : r.per_cell_counts) cells.push_back({key.value, count});
  j["per_cell_counts"] = std::move(cells);
  j["queue_length_series"] = r.queue_length_series;
  j["queries_issued"] = r.queries_issued;
  j["query_hits"] = r.query_hits;
  return j;
}

SimReport report_from_json(const json& j) {
  SimReport r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.published = j.at("published").get<std::uint64_t>();
  r.served = j.at("served").get<std::uint64_t>();
  r.stored = j.at("stored").get<std::uint64_t>();
  r.in_queue_at_end = j.at("in_queue_at_end").get<std::uint64_t>();
  r.utilization = j.at("utilization").get<double>();
  r.mean_sojourn_s = j.at("mean_sojourn_s").get<double>();
  r.kingman_prediction_s = j.at("kingman_prediction_s").get<double>();
  r.mean_in_system = j.at("mean_in_system").get<double>();
  r.arrival_histogram = j.at("arrival_histogram").get<std::vector<std::uint64_t>>();
  for (const auto& cell : j.at("per_cell_counts")) {
    r.per_cell_counts.emplace_back(MortonKey{cell.at(0).get<std::uint64_t>()},
                                   cell.at(1).get<std::uint64_t>());
  }
  r.queue_length_series = j.at("queue_length_series").get<std::vector<std::uint32_t>>();
  r.queries_issued = j.at("queries_issued").get<std::uint64_t>();
  r.query_hits = j.at("query_hits").get<std::uint64_t>();
  return r;
}

PipelineConfig config_from_json(const json& j) {
  if (!j.is_object()) config_error("<root>", "must be an object");
  const json& version = require(j, "version", "");
  if (!version.is_number_integer() || version.get<int>() != kConfigVersion) {
    config_error("version", "unsupported (expected " + std::to_string(kConfigVersion) + ")");
  }
  PipelineConfig c;
  c.seed = j.contains("seed") ? unsigned_int(j.at("seed"), "seed") : 0;
  c.duration_s = number(require(j, "duration_s", ""), "duration_s");
  if (j.contains("world_box")) {
    const json& b = j.at("world_box");
    if (!b.is_array() || b.size() != 4) config_error("world_box", "must be [x0, y0, x1, y1]");
    try {
      c.world_box = BoundingBox({number(b[0], "world_box[0]"), number(b[1], "world_box[1]")},
                                {number(b[2], "world_box[2]"), number(b[3], "world_box[3]")});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      config_error("world_box", e.what());
    }
  }
  if (j.contains("bits")) {
    const auto bits = unsigned_int(j.at("bits"), "bits");
    if (bits < 1 || bits > 32) config_error("bits", "must be in [1, 32]");
    c.bits_per_dim = static_cast<unsigned>(bits);
  }
  if (j.contains("page_capacity")) {
    c.page_capacity = unsigned_int(j.at("page_capacity"), "page_capacity");
    if (c.page_capacity < 2) config_error("page_capacity", "must be at least 2");
  }
  c.sample_interval_s = optional_number(j, "sample_interval_s", c.sample_interval_s);
  c.query_period_s = optional_number(j, "query_period_s", c.query_period_s);
  if (j.contains("denominator")) {
    const json& d = j.at("denominator");
    if (d == "service_variance") {
      c.denominator = SojournDenominator::ServiceVariance;
    } else if (d == "arrival_variance") {
      c.denominator = SojournDenominator::ArrivalVariance;
    } else {
      config_error("denominator", "must be \"service_variance\" or \"arrival_variance\"");
    }
  }

  const json& service = require(j, "service", "");
  const json& kind = require(service, "kind", "service.");
  if (kind == "exponential") {
    c.service.kind = ServiceKind::Exponential;
  } else if (kind == "deterministic") {
    c.service.kind = ServiceKind::Deterministic;
  } else if (kind == "lognormal") {
    c.service.kind = ServiceKind::Lognormal;
    c.service.lognormal_variance = number(require(service, "variance", "service."), "service.variance");
  } else {
    config_error("service.kind", "must be exponential, deterministic or lognormal");
  }
  c.service.mean = number(require(service, "mean", "service."), "service.mean");

  if (j.contains("publishers")) {
    const json& pubs = j.at("publishers");
    if (!pubs.is_array()) config_error("publishers", "must be an array");
    for (std::size_t i = 0; i < pubs.size(); ++i) {
      const std::string path = "publishers[" + std::to_string(i) + "].";
      const json& p = pubs[i];
      Publisher pub;
      pub.site.id = static_cast<SiteId>(unsigned_int(require(p, "id", path), path + "id"));
      pub.site.position = {number(require(p, "x", path), path + "x"),
                           number(require(p, "y", path), path + "y")};
      pub.arrivals.lambda = number(require(p, "lambda", path), path + "lambda");
      c.publishers.push_back(pub);
    }
  } else if (j.contains("generate_publishers")) {
    const json& g = j.at("generate_publishers");
    const auto count = unsigned_int(require(g, "count", "generate_publishers."), "generate_publishers.count");
    const double lambda = number(require(g, "lambda", "generate_publishers."), "generate_publishers.lambda");
    for (const Site& s : generate_sites(count, c.world_box, c.seed)) c.publishers.push_back({s, {lambda}});
  } else {
    config_error("publishers", "is required (or generate_publishers)");
  }

  try {
    c.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::ConfigUtilizationTooHigh) throw;
    config_error("<root>", e.what());
  }
  return c;
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["version"] = kConfigVersion;
  j["seed"] = c.seed;
  j["duration_s"] = c.duration_s;
  j["world_box"] = {c.world_box.min().x, c.world_box.min().y, c.world_box.max().x, c.world_box.max().y};
  j["bits"] = c.bits_per_dim;
  j["page_capacity"] = c.page_capacity;
  j["sample_interval_s"] = c.sample_interval_s;
  j["query_period_s"] = c.query_period_s;
  j["denominator"] = c.denominator == SojournDenominator::ServiceVariance ? "service_variance" : "arrival_variance";
  json service;
  service["kind"] = kind_name(c.service.kind);
  service["mean"] = c.service.mean;
  if (c.service.kind == ServiceKind::Lognormal) service["variance"] = c.service.lognormal_variance;
  j["service"] = std::move(service);
  json pubs = json::array();
  for (const Publisher& p : c.publishers) {
    json pj;
    pj["id"] = p.site.id;
    pj["x"] = p.site.position.x;
    pj["y"] = p.site.position.y;
    pj["lambda"] = p.arrivals.lambda;
    pubs.push_back(std::move(pj));
  }
  j["publishers"] = std::move(pubs);
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace vorosense
