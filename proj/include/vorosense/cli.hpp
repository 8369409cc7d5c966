#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vorosense {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one CLI invocation. `args` excludes the program name. Returns the
/// process exit code: 0 on success, 1 on a library error, 2 on bad usage.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vorosense
