#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vorosense {

enum class ErrorCode {
  CollinearInput,
  EmptySiteSet,
  DuplicateSite,
  SiteOutsideBox,
  PointOutsideBox,
  InvalidBox,
  CoordOutOfGrid,
  KeyOutOfGrid,
  RangeNotSplittable,
  UtilizationAtOrAboveOne,
  ConfigUtilizationTooHigh,
  InvalidParams,
  NegativeCount,
  InsufficientSamples,
  SnapshotFormatError,
  ParseError,
  ConfigError,
  IoError,
  UsageError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure surfaced by the library carries one of the codes above; the
// CLI prints them as `ERROR <code>: <message>`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vorosense
