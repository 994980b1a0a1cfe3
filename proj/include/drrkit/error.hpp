#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace drrkit {

enum class ErrorCode {
  MissingFile,
  MalformedHeader,
  UnsupportedElementType,
  DataSizeMismatch,
  IoFailure,
  InvalidArgument,
  GeometryMismatch,
  DegenerateGeometry,
  CornerSeedInsideBody,
  UndefinedMetric,
  Diverged,
  Config,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `field()` names the offending header key,
/// parameter, or operand when one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string field, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace drrkit
