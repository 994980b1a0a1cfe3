#include "drrkit/error.hpp"

namespace drrkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "missing file";
    case ErrorCode::MalformedHeader: return "malformed header";
    case ErrorCode::UnsupportedElementType: return "unsupported element type";
    case ErrorCode::DataSizeMismatch: return "data size mismatch";
    case ErrorCode::IoFailure: return "i/o failure";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::GeometryMismatch: return "geometry mismatch";
    case ErrorCode::DegenerateGeometry: return "degenerate geometry";
    case ErrorCode::CornerSeedInsideBody: return "corner seed inside body";
    case ErrorCode::UndefinedMetric: return "undefined metric";
    case ErrorCode::Diverged: return "diverged";
    case ErrorCode::Config: return "configuration error";
  }
  return "unknown";
}

namespace {
std::string compose(ErrorCode code, const std::string& field, const std::string& message) {
  std::string out(to_string(code));
  if (!field.empty()) out += " [" + field + "]";
  if (!message.empty()) out += ": " + message;
  return out;
}
}  // namespace

Error::Error(ErrorCode code, std::string field, const std::string& message)
    : std::runtime_error(compose(code, field, message)), code_(code), field_(std::move(field)) {}

}  // namespace drrkit
