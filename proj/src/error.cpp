#include "rbp/error.hpp"

namespace rbp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::DegenerateField: return "DegenerateField";
    case ErrorKind::SymmetryUnsupported: return "SymmetryUnsupported";
    case ErrorKind::MaskMismatch: return "MaskMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::RowNotNormalized: return "RowNotNormalized";
    case ErrorKind::DegenerateModel: return "DegenerateModel";
    case ErrorKind::UnlabeledPoints: return "UnlabeledPoints";
    case ErrorKind::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::KinkProximity: return "KinkProximity";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorKind::UnknownCategory: return "UnknownCategory";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

ConfigError::ConfigError(std::string key, const std::string& what)
    : Error(ErrorKind::ConfigError, "'" + key + "': " + what), key_(std::move(key)) {}

}  // namespace rbp
