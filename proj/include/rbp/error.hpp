#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rbp {

enum class ErrorKind {
  DegenerateInput,
  DegenerateField,
  SymmetryUnsupported,
  MaskMismatch,
  ShapeMismatch,
  RowNotNormalized,
  DegenerateModel,
  UnlabeledPoints,
  NonPositiveSigma,
  NonFinite,
  KinkProximity,
  EmptyInput,
  EmptyMask,
  NonPositiveDepth,
  UnknownCategory,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by config and manifest parsing; names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what);
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace rbp
