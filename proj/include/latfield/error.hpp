#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace latfield {

enum class ErrorKind {
  InvalidArgument,
  OutOfWindow,
  DimensionMismatch,
  UnsupportedDimension,
  NonFiniteValue,
  WindowTooSmall,
  DegenerateBox,
  OverflowGuard,
  SourceWindowTooSmall,
  IncompleteCoverage,
  OutOfRange,
  InsufficientReplicates,
  NotPositiveSemidefinite,
  NegativeCoordinate,
  NonPositiveDepth,
  NoOverlap,
  ZeroPlaneViolation,
  ParseError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// True for kinds that describe a bad request rather than a numerical breakdown.
/// The CLI maps the former to exit code 2 and the latter to exit code 3.
bool is_config_error(ErrorKind kind) noexcept;

class LatticeError : public std::runtime_error {
 public:
  LatticeError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace latfield
