#include "latfield/error.hpp"

namespace latfield {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::OutOfWindow: return "OutOfWindow";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::DegenerateBox: return "DegenerateBox";
    case ErrorKind::OverflowGuard: return "OverflowGuard";
    case ErrorKind::SourceWindowTooSmall: return "SourceWindowTooSmall";
    case ErrorKind::IncompleteCoverage: return "IncompleteCoverage";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::InsufficientReplicates: return "InsufficientReplicates";
    case ErrorKind::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorKind::NegativeCoordinate: return "NegativeCoordinate";
    case ErrorKind::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorKind::NoOverlap: return "NoOverlap";
    case ErrorKind::ZeroPlaneViolation: return "ZeroPlaneViolation";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

bool is_config_error(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::OverflowGuard:
    case ErrorKind::NotPositiveSemidefinite:
    case ErrorKind::NonFiniteValue:
      return false;
    default:
      return true;
  }
}

}  // namespace latfield
