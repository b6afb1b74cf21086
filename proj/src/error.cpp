#include "rbmo_lab/error.hpp"

namespace rbmo_lab {

int exit_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_spec:
    case ErrorCode::parse_error:
    case ErrorCode::length_mismatch:
    case ErrorCode::unknown_kernel:
    case ErrorCode::dimension_mismatch:
      return 2;
    case ErrorCode::empty_family:
    case ErrorCode::zero_mass:
    case ErrorCode::not_nested:
    case ErrorCode::not_found:
    case ErrorCode::no_doubling_cubes:
    case ErrorCode::zero_norm:
      return 3;
    case ErrorCode::infeasible_at_upper_bound:
      return 4;
  }
  return 4;
}

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_spec: return "InvalidSpec";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::unknown_kernel: return "UnknownKernel";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::empty_family: return "EmptyFamily";
    case ErrorCode::zero_mass: return "ZeroMass";
    case ErrorCode::not_nested: return "NotNested";
    case ErrorCode::not_found: return "NotFound";
    case ErrorCode::no_doubling_cubes: return "NoDoublingCubes";
    case ErrorCode::zero_norm: return "ZeroNorm";
    case ErrorCode::infeasible_at_upper_bound: return "InfeasibleAtUpperBound";
  }
  return "Unknown";
}

}  // namespace rbmo_lab
