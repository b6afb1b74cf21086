#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rbmo_lab {

enum class ErrorCode {
  invalid_spec,
  parse_error,
  length_mismatch,
  unknown_kernel,
  dimension_mismatch,
  empty_family,
  zero_mass,
  not_nested,
  not_found,
  no_doubling_cubes,
  zero_norm,
  infeasible_at_upper_bound,
};

/// Process exit status associated with an error: 2 validation, 3 domain, 4 internal.
int exit_status(ErrorCode code) noexcept;

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rbmo_lab
