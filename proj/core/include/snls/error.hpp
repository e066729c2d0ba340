#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace snls {

/// Error categories raised across the library. Tests match on the code,
/// messages are for humans.
enum class Errc {
  invalid_dimension,
  non_power_of_two,
  invalid_argument,
  field_not_localized,
  empty_time_grid,
  off_grid_time,
  shooting_bracket_failure,
  solver_disagreement,
  b_out_of_range,
  nonpositive_b,
  flat_field,
  newton_divergence,
  eps_too_large,
  invalid_spec,
  insufficient_samples,
  insufficient_window,
  fit_divergence,
  numeric_blowup,
  parse_error,
  validation_error,
  io_error,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace snls
