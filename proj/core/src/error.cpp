#include "snls/error.hpp"

namespace snls {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_dimension: return "invalid_dimension";
    case Errc::non_power_of_two: return "non_power_of_two";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::field_not_localized: return "field_not_localized";
    case Errc::empty_time_grid: return "empty_time_grid";
    case Errc::off_grid_time: return "off_grid_time";
    case Errc::shooting_bracket_failure: return "shooting_bracket_failure";
    case Errc::solver_disagreement: return "solver_disagreement";
    case Errc::b_out_of_range: return "b_out_of_range";
    case Errc::nonpositive_b: return "nonpositive_b";
    case Errc::flat_field: return "flat_field";
    case Errc::newton_divergence: return "newton_divergence";
    case Errc::eps_too_large: return "eps_too_large";
    case Errc::invalid_spec: return "invalid_spec";
    case Errc::insufficient_samples: return "insufficient_samples";
    case Errc::insufficient_window: return "insufficient_window";
    case Errc::fit_divergence: return "fit_divergence";
    case Errc::numeric_blowup: return "numeric_blowup";
    case Errc::parse_error: return "parse_error";
    case Errc::validation_error: return "validation_error";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

}  // namespace snls
