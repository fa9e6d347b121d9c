#include "gdl/error.hpp"

namespace gdl {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_params: return "invalid-params";
    case Errc::count_too_small: return "count-too-small";
    case Errc::too_close_to_boundary: return "too-close-to-boundary";
    case Errc::wrong_alpha: return "wrong-alpha";
    case Errc::exponent_zero: return "exponent-zero";
    case Errc::under_resolved: return "under-resolved";
    case Errc::lp_infeasible: return "lp-infeasible";
    case Errc::hypothesis_violated: return "hypothesis-violated";
    case Errc::level_below_resolution: return "level-below-resolution";
    case Errc::empty_whitney: return "empty-whitney";
    case Errc::no_interior_nodes: return "no-interior-nodes";
    case Errc::ellipticity_violation: return "ellipticity-violation";
    case Errc::degenerate_weight_overflow: return "degenerate-weight-overflow";
    case Errc::solver_divergence: return "solver-divergence";
    case Errc::pole_in_collar: return "pole-in-collar";
    case Errc::non_convergence: return "non-convergence";
    case Errc::no_corkscrew: return "no-corkscrew";
    case Errc::pole_too_close: return "pole-too-close";
    case Errc::insufficient_dynamic_range: return "insufficient-dynamic-range";
    case Errc::no_offset_corkscrew: return "no-offset-corkscrew";
    case Errc::validation: return "validation";
    case Errc::io: return "io";
  }
  return "unknown";
}

ErrorClass classify(Errc code) {
  switch (code) {
    case Errc::invalid_params:
    case Errc::count_too_small:
    case Errc::wrong_alpha:
    case Errc::exponent_zero:
    case Errc::hypothesis_violated:
    case Errc::validation:
      return ErrorClass::validation;
    case Errc::io:
      return ErrorClass::io;
    default:
      return ErrorClass::numerical;
  }
}

}  // namespace gdl
