#pragma once

#include <stdexcept>
#include <string>

namespace gdl {

/// Error identifiers shared by every module. The string form is what the CLI
/// writes into its JSON error records.
enum class Errc {
  invalid_params,
  count_too_small,
  too_close_to_boundary,
  wrong_alpha,
  exponent_zero,
  under_resolved,
  lp_infeasible,
  hypothesis_violated,
  level_below_resolution,
  empty_whitney,
  no_interior_nodes,
  ellipticity_violation,
  degenerate_weight_overflow,
  solver_divergence,
  pole_in_collar,
  non_convergence,
  no_corkscrew,
  pole_too_close,
  insufficient_dynamic_range,
  no_offset_corkscrew,
  validation,
  io,
};

/// Broad class of an error; decides the CLI exit code.
enum class ErrorClass { validation, numerical, io };

const char* to_string(Errc code);
ErrorClass classify(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string field = {})
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}

  Errc code() const { return code_; }
  ErrorClass error_class() const { return classify(code_); }
  /// Name of the offending input field, when one is known.
  const std::string& field() const { return field_; }

 private:
  Errc code_;
  std::string field_;
};

}  // namespace gdl
