#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gdl/carleson.hpp"
#include "gdl/geometry.hpp"
#include "gdl/io.hpp"
#include "gdl/pde.hpp"

namespace gdl {

/// Coefficient families selectable from a configuration.
enum class CoefficientKind { identity, oscillating_bands };

struct GridConfig {
  /// Finest spacing in units of the window radius.
  double h = 1.0 / 32.0;
  /// Refinement levels for refinement studies (>= 3).
  int levels = 3;
  /// Stretching rate of the graded axes.
  double kappa = 3.0;
  /// Vertical extent of strip problems in window radii.
  double height = 4.0;
  /// Pole distances of far-pole sequences in window radii.
  std::vector<double> far_distances{8.0, 16.0, 32.0};
};

struct ExperimentConfig {
  std::string experiment;
  SetKind set_kind = SetKind::plane;
  SetParams set;
  int count = 2000;
  /// Total mass of the measure (<= 0: natural normalization).
  double mass = 0.0;

  OperatorCase op_case = OperatorCase::classical;
  WeightSource weight_source = WeightSource::euclid_dist;
  CoefficientKind coefficient = CoefficientKind::identity;
  double ellipticity = 2.0;

  double alpha = 1.0;
  double beta = 1.0;
  Ball window{Point::Zero(2), 1.0};

  double eps = 0.05;
  double M = 2.0;
  double tau = 0.1;
  double K = 4.0;
  double eta = 0.05;
  double N = 4.0;
  /// Extra epsilons (and M values) swept by the forward experiments.
  std::vector<double> eps_sweep;
  std::vector<double> m_sweep;
  /// Rescaling factors for normalization invariance checks.
  std::vector<double> lambdas{0.1, 10.0};

  GridConfig grid;
  int pair_levels = 3;
  int pair_samples = 16;
  int audit_windows = 4;
  std::uint64_t seed = 1;

  /// Throws Errc::validation naming the offending field.
  void validate() const;
};

ExperimentConfig parse_experiment_config(const io::json& j);
io::json to_json(const ExperimentConfig& cfg);
/// FNV-1a hash of the canonical JSON form, as 16 hex digits.
std::string config_hash(const io::json& canonical);

/// A CSV table: header plus rows of numbers.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Experiment outcome. `predicted` holds quantities the theory fixes (with the statement they come
/// from); `measured` holds everything computed only.
struct ExperimentReport {
  std::string experiment;
  io::json predicted = io::json::object();
  io::json measured = io::json::object();
  std::vector<Table> tables;
  /// gnuplot scripts keyed by file stem; they plot the tables above.
  std::vector<std::pair<std::string, std::string>> plots;
};

/// Writes report.json, one CSV per table and one .gp script per plot into dir. Every file carries the
/// config hash and tool version.
void write_report(const std::filesystem::path& dir, const ExperimentReport& report, const ExperimentConfig& cfg,
                  const std::string& version);

/// The measure, operator and domain a configuration describes.
DiscreteMeasure build_measure(const ExperimentConfig& cfg);
OperatorSpec build_operator(const ExperimentConfig& cfg, const DiscreteMeasure& mu);
CoefficientField band_coefficient(int n);

/// Far-field Green function above a plane or graph, computed as a strip problem periodic in the
/// horizontal directions (one strip period = 2 half_width).
GreenField forward_green(const ExperimentConfig& cfg, const DiscreteMeasure& mu, const Domain& dom);
Domain forward_domain(const ExperimentConfig& cfg, const DiscreteMeasure& mu);

ExperimentReport run_forward_plane(const ExperimentConfig& cfg);
ExperimentReport run_forward_dbeta(const ExperimentConfig& cfg);
ExperimentReport run_gradient_variant(const ExperimentConfig& cfg);

struct SlopeGap {
  double omega_slope = 0;
  double mass_slope = 0;
  /// Mass slope with centres drawn from mu instead of omega.
  double mass_slope_mu_centres = 0;
  double gap = 0;
  std::vector<double> radii;
  std::vector<double> mean_log_proxy;
  std::vector<double> mean_log_mass;
  double h = 0;
};

/// Koch (or flat, for the control) boundary of a periodic strip; omega is the discrete flux density of
/// the strip Green function. Radii span [r_min, 10 r_min].
SlopeGap prop72_slopes(const ExperimentConfig& cfg, double h, double r_min, int centres);
ExperimentReport run_prop72_obstruction(const ExperimentConfig& cfg);

struct MagicFieldCheck {
  /// sup over window nodes of |u - c D_alpha| / sup D_alpha, with c the Chebyshev fit.
  double defect = 0;
  double c = 0;
  std::size_t nodes = 0;
};
/// Solves L_alpha u = 0 on a box around the window with u = D_alpha on the box and u = 0 on E,
/// then compares u with multiples of D_alpha on the window.
MagicFieldCheck magic_field_check(const ExperimentConfig& cfg, const DiscreteMeasure& mu, double alpha, int cells);
ExperimentReport run_magic_alpha(const ExperimentConfig& cfg);

/// Two half-lines from the origin at angle pi - theta (theta = 0 is a straight line): count points
/// evenly spaced out to half_width, then geometrically growing cells out to outer_extent.
DiscreteMeasure two_ray_cloud(double theta, double half_width, int count, double outer_extent);
/// Scaled residual of L_alpha D_alpha (as in equivalence_residuals) on the window for a sweep of
/// two-ray angles. Needs n = 2 or n >= 4 (n = 3 makes the exponent d + 2 - n vanish).
ExperimentReport run_upsilon_flat_probe(const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

}  // namespace gdl
