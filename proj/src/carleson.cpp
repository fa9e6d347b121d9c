#include "gdl/carleson.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gdl/error.hpp"
#include "gdl/parallel.hpp"

namespace gdl {

ScalePairSet dyadic_pairs(const DiscreteMeasure& mu, const Ball& root, int levels, int samples_per_level,
                          std::uint64_t seed) {
  if (levels < 1) throw Error(Errc::invalid_params, "levels must be >= 1", "levels");
  if (samples_per_level < 1) throw Error(Errc::invalid_params, "samples must be >= 1", "samples_per_cube");
  if (std::ldexp(root.radius, -levels) < 10.0 * mu.resolution_h())
    throw Error(Errc::level_below_resolution, "deepest level falls below 10 h", "levels");
  const std::vector<std::size_t> idx = mu.indices_in_ball(root);
  if (idx.empty()) throw Error(Errc::invalid_params, "root ball holds no point of E", "root");
  std::vector<double> cum(idx.size());
  double mass = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) cum[i] = (mass += mu.weight(idx[i]));

  ScalePairSet set;
  set.root = root;
  set.levels = levels;
  set.r_max = root.radius;
  set.r_min = std::ldexp(root.radius, -levels);
  set.normalization = std::pow(root.radius, mu.dim_d());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double w = mass * std::log(2.0) / samples_per_level;
  for (int j = 0; j < levels; ++j)
    for (int s = 0; s < samples_per_level; ++s) {
      const double u = unif(rng) * mass;
      const std::size_t i = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
      ScalePair p;
      p.center = mu.point(idx[std::min(i, idx.size() - 1)]);
      p.radius = std::ldexp(root.radius, -j - 1) * std::exp2(unif(rng));
      p.weight = w;
      p.level = j;
      set.pairs.push_back(std::move(p));
    }
  return set;
}

namespace {

std::vector<char> evaluate(const ScalePairSet& set, const PairPredicate& predicate) {
  std::vector<char> hit(set.pairs.size(), 0);
  parallel_for(set.pairs.size(), [&](std::size_t i) { hit[i] = predicate(set.pairs[i]) ? 1 : 0; });
  return hit;
}

}  // namespace

PackingEstimate packing_estimate(const ScalePairSet& set, const PairPredicate& predicate) {
  const std::vector<char> hit = evaluate(set, predicate);
  PackingEstimate est;
  std::vector<double> sum(static_cast<std::size_t>(set.levels), 0.0), cnt(sum.size(), 0.0), hits(sum.size(), 0.0),
      wt(sum.size(), 0.0);
  for (std::size_t i = 0; i < set.pairs.size(); ++i) {
    const auto l = static_cast<std::size_t>(set.pairs[i].level);
    cnt[l] += 1;
    wt[l] += set.pairs[i].weight;
    if (hit[i]) {
      sum[l] += set.pairs[i].weight;
      hits[l] += 1;
    }
  }
  double var = 0;
  for (std::size_t l = 0; l < sum.size(); ++l) {
    est.value += sum[l];
    if (cnt[l] > 1) {
      const double p = hits[l] / cnt[l];
      var += wt[l] * wt[l] * p * (1 - p) / cnt[l];
    }
  }
  est.value /= set.normalization;
  est.std_error = std::sqrt(var) / set.normalization;
  return est;
}

double packing_integral(const ScalePairSet& set, const PairPredicate& predicate) {
  return packing_estimate(set, predicate).value;
}

UrVerdict good_ur(const DiscreteMeasure& mu, const Ball& pair, double eps, int d_int,
                  const PlaneSearchOptions& search) {
  const std::vector<std::size_t> idx = mu.indices_in_ball(pair);
  if (idx.size() < 32) throw Error(Errc::under_resolved, "fewer than 32 cloud points in the ball", "ball");
  if (d_int < 1 || d_int >= mu.ambient_dim()) throw Error(Errc::invalid_params, "d_int out of range", "d_int");
  Eigen::MatrixXd pts(mu.ambient_dim(), static_cast<Eigen::Index>(idx.size()));
  Eigen::VectorXd w(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    pts.col(static_cast<Eigen::Index>(i)) = mu.point(idx[i]);
    w[static_cast<Eigen::Index>(i)] = mu.weight(idx[i]);
  }
  const AffinePlane seed = pca_plane(pts, w, d_int);
  auto objective = [&](const AffinePlane& p) { return local_hausdorff(mu, p, pair); };
  UrVerdict v;
  v.plane = seed;
  v.value = objective(seed);
  if (v.value > eps) {
    const PlaneSearchResult r = search_plane(objective, seed, pair.radius, search);
    if (r.value < v.value) {
      v.value = r.value;
      v.plane = r.plane;
    }
  }
  v.good = v.value <= eps;
  return v;
}

WhitneyRegion whitney_region(const Domain& dom, const ScalarGrid& layout, const Ball& pair, double K) {
  if (!(K >= 1)) throw Error(Errc::invalid_params, "K must be >= 1", "K");
  WhitneyRegion w;
  w.ball = pair;
  w.K = K;
  const Ball big = pair.scaled(K);
  for (std::size_t k : layout.nodes_in_box(Box::around(big))) {
    const Point x = layout.node(k);
    if (!big.contains(x) || !dom.contains(x)) continue;
    if (dom.dist_to_boundary(x) >= pair.radius / K) w.member_nodes.push_back(k);
  }
  return w;
}

CcVerdict good_cc(const CoefficientField& coeff, double ellipticity, const Domain& dom, const ScalarGrid& layout,
                  const Ball& pair, double tau, double K) {
  const WhitneyRegion wr = whitney_region(dom, layout, pair, K);
  if (wr.member_nodes.empty()) throw Error(Errc::empty_whitney, "Whitney region has no grid nodes", "K");
  const int n = layout.dim();
  std::vector<Eigen::MatrixXd> a(wr.member_nodes.size());
  std::vector<double> vol(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Point x = layout.node(wr.member_nodes[i]);
    a[i] = coeff ? coeff(x) : Eigen::MatrixXd::Identity(n, n);
    vol[i] = layout.cell_volume(wr.member_nodes[i]);
  }
  CcVerdict v;
  v.nodes = a.size();
  v.a0 = Eigen::MatrixXd::Zero(n, n);
  double total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    v.a0 += vol[i] * a[i];
    total += vol[i];
  }
  v.a0 /= total;
  double integral = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Eigen::MatrixXd diff = a[i] - v.a0;
    const double norm = n == 1 ? std::abs(diff(0, 0)) : Eigen::JacobiSVD<Eigen::MatrixXd>(diff).singularValues()[0];
    integral += vol[i] * norm;
  }
  v.defect = integral / std::pow(pair.radius, n);
  v.good = v.defect <= tau;
  const Eigen::MatrixXd sym = 0.5 * (v.a0 + v.a0.transpose());
  const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff();
  const double hi = n == 1 ? std::abs(v.a0(0, 0)) : Eigen::JacobiSVD<Eigen::MatrixXd>(v.a0).singularValues()[0];
  v.a0_elliptic = lo >= (1.0 / ellipticity) * (1 - 1e-12) && hi <= ellipticity * (1 + 1e-12);
  return v;
}

// ---------------------------------------------------------------------------
// Chebyshev scale fit

namespace {

double cross(const std::pair<double, double>& o, const std::pair<double, double>& a,
             const std::pair<double, double>& b) {
  return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
}

// Upper and lower hull vertices of points sorted by x.
void hulls(const std::vector<std::pair<double, double>>& pts, std::vector<std::pair<double, double>>& upper,
           std::vector<std::pair<double, double>>& lower) {
  upper.clear();
  lower.clear();
  for (const auto& p : pts) {
    while (lower.size() >= 2 && cross(lower[lower.size() - 2], lower.back(), p) <= 0) lower.pop_back();
    lower.push_back(p);
    while (upper.size() >= 2 && cross(upper[upper.size() - 2], upper.back(), p) >= 0) upper.pop_back();
    upper.push_back(p);
  }
}

}  // namespace

ChebyshevFit chebyshev_scale_fit(const std::vector<double>& g, const std::vector<double>& target) {
  if (g.size() != target.size() || g.empty())
    throw Error(Errc::no_interior_nodes, "nothing to fit: no nodes with field values", "G");
  std::vector<std::pair<double, double>> pts(g.size());
  std::vector<double> ratio;
  for (std::size_t i = 0; i < g.size(); ++i) {
    pts[i] = {g[i], target[i]};
    if (g[i] > 0 && target[i] > 0) ratio.push_back(target[i] / g[i]);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> up, lo;
  hulls(pts, up, lo);
  auto sup = [&](double c) {
    double s = 0;
    for (const auto& p : up) s = std::max(s, p.second - c * p.first);
    for (const auto& p : lo) s = std::max(s, c * p.first - p.second);
    return s;
  };
  double med = 1.0;
  if (!ratio.empty()) {
    std::nth_element(ratio.begin(), ratio.begin() + static_cast<long>(ratio.size() / 2), ratio.end());
    med = ratio[ratio.size() / 2];
  }
  double a = std::log(0.01 * med), b = std::log(100.0 * med);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = sup(std::exp(x1)), f2 = sup(std::exp(x2));
  while (b - a > 1e-8) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = sup(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = sup(std::exp(x2));
    }
  }
  ChebyshevFit fit;
  fit.c = std::exp(0.5 * (a + b));
  fit.sup = sup(fit.c);
  return fit;
}

namespace {

struct FieldSample {
  std::vector<Point> x;
  std::vector<double> g;
  std::vector<std::size_t> node;
};

/// Nodes of Omega in the ball, visiting only the ball's bounding box. Boxes with more than
/// kFieldSample nodes are thinned to every stride-th node per axis.
constexpr double kFieldSample = 6000.0;

FieldSample sample_field(const ScalarGrid& G, const Domain& dom, const Ball& ball) {
  FieldSample s;
  const int n = G.dim();
  const Box box = Box::around(ball);
  double count = 1;
  for (int a = 0; a < n; ++a) {
    const Axis& ax = G.axis(a);
    count *= std::max<long>(1, std::upper_bound(ax.begin(), ax.end(), box.hi[a]) -
                                   std::lower_bound(ax.begin(), ax.end(), box.lo[a]));
  }
  const int stride = std::max(1, static_cast<int>(std::ceil(std::pow(count / kFieldSample, 1.0 / n))));
  for (std::size_t k : G.nodes_in_box(box, stride)) {
    const Point x = G.node(k);
    if (!ball.contains(x) || !std::isfinite(G[k]) || !dom.contains(x)) continue;
    s.x.push_back(x);
    s.g.push_back(G[k]);
    s.node.push_back(k);
  }
  if (s.x.empty()) throw Error(Errc::no_interior_nodes, "no grid node of Omega outside the collar in the ball", "G");
  return s;
}

}  // namespace

GreenPlaneVerdict good_green_plane(const ScalarGrid& G, const Domain& dom, const Ball& pair, double eps, double M,
                                   int d_int, const GreenPlaneOptions& opts) {
  const Ball big = pair.scaled(M);
  const FieldSample s = sample_field(G, dom, big);
  const int n = dom.ambient();
  if (d_int < 1 || d_int >= n) throw Error(Errc::invalid_params, "d_int out of range", "d_int");
  const DiscreteMeasure& mu = dom.boundary;
  const std::vector<std::size_t> idx = mu.indices_in_ball(big);

  auto fit = [&](const AffinePlane& p) {
    std::vector<double> t(s.x.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = p.distance(s.x[i]);
    return chebyshev_scale_fit(s.g, t);
  };

  GreenPlaneVerdict v;
  v.nodes = s.x.size();
  if (opts.plane) {
    v.plane = *opts.plane;
  } else {
    if (idx.size() < static_cast<std::size_t>(d_int + 1))
      throw Error(Errc::under_resolved, "too few cloud points to seed the plane search", "ball");
    Eigen::MatrixXd pts(n, static_cast<Eigen::Index>(idx.size()));
    Eigen::VectorXd w(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      pts.col(static_cast<Eigen::Index>(i)) = mu.point(idx[i]);
      w[static_cast<Eigen::Index>(i)] = mu.weight(idx[i]);
    }
    const AffinePlane seed = pca_plane(pts, w, d_int);
    const PlaneSearchResult r =
        search_plane([&](const AffinePlane& p) { return fit(p).sup; }, seed, pair.radius, opts.search);
    v.plane = r.plane;
  }
  const ChebyshevFit best = fit(v.plane);
  v.c = best.c;
  v.defect = best.sup / pair.radius;
  v.good = v.defect <= eps;

  double e_sup = 0;
  for (std::size_t i : idx) e_sup = std::max(e_sup, v.plane.distance(mu.point(i)));
  try {
    GreenField field;
    field.values = G;
    const HolderEnvelope env = holder_envelope(field, dom, big);
    const double collar = dom.collar_width();
    v.collar_bound = (collar + e_sup + v.c * env.c_upper * std::pow(collar / env.radius, env.gamma)) / pair.radius;
  } catch (const Error& e) {
    if (e.code() != Errc::insufficient_dynamic_range) throw;
    v.collar_bound = std::numeric_limits<double>::quiet_NaN();
  }
  return v;
}

GreenScaleVerdict good_green_dbeta(const ScalarGrid& G, const ScalarGrid& D, const Domain& dom, const Ball& pair,
                                   double eps, double M) {
  if (D.size() != G.size()) throw Error(Errc::invalid_params, "G and D layouts differ", "D");
  const FieldSample s = sample_field(G, dom, pair.scaled(M));
  std::vector<double> g, t;
  for (std::size_t i = 0; i < s.node.size(); ++i) {
    const double dv = D[s.node[i]];
    if (!std::isfinite(dv)) continue;
    g.push_back(s.g[i]);
    t.push_back(dv);
  }
  const ChebyshevFit f = chebyshev_scale_fit(g, t);
  GreenScaleVerdict v;
  v.c = f.c;
  v.defect = f.sup / pair.radius;
  v.good = v.defect <= eps;
  v.nodes = g.size();
  return v;
}

namespace {

struct GradSample {
  std::vector<Eigen::VectorXd> target, grad;
  std::vector<double> vol;
};

GradSample gradient_sample(const ScalarGrid& G, const VectorField& target_grad, const Domain& dom, const Ball& pair,
                           double M) {
  const WhitneyRegion wr = whitney_region(dom, G, pair, M);
  GradSample s;
  for (std::size_t k : wr.member_nodes) {
    if (G.on_boundary(k)) continue;
    const Point x = G.node(k);
    s.target.push_back(target_grad(x));
    s.grad.push_back(G.gradient(k));
    s.vol.push_back(G.cell_volume(k));
  }
  if (s.vol.empty()) throw Error(Errc::empty_whitney, "Whitney region has no interior grid nodes", "M");
  return s;
}

double residual(const GradSample& s, double c) {
  double r = 0;
  for (std::size_t i = 0; i < s.vol.size(); ++i) r += s.vol[i] * (s.target[i] - c * s.grad[i]).squaredNorm();
  return r;
}

}  // namespace

GreenScaleVerdict good_grad_green(const ScalarGrid& G, const VectorField& target_grad, const Domain& dom,
                                  const Ball& pair, double eps, double M) {
  const GradSample s = gradient_sample(G, target_grad, dom, pair, M);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < s.vol.size(); ++i) {
    num += s.vol[i] * s.target[i].dot(s.grad[i]);
    den += s.vol[i] * s.grad[i].squaredNorm();
  }
  GreenScaleVerdict v;
  v.c = den > 0 ? num / den : 0.0;
  v.defect = residual(s, v.c) / std::pow(pair.radius, dom.ambient());
  v.good = v.defect <= eps;
  v.nodes = s.vol.size();
  return v;
}

double grad_green_residual(const ScalarGrid& G, const VectorField& target_grad, const Domain& dom, const Ball& pair,
                           double M, double c) {
  return residual(gradient_sample(G, target_grad, dom, pair, M), c) / std::pow(pair.radius, dom.ambient());
}

// ---------------------------------------------------------------------------
// Prevalence audit

PrevalenceReport prevalence_audit(const DiscreteMeasure& mu, const Ball& root, int levels, const PairPredicate& good,
                                  const PrevalenceOptions& opts) {
  if (levels < 4) throw Error(Errc::invalid_params, "the audit needs at least 4 levels", "levels");
  if (opts.windows < 16) throw Error(Errc::invalid_params, "the audit needs at least 16 windows", "windows");
  const double wr = 0.5 * root.radius;
  std::vector<std::size_t> cand = mu.indices_in_ball(Ball{root.center, wr});
  if (cand.empty()) throw Error(Errc::invalid_params, "root ball holds no point of E", "root");

  // Farthest-point selection of window centres, starting next to the root centre.
  std::vector<std::size_t> chosen;
  std::vector<double> gap(cand.size(), std::numeric_limits<double>::infinity());
  std::size_t next = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cand.size(); ++i) {
    const double d = (mu.point(cand[i]) - root.center).norm();
    if (d < best) {
      best = d;
      next = i;
    }
  }
  while (chosen.size() < static_cast<std::size_t>(opts.windows)) {
    chosen.push_back(cand[next]);
    double far = -1;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      gap[i] = std::min(gap[i], (mu.point(cand[i]) - mu.point(cand[next])).norm());
      if (gap[i] > far) {
        far = gap[i];
        next = i;
      }
    }
    if (far <= 0) next = chosen.size() % cand.size();
  }

  PrevalenceReport rep;
  rep.packing_constant_per_level.assign(static_cast<std::size_t>(levels), 0.0);
  for (std::size_t wi = 0; wi < chosen.size(); ++wi) {
    WindowAudit wa;
    wa.window = Ball{mu.point(chosen[wi]), wr};
    const ScalePairSet set = dyadic_pairs(mu, wa.window, levels, opts.samples_per_level, opts.seed + 7919 * wi);
    const std::vector<char> ok = evaluate(set, good);
    wa.per_level.assign(static_cast<std::size_t>(levels), 0.0);
    double good_w = 0, total_w = 0, deep_bad = 0, deep_total = 0;
    for (std::size_t i = 0; i < set.pairs.size(); ++i) {
      const ScalePair& p = set.pairs[i];
      total_w += p.weight;
      const bool deep = 2 * p.level >= levels;
      if (deep) deep_total += p.weight;
      if (ok[i]) {
        good_w += p.weight;
        if (p.radius >= opts.a * wr) wa.good_pair_above_a = true;
      } else {
        wa.per_level[static_cast<std::size_t>(p.level)] += p.weight / set.normalization;
        if (deep) deep_bad += p.weight;
        if (static_cast<int>(wa.bad_examples.size()) < opts.examples) wa.bad_examples.push_back(p);
      }
    }
    wa.good_fraction = total_w > 0 ? good_w / total_w : 0.0;
    wa.deep_bad_fraction = deep_total > 0 ? deep_bad / deep_total : 0.0;
    double run = 0;
    for (double v : wa.per_level) wa.cumulative.push_back(run += v);
    for (std::size_t l = 0; l < wa.cumulative.size(); ++l)
      rep.packing_constant_per_level[l] += wa.cumulative[l] / static_cast<double>(chosen.size());
    rep.max_deep_bad_fraction = std::max(rep.max_deep_bad_fraction, wa.deep_bad_fraction);
    rep.windows.push_back(std::move(wa));
  }
  rep.consistent = rep.max_deep_bad_fraction <= opts.deep_fraction_threshold;
  rep.verdict = rep.consistent ? "consistent-with-prevalent" : "inconsistent";
  return rep;
}

double oscillating_band_coefficient(double y) {
  if (!(y > 0)) throw Error(Errc::invalid_params, "the band coefficient is defined for y > 0", "y");
  const double k = std::floor(std::log(y) / std::log(4.0));
  double base = std::pow(4.0, k);
  // Guard against rounding at band edges.
  if (base > y) base /= 4.0;
  if (4.0 * base <= y) base *= 4.0;
  return y < 2.0 * base ? 1.0 : 2.0;
}

double oscillating_band_solution(double y) {
  if (y < 0) throw Error(Errc::invalid_params, "the band solution is defined for y >= 0", "y");
  if (y == 0) return 0.0;
  double base = std::pow(4.0, std::floor(std::log(y) / std::log(4.0)));
  if (base > y) base /= 4.0;
  if (4.0 * base <= y) base *= 4.0;
  // Bands below base have total length base / 3; 1/a = 1/2 + (1/2) 1_band.
  const double band = base / 3.0 + std::min(y, 2.0 * base) - base;
  return 0.5 * y + 0.5 * band;
}

}  // namespace gdl
