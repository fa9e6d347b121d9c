#include "gdl/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <queue>
#include <random>

#include "gdl/error.hpp"

namespace gdl {

double unit_ball_volume(double d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

bool Box::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

// ---------------------------------------------------------------------------
// AffinePlane

AffinePlane::AffinePlane(Point base, Eigen::MatrixXd frame) : base_(std::move(base)), frame_(std::move(frame)) {
  if (frame_.rows() != base_.size() || frame_.cols() < 1 || frame_.cols() >= frame_.rows())
    throw Error(Errc::invalid_params, "plane frame must be n x d with 1 <= d <= n-1", "frame");
  if (!orthonormal(1e-12)) throw Error(Errc::invalid_params, "plane frame is not orthonormal", "frame");
}

AffinePlane AffinePlane::from_span(Point base, const Eigen::MatrixXd& directions) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(directions);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(directions.rows(), directions.cols());
  // Keep orientation close to the given directions.
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (q.col(j).dot(directions.col(j)) < 0) q.col(j) = -q.col(j);
  // One Gram-Schmidt pass tightens orthonormality to rounding level.
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    for (Eigen::Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    q.col(j).normalize();
  }
  return AffinePlane(std::move(base), std::move(q));
}

AffinePlane AffinePlane::coordinate(int n, int d) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, d);
  for (int i = 0; i < d; ++i) f(i, i) = 1.0;
  return AffinePlane(Point::Zero(n), f);
}

Point AffinePlane::project(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return base_ + frame_ * (frame_.transpose() * (x - base_));
}

double AffinePlane::distance(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd v = x - base_;
  const double sq = v.squaredNorm() - (frame_.transpose() * v).squaredNorm();
  return std::sqrt(std::max(0.0, sq));
}

Eigen::MatrixXd AffinePlane::normal_basis() const {
  const int n = ambient();
  const int d = dim();
  Eigen::MatrixXd full(n, n);
  full.leftCols(d) = frame_;
  full.rightCols(n - d).setZero();
  // Complete with coordinate axes, Gram-Schmidt.
  int col = d;
  for (int axis = 0; axis < n && col < n; ++axis) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(n, axis);
    for (int k = 0; k < col; ++k) v -= full.col(k).dot(v) * full.col(k);
    if (v.norm() > 1e-8) {
      full.col(col++) = v.normalized();
    }
  }
  return full.rightCols(n - d);
}

bool AffinePlane::orthonormal(double tol) const {
  const Eigen::MatrixXd g = frame_.transpose() * frame_;
  return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// DiscreteMeasure

DiscreteMeasure::DiscreteMeasure(Eigen::MatrixXd points, Eigen::VectorXd weights, double dim_d,
                                 double resolution_h) {
  if (points.cols() != weights.size())
    throw Error(Errc::invalid_params, "points and weights differ in length", "weights");
  if (points.rows() < 1) throw Error(Errc::invalid_params, "ambient dimension must be >= 1", "points");
  if (!(dim_d > 0.0) || !(dim_d < static_cast<double>(points.rows())))
    throw Error(Errc::invalid_params, "dimension d must lie in (0, n)", "dim_d");
  if (!(resolution_h > 0.0)) throw Error(Errc::invalid_params, "resolution_h must be positive", "resolution_h");
  if (weights.size() > 0 && !(weights.minCoeff() > 0.0))
    throw Error(Errc::invalid_params, "weights must be strictly positive", "weights");
  if (!std::isfinite(weights.sum())) throw Error(Errc::invalid_params, "total mass must be finite", "weights");
  auto impl = std::make_shared<Impl>();
  impl->tree = KdTree(points);
  impl->points = std::move(points);
  impl->weights = std::move(weights);
  impl->dim_d = dim_d;
  impl->resolution_h = resolution_h;
  impl_ = std::move(impl);
}

DiscreteMeasure DiscreteMeasure::with_metadata(std::optional<double> ar_constant, std::uint64_t seed) const {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->ar_constant = ar_constant;
  impl->seed = seed;
  DiscreteMeasure out;
  out.impl_ = std::move(impl);
  return out;
}

double DiscreteMeasure::mass_in_ball(const Ball& b) const {
  double m = 0;
  for (auto i : indices_in_ball(b)) m += weight(i);
  return m;
}

Point DiscreteMeasure::centroid() const {
  return impl_->points * impl_->weights / impl_->weights.sum();
}

double DiscreteMeasure::radius_about_centroid() const {
  const Point c = centroid();
  return (impl_->points.colwise() - c).colwise().norm().maxCoeff();
}

DiscreteMeasure DiscreteMeasure::transformed(const Eigen::MatrixXd& rotation, const Point& translation,
                                             double scale) const {
  Eigen::MatrixXd p = (scale * rotation * impl_->points).colwise() + translation;
  Eigen::VectorXd w = impl_->weights * std::pow(scale, impl_->dim_d);
  return DiscreteMeasure(std::move(p), std::move(w), impl_->dim_d, impl_->resolution_h * scale)
      .with_metadata(impl_->ar_constant, impl_->seed);
}

DiscreteMeasure DiscreteMeasure::half() const {
  const Eigen::Index n = impl_->points.cols();
  const Eigen::Index m = (n + 1) / 2;
  Eigen::MatrixXd p(impl_->points.rows(), m);
  Eigen::VectorXd w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    p.col(i) = impl_->points.col(2 * i);
    w[i] = 2.0 * impl_->weights[2 * i];
  }
  return DiscreteMeasure(std::move(p), std::move(w), impl_->dim_d, 2.0 * impl_->resolution_h);
}

DiscreteMeasure DiscreteMeasure::with_total_mass(double mass) const {
  Eigen::VectorXd w = impl_->weights * (mass / impl_->weights.sum());
  return DiscreteMeasure(impl_->points, std::move(w), impl_->dim_d, impl_->resolution_h)
      .with_metadata(impl_->ar_constant, impl_->seed);
}

// ---------------------------------------------------------------------------
// Generation

SetKind parse_set_kind(const std::string& name) {
  if (name == "plane") return SetKind::plane;
  if (name == "lipschitz_graph") return SetKind::lipschitz_graph;
  if (name == "koch_snowflake") return SetKind::koch_snowflake;
  if (name == "cantor_dust") return SetKind::cantor_dust;
  if (name == "custom_points") return SetKind::custom_points;
  throw Error(Errc::invalid_params, "unknown set kind '" + name + "'", "kind");
}

std::string to_string(SetKind kind) {
  switch (kind) {
    case SetKind::plane: return "plane";
    case SetKind::lipschitz_graph: return "lipschitz_graph";
    case SetKind::koch_snowflake: return "koch_snowflake";
    case SetKind::cantor_dust: return "cantor_dust";
    case SetKind::custom_points: return "custom_points";
  }
  return "?";
}

namespace {

struct Nodes1d {
  std::vector<double> x;
  std::vector<double> width;
};

// Cell-centred nodes on [-hw, hw] (m cells), optionally continued by cells growing
// geometrically until `outer` is reached.
Nodes1d nodes_1d(double hw, int m, double outer, double grading) {
  Nodes1d core;
  const double h = 2.0 * hw / m;
  for (int i = 0; i < m; ++i) {
    core.x.push_back(-hw + (i + 0.5) * h);
    core.width.push_back(h);
  }
  if (!(outer > hw)) return core;
  std::vector<double> ext_x, ext_w;
  double edge = hw, w = h;
  while (edge < outer) {
    w *= grading;
    const double cw = std::min(w, outer - edge);
    ext_x.push_back(edge + 0.5 * cw);
    ext_w.push_back(cw);
    edge += cw;
  }
  Nodes1d out;
  for (std::size_t i = ext_x.size(); i-- > 0;) {
    out.x.push_back(-ext_x[i]);
    out.width.push_back(ext_w[i]);
  }
  out.x.insert(out.x.end(), core.x.begin(), core.x.end());
  out.width.insert(out.width.end(), core.width.begin(), core.width.end());
  out.x.insert(out.x.end(), ext_x.begin(), ext_x.end());
  out.width.insert(out.width.end(), ext_w.begin(), ext_w.end());
  return out;
}

// Tensor product of a 1-D rule in d dimensions: returns (d x N coordinates, N cell volumes).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> tensor_nodes(const Nodes1d& rule, int d) {
  const std::size_t m = rule.x.size();
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= m;
  Eigen::MatrixXd pts(d, static_cast<Eigen::Index>(total));
  Eigen::VectorXd vol(static_cast<Eigen::Index>(total));
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    double v = 1.0;
    for (int a = 0; a < d; ++a) {
      idx[a] = rem % m;
      rem /= m;
      pts(a, static_cast<Eigen::Index>(k)) = rule.x[idx[a]];
      v *= rule.width[idx[a]];
    }
    vol[static_cast<Eigen::Index>(k)] = v;
  }
  return {std::move(pts), std::move(vol)};
}

void require(bool ok, const std::string& msg, const std::string& field) {
  if (!ok) throw Error(Errc::invalid_params, msg, field);
}

std::vector<int> cantor_corner_order(int n) {
  const int all = 1 << n;
  std::vector<int> order{0, all - 1};
  for (int c = 1; c < all - 1; ++c) order.push_back(c);
  return order;
}

}  // namespace

double lipschitz_profile(const SetParams& p, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const int d = static_cast<int>(x.size());
  double s = 0;
  for (int i = 0; i < d; ++i) s += std::sin(p.frequency * x[i] + 0.7 * i);
  return p.lipschitz / p.frequency * s / std::sqrt(static_cast<double>(d));
}

Eigen::MatrixXd koch_polyline(int iterations, double side, double x0) {
  std::vector<Eigen::Vector2d> pts{{x0, 0.0}, {x0 + side, 0.0}};
  const Eigen::Rotation2Dd rot(std::numbers::pi / 3.0);
  for (int it = 0; it < iterations; ++it) {
    std::vector<Eigen::Vector2d> next;
    next.reserve(4 * pts.size());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const Eigen::Vector2d a = pts[i], b = pts[i + 1];
      const Eigen::Vector2d step = (b - a) / 3.0;
      const Eigen::Vector2d p1 = a + step, p3 = a + 2.0 * step;
      const Eigen::Vector2d p2 = p1 + rot * step;
      next.push_back(a);
      next.push_back(p1);
      next.push_back(p2);
      next.push_back(p3);
    }
    next.push_back(pts.back());
    pts = std::move(next);
  }
  Eigen::MatrixXd out(2, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = pts[i];
  return out;
}

ArEstimate estimate_ar_constant(const DiscreteMeasure& mu, std::uint64_t seed, int samples_per_scale,
                                bool interior_only) {
  ArEstimate est;
  const double h = mu.resolution_h();
  const Point c = mu.centroid();
  const double big_r = mu.radius_about_centroid();
  const double diam = 2.0 * big_r;
  const double vol = unit_ball_volume(mu.dim_d());
  std::mt19937_64 rng(seed);
  double worst = 1.0;
  std::vector<double> radii;
  for (double r = 10.0 * h; r <= diam / 4.0 * (1 + 1e-12); r *= 2.0) radii.push_back(r);
  if (radii.empty()) radii.push_back(diam / 4.0);
  for (double r : radii) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (!interior_only || (mu.point(i) - c).norm() + r <= big_r * (1 + 1e-12)) candidates.push_back(i);
    }
    if (candidates.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    ArScale sc{r, std::numeric_limits<double>::infinity(), 0.0};
    for (int s = 0; s < samples_per_scale; ++s) {
      const std::size_t i = candidates[pick(rng)];
      const double ratio = mu.mass_in_ball(Ball{mu.point(i), r}) / (vol * std::pow(r, mu.dim_d()));
      sc.min_ratio = std::min(sc.min_ratio, ratio);
      sc.max_ratio = std::max(sc.max_ratio, ratio);
    }
    worst = std::max({worst, sc.max_ratio, 1.0 / sc.min_ratio});
    est.scales.push_back(sc);
  }
  est.constant = worst;
  return est;
}

DiscreteMeasure generate_set(SetKind kind, const SetParams& p, int target_count, std::uint64_t seed) {
  if (target_count < 16) throw Error(Errc::count_too_small, "target_count below 16 points", "target_count");
  const int n = p.ambient_dim;
  require(n >= 1, "ambient_dim must be >= 1", "ambient_dim");
  Eigen::MatrixXd pts;
  Eigen::VectorXd w;
  double dim_d = 1.0, h = 1.0;
  bool interior_only = false;

  switch (kind) {
    case SetKind::plane: {
      const int d = p.plane_dim;
      require(d >= 1 && d <= n - 1, "plane_dim must lie in [1, n-1]", "plane_dim");
      require(p.half_width > 0, "half_width must be positive", "half_width");
      require(p.grading >= 1.0, "grading must be >= 1", "grading");
      const int m = std::max(2, static_cast<int>(std::lround(std::pow(target_count, 1.0 / d))));
      const Nodes1d rule = nodes_1d(p.half_width, m, p.outer_extent, p.grading);
      auto [local, vol] = tensor_nodes(rule, d);
      pts = Eigen::MatrixXd::Zero(n, local.cols());
      pts.topRows(d) = local;
      w = vol;
      dim_d = d;
      h = 2.0 * p.half_width / m;
      interior_only = true;
      break;
    }
    case SetKind::lipschitz_graph: {
      const int d = n - 1;
      require(d >= 1, "graphs need ambient_dim >= 2", "ambient_dim");
      require(p.lipschitz >= 0, "Lipschitz constant must be >= 0", "lipschitz");
      require(p.frequency > 0, "frequency must be positive", "frequency");
      require(p.half_width > 0, "half_width must be positive", "half_width");
      const int m = std::max(2, static_cast<int>(std::lround(std::pow(target_count, 1.0 / d))));
      const Nodes1d rule = nodes_1d(p.half_width, m, 0.0, 1.0);
      auto [local, vol] = tensor_nodes(rule, d);
      pts.resize(n, local.cols());
      w.resize(local.cols());
      for (Eigen::Index i = 0; i < local.cols(); ++i) {
        pts.col(i).head(d) = local.col(i);
        pts(d, i) = lipschitz_profile(p, local.col(i));
        double g2 = 0;
        for (int a = 0; a < d; ++a) {
          const double gi = p.lipschitz / std::sqrt(static_cast<double>(d)) *
                            std::cos(p.frequency * local(a, i) + 0.7 * a);
          g2 += gi * gi;
        }
        w[i] = vol[i] * std::sqrt(1.0 + g2);
      }
      dim_d = d;
      h = 2.0 * p.half_width / m * std::sqrt(1.0 + p.lipschitz * p.lipschitz);
      interior_only = true;
      break;
    }
    case SetKind::koch_snowflake: {
      require(n == 2, "Koch curves live in the plane (ambient_dim = 2)", "ambient_dim");
      require(p.side > 0, "side must be positive", "side");
      require(p.copies >= 1, "copies must be >= 1", "copies");
      int k = p.iterations;
      if (k <= 0) k = std::max(1, static_cast<int>(std::floor(std::log(target_count / static_cast<double>(p.copies)) / std::log(4.0))));
      require(k <= 10, "too many Koch iterations", "iterations");
      const long segs = 1L << (2 * k);
      const int per_seg = std::max(1, static_cast<int>(std::lround(target_count / static_cast<double>(segs * p.copies))));
      const double x_origin = std::isnan(p.x_origin) ? -0.5 * p.copies * p.side : p.x_origin;
      dim_d = std::log(4.0) / std::log(3.0);
      const double seg_len = p.side / std::pow(3.0, k);
      const long total = segs * per_seg * p.copies;
      pts.resize(2, total);
      w = Eigen::VectorXd::Constant(total, std::pow(p.side, dim_d) / static_cast<double>(segs * per_seg));
      Eigen::Index col = 0;
      for (int c = 0; c < p.copies; ++c) {
        const Eigen::MatrixXd poly = koch_polyline(k, p.side, x_origin + c * p.side);
        for (Eigen::Index s = 0; s + 1 < poly.cols(); ++s)
          for (int j = 0; j < per_seg; ++j) {
            const double t = (j + 0.5) / per_seg;
            pts.col(col++) = (1 - t) * poly.col(s) + t * poly.col(s + 1);
          }
      }
      h = seg_len / per_seg;
      interior_only = p.copies > 1;
      break;
    }
    case SetKind::cantor_dust: {
      require(p.ratio > 0 && p.ratio < 0.5, "Cantor contraction ratio must lie in (0, 1/2)", "ratio");
      require(n <= 16, "ambient_dim too large for Cantor dust", "ambient_dim");
      const int all = 1 << n;
      const int N = p.branches > 0 ? p.branches : all;
      require(N >= 2 && N <= all, "branches must lie in [2, 2^n]", "branches");
      require(p.side > 0, "side must be positive", "side");
      int k = p.iterations;
      if (k <= 0) k = std::max(1, static_cast<int>(std::lround(std::log(static_cast<double>(target_count)) / std::log(static_cast<double>(N)))));
      require(std::pow(static_cast<double>(N), k) <= 4e6, "too many Cantor iterations", "iterations");
      const std::vector<int> corners = cantor_corner_order(n);
      // Lower corners of the current cubes.
      std::vector<Eigen::VectorXd> lows{Eigen::VectorXd::Constant(n, -0.5 * p.side)};
      double cube = p.side;
      for (int it = 0; it < k; ++it) {
        std::vector<Eigen::VectorXd> next;
        next.reserve(lows.size() * N);
        const double child = cube * p.ratio;
        for (const auto& lo : lows)
          for (int b = 0; b < N; ++b) {
            Eigen::VectorXd c = lo;
            for (int a = 0; a < n; ++a)
              if (corners[b] & (1 << a)) c[a] += cube - child;
            next.push_back(std::move(c));
          }
        lows = std::move(next);
        cube = child;
      }
      dim_d = std::log(static_cast<double>(N)) / std::log(1.0 / p.ratio);
      require(dim_d < n, "Cantor dimension must be below n", "ratio");
      pts.resize(n, static_cast<Eigen::Index>(lows.size()));
      for (std::size_t i = 0; i < lows.size(); ++i)
        pts.col(static_cast<Eigen::Index>(i)) = lows[i].array() + 0.5 * cube;
      w = Eigen::VectorXd::Constant(pts.cols(), std::pow(p.side, dim_d) / static_cast<double>(lows.size()));
      h = cube;
      break;
    }
    case SetKind::custom_points: {
      require(p.custom_points.rows() == n, "custom points must have ambient_dim rows", "custom_points");
      pts = p.custom_points;
      w = p.custom_weights.size() == pts.cols()
              ? p.custom_weights
              : Eigen::VectorXd::Constant(pts.cols(), 1.0 / std::max<Eigen::Index>(1, pts.cols()));
      dim_d = p.custom_dim;
      h = p.custom_resolution;
      require(h > 0, "custom_resolution must be positive", "custom_resolution");
      break;
    }
  }
  if (pts.cols() < 16) throw Error(Errc::count_too_small, "fewer than 16 points generated", "target_count");
  if (p.total_mass > 0) w *= p.total_mass / w.sum();
  DiscreteMeasure mu(std::move(pts), std::move(w), dim_d, h);
  const ArEstimate ar = estimate_ar_constant(mu, seed, 64, interior_only);
  return mu.with_metadata(ar.constant, seed);
}

// ---------------------------------------------------------------------------
// Local Hausdorff distance

double local_hausdorff(const DiscreteMeasure& e, const DiscreteMeasure& f, const Ball& ball) {
  double e_side = 0, f_side = 0;
  for (auto i : e.indices_in_ball(ball)) e_side = std::max(e_side, f.distance(e.point(i)));
  for (auto i : f.indices_in_ball(ball)) f_side = std::max(f_side, e.distance(f.point(i)));
  return (e_side + f_side) / ball.radius;
}

Eigen::MatrixXd plane_lattice(const AffinePlane& plane, const Ball& ball, double spacing) {
  const double off = plane.distance(ball.center);
  const int n = plane.ambient();
  if (off >= ball.radius) return Eigen::MatrixXd(n, 0);
  const double rho = std::sqrt(ball.radius * ball.radius - off * off);
  const Point c = plane.project(ball.center);
  const int d = plane.dim();
  const int m = static_cast<int>(std::floor(rho / spacing));
  const int side = 2 * m + 1;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(side);
  std::vector<Point> pts;
  Eigen::VectorXd u(d);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    for (int a = 0; a < d; ++a) {
      u[a] = (static_cast<int>(rem % side) - m) * spacing;
      rem /= side;
    }
    if (u.norm() < rho) pts.push_back(c + plane.frame() * u);
  }
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = pts[i];
  return out;
}

double local_hausdorff(const DiscreteMeasure& e, const AffinePlane& plane, const Ball& ball, double spacing) {
  if (spacing <= 0) spacing = 0.5 * e.resolution_h();
  double e_side = 0, p_side = 0;
  for (auto i : e.indices_in_ball(ball)) e_side = std::max(e_side, plane.distance(e.point(i)));
  const Eigen::MatrixXd lat = plane_lattice(plane, ball, spacing);
  for (Eigen::Index j = 0; j < lat.cols(); ++j) p_side = std::max(p_side, e.distance(lat.col(j)));
  return (e_side + p_side) / ball.radius;
}

// ---------------------------------------------------------------------------
// Side selectors

namespace side {

SideSelector everywhere() {
  return [](const Eigen::Ref<const Eigen::VectorXd>&) { return true; };
}

SideSelector halfspace(Point normal, double offset) {
  return [normal = std::move(normal), offset](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return normal.dot(x) > offset;
  };
}

SideSelector above_graph(std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)> f) {
  return [f = std::move(f)](const Eigen::Ref<const Eigen::VectorXd>& x) {
    const Eigen::Index n = x.size();
    return x[n - 1] > f(x.head(n - 1));
  };
}

SideSelector above_polyline(Eigen::MatrixXd poly, double period) {
  const double x0 = poly.row(0).minCoeff();
  return [poly = std::move(poly), period, x0](const Eigen::Ref<const Eigen::VectorXd>& q) {
    double x = q[0];
    const double y = q[1];
    if (period > 0) x = x0 + std::fmod(std::fmod(x - x0, period) + period, period);
    // Parity of crossings of the downward vertical ray.
    int crossings = 0;
    for (Eigen::Index i = 0; i + 1 < poly.cols(); ++i) {
      const double ax = poly(0, i), ay = poly(1, i), bx = poly(0, i + 1), by = poly(1, i + 1);
      if ((ax <= x) == (bx <= x)) continue;  // half-open rule at vertices
      const double t = (x - ax) / (bx - ax);
      const double cy = ay + t * (by - ay);
      if (cy < y) ++crossings;
    }
    return (crossings % 2) == 1;
  };
}

}  // namespace side

bool Domain::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return box.contains(x) && boundary.distance(x) > collar_width() && side(x);
}

// ---------------------------------------------------------------------------
// Lattice searches

namespace {

struct Lattice {
  Point lo;
  double s = 1;
  std::vector<long> shape;
  std::size_t size = 0;

  Lattice(const Box& box, double spacing, std::size_t max_nodes) : lo(box.lo), s(spacing) {
    const int n = box.dim();
    for (;;) {
      shape.assign(n, 0);
      size = 1;
      for (int a = 0; a < n; ++a) {
        shape[a] = static_cast<long>(std::floor((box.hi[a] - box.lo[a]) / s)) + 1;
        size *= static_cast<std::size_t>(shape[a]);
      }
      if (size <= max_nodes) break;
      s *= std::pow(static_cast<double>(size) / max_nodes, 1.0 / n) * 1.01;
    }
  }
  int dim() const { return static_cast<int>(shape.size()); }
  Point node(std::size_t k) const {
    Point p(dim());
    for (int a = 0; a < dim(); ++a) {
      p[a] = lo[a] + s * static_cast<double>(k % shape[a]);
      k /= shape[a];
    }
    return p;
  }
  std::vector<long> multi(std::size_t k) const {
    std::vector<long> m(dim());
    for (int a = 0; a < dim(); ++a) {
      m[a] = static_cast<long>(k % shape[a]);
      k /= shape[a];
    }
    return m;
  }
  long flat(const std::vector<long>& m) const {
    long k = 0, stride = 1;
    for (int a = 0; a < dim(); ++a) {
      if (m[a] < 0 || m[a] >= shape[a]) return -1;
      k += m[a] * stride;
      stride *= shape[a];
    }
    return k;
  }
  std::size_t nearest(const Point& p) const {
    std::vector<long> m(dim());
    for (int a = 0; a < dim(); ++a)
      m[a] = std::clamp(static_cast<long>(std::lround((p[a] - lo[a]) / s)), 0L, shape[a] - 1);
    return static_cast<std::size_t>(flat(m));
  }
};

}  // namespace

std::optional<Point> corkscrew_point(const Domain& dom, const Ball& ball, double c_target, int per_radius) {
  if (ball.radius < 2.0 * dom.boundary.resolution_h()) return std::nullopt;
  const int n = dom.ambient();
  if (per_radius <= 0) per_radius = n <= 2 ? 24 : (n == 3 ? 16 : 8);
  const double s = ball.radius / per_radius;
  const int side = 2 * per_radius + 1;
  std::size_t total = 1;
  for (int a = 0; a < n; ++a) total *= static_cast<std::size_t>(side);
  std::optional<Point> best;
  double best_dist = -1;
  Point x(n);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    for (int a = 0; a < n; ++a) {
      x[a] = ball.center[a] + (static_cast<int>(rem % side) - per_radius) * s;
      rem /= side;
    }
    if (!ball.contains(x) || !dom.box.contains(x) || !dom.side(x)) continue;
    const double dx = dom.boundary.distance(x);
    if (dx <= dom.collar_width() || dx < c_target * ball.radius) continue;
    if (dx > best_dist) {
      best_dist = dx;
      best = x;
    }
  }
  return best;
}

std::optional<HarnackChain> harnack_chain(const Domain& dom, const Point& x, const Point& y, double step_factor,
                                          double spacing) {
  if (!dom.contains(x) || !dom.contains(y)) return std::nullopt;
  const double collar = dom.collar_width();
  const double dx = dom.boundary.distance(x), dy = dom.boundary.distance(y);
  const double floor_r = step_factor * std::min(dx, dy);
  auto ball_radius = [&](double dist) { return 0.5 * (dist - collar); };
  if (ball_radius(dx) < floor_r || ball_radius(dy) < floor_r) return std::nullopt;

  HarnackChain chain;
  chain.radius_floor = floor_r;
  const Ball bx{x, ball_radius(dx)}, by{y, ball_radius(dy)};
  if ((x - y).norm() < bx.radius + by.radius) {
    chain.balls = {bx, by};
    return chain;
  }

  const Lattice lat(dom.box, spacing > 0 ? spacing : floor_r, 2'000'000);
  const int n = lat.dim();
  std::vector<double> node_dist(lat.size, -1.0);
  std::vector<char> ok(lat.size, 0);
  for (std::size_t k = 0; k < lat.size; ++k) {
    const Point p = lat.node(k);
    if (!dom.side(p)) continue;
    const double d = dom.boundary.distance(p);
    node_dist[k] = d;
    ok[k] = d > collar && ball_radius(d) >= floor_r;
  }

  // Entry / exit nodes: admissible nodes whose balls meet the end balls.
  auto attach = [&](const Ball& end) -> long {
    long best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    const long reach = static_cast<long>(std::ceil((end.radius + 2 * end.radius) / lat.s)) + 1;
    const std::vector<long> c = lat.multi(lat.nearest(end.center));
    std::vector<long> m(n);
    const long width = 2 * reach + 1;
    long total = 1;
    for (int a = 0; a < n; ++a) total *= width;
    for (long t = 0; t < total; ++t) {
      long rem = t;
      for (int a = 0; a < n; ++a) {
        m[a] = c[a] + (rem % width) - reach;
        rem /= width;
      }
      const long k = lat.flat(m);
      if (k < 0 || !ok[k]) continue;
      const Point p = lat.node(k);
      const double dd = (p - end.center).norm();
      if (dd < end.radius + ball_radius(node_dist[k]) && dd < best_d) {
        best_d = dd;
        best = k;
      }
    }
    return best;
  };
  const long start = attach(bx), goal = attach(by);
  if (start < 0 || goal < 0) return std::nullopt;

  // Dijkstra on the 3^n - 1 neighbourhood.
  std::vector<std::vector<long>> offsets;
  {
    long total = 1;
    for (int a = 0; a < n; ++a) total *= 3;
    for (long t = 0; t < total; ++t) {
      std::vector<long> o(n);
      long rem = t;
      bool zero = true;
      for (int a = 0; a < n; ++a) {
        o[a] = rem % 3 - 1;
        rem /= 3;
        zero = zero && o[a] == 0;
      }
      if (!zero) offsets.push_back(o);
    }
  }
  std::vector<double> dist(lat.size, std::numeric_limits<double>::infinity());
  std::vector<long> prev(lat.size, -1);
  using Item = std::pair<double, long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[start] = 0;
  pq.emplace(0.0, start);
  while (!pq.empty()) {
    auto [d, k] = pq.top();
    pq.pop();
    if (d > dist[k]) continue;
    if (k == goal) break;
    const std::vector<long> m = lat.multi(static_cast<std::size_t>(k));
    std::vector<long> q(n);
    for (const auto& o : offsets) {
      double len2 = 0;
      for (int a = 0; a < n; ++a) {
        q[a] = m[a] + o[a];
        len2 += static_cast<double>(o[a] * o[a]);
      }
      const long j = lat.flat(q);
      if (j < 0 || !ok[j]) continue;
      const double nd = d + std::sqrt(len2) * lat.s;
      if (nd < dist[j]) {
        dist[j] = nd;
        prev[j] = k;
        pq.emplace(nd, j);
      }
    }
  }
  if (!std::isfinite(dist[goal])) return std::nullopt;
  std::vector<long> path;
  for (long k = goal; k >= 0; k = prev[k]) path.push_back(k);
  std::reverse(path.begin(), path.end());

  // Greedy covering: jump to the farthest path node whose ball still meets the current one.
  chain.balls.push_back(bx);
  auto meets = [](const Ball& a, const Ball& b) { return (a.center - b.center).norm() < a.radius + b.radius; };
  std::size_t i = 0;
  Ball current = bx;
  while (!meets(current, by)) {
    std::size_t next = i;
    for (std::size_t j = i; j < path.size(); ++j) {
      const Ball cand{lat.node(static_cast<std::size_t>(path[j])), ball_radius(node_dist[path[j]])};
      if (meets(current, cand)) next = j;
    }
    const Ball nb{lat.node(static_cast<std::size_t>(path[next])), ball_radius(node_dist[path[next]])};
    if (next == i && chain.balls.size() > 1) return std::nullopt;  // stuck
    chain.balls.push_back(nb);
    current = nb;
    i = next + 1;
    if (i >= path.size() && !meets(current, by)) return std::nullopt;
  }
  chain.balls.push_back(by);
  return chain;
}

std::optional<std::pair<Point, Point>> condition_b_witness(const Domain& dom, const Ball& ball, double c,
                                                            double spacing) {
  const int n = dom.ambient();
  if (std::abs(dom.boundary.dim_d() - (n - 1)) > 1e-9)
    throw Error(Errc::invalid_params, "Condition B is defined in co-dimension one only", "dim_d");
  const Lattice lat(dom.box, spacing > 0 ? spacing : std::max(c * ball.radius / 4.0, dom.boundary.resolution_h()),
                    1'000'000);
  const double wall = std::max(dom.collar_width(), 0.5 * lat.s + dom.boundary.resolution_h());
  std::vector<double> node_dist(lat.size);
  for (std::size_t k = 0; k < lat.size; ++k) node_dist[k] = dom.boundary.distance(lat.node(k));

  std::vector<long> label(lat.size, -1);
  long next_label = 0;
  std::vector<long> m(n);
  for (std::size_t seed = 0; seed < lat.size; ++seed) {
    if (label[seed] >= 0 || node_dist[seed] <= wall) continue;
    std::deque<std::size_t> queue{seed};
    label[seed] = next_label;
    while (!queue.empty()) {
      const std::size_t k = queue.front();
      queue.pop_front();
      const std::vector<long> mk = lat.multi(k);
      for (int a = 0; a < n; ++a)
        for (int sgn : {-1, 1}) {
          m = mk;
          m[a] += sgn;
          const long j = lat.flat(m);
          if (j < 0 || label[j] >= 0 || node_dist[j] <= wall) continue;
          label[j] = next_label;
          queue.push_back(static_cast<std::size_t>(j));
        }
    }
    ++next_label;
  }

  // Deepest candidate per component inside the ball.
  std::vector<std::pair<double, long>> best(static_cast<std::size_t>(next_label), {-1.0, -1});
  for (std::size_t k = 0; k < lat.size; ++k) {
    if (label[k] < 0 || node_dist[k] < c * ball.radius) continue;
    if (!ball.contains(lat.node(k))) continue;
    auto& b = best[static_cast<std::size_t>(label[k])];
    if (node_dist[k] > b.first) b = {node_dist[k], static_cast<long>(k)};
  }
  std::sort(best.begin(), best.end(), std::greater<>());
  if (best.size() < 2 || best[1].second < 0) return std::nullopt;
  return std::make_pair(lat.node(static_cast<std::size_t>(best[0].second)),
                        lat.node(static_cast<std::size_t>(best[1].second)));
}

}  // namespace gdl
