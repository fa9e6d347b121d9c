#include "gdl/grid.hpp"

#include <algorithm>
#include <cmath>

#include "gdl/error.hpp"

namespace gdl {

Axis uniform_axis(double lo, double hi, int cells) {
  if (cells < 1 || !(hi > lo)) throw Error(Errc::invalid_params, "uniform axis needs hi > lo and cells >= 1", "shape");
  Axis ax(static_cast<std::size_t>(cells) + 1);
  for (int i = 0; i <= cells; ++i) ax[i] = lo + (hi - lo) * i / cells;
  ax.back() = hi;
  return ax;
}

Axis graded_axis(double lo, double hi, double fine_lo, double fine_hi, double h, double grading) {
  if (!(h > 0) || !(hi > lo) || grading < 1.0)
    throw Error(Errc::invalid_params, "graded axis needs h > 0, hi > lo, grading >= 1", "grading");
  fine_lo = std::max(fine_lo, lo);
  fine_hi = std::min(fine_hi, hi);
  const int cells = std::max(1, static_cast<int>(std::lround((fine_hi - fine_lo) / h)));
  Axis core = uniform_axis(fine_lo, fine_lo + cells * h, cells);
  fine_hi = core.back();
  auto grow = [&](double start, double limit, double dir) {
    Axis out;
    double x = start, w = h;
    while (dir * (limit - x) > 1e-12 * (hi - lo)) {
      w *= grading;
      double next = x + dir * w;
      // Merge a sliver into the last cell.
      if (dir * (limit - next) < 0.5 * w) next = limit;
      out.push_back(next);
      x = next;
    }
    return out;
  };
  Axis left = grow(fine_lo, lo, -1.0);
  Axis right = grow(fine_hi, hi, 1.0);
  Axis ax(left.rbegin(), left.rend());
  ax.insert(ax.end(), core.begin(), core.end());
  ax.insert(ax.end(), right.begin(), right.end());
  return ax;
}

Axis stretched_axis(double lo, double hi, double center, double h, double kappa, int refine) {
  if (!(h > 0) || !(hi > lo) || !(kappa > 0) || refine < 1)
    throw Error(Errc::invalid_params, "stretched axis needs h, kappa > 0, hi > lo, refine >= 1", "kappa");
  const double t_lo = std::asinh(kappa * (lo - center)) / kappa;
  const double t_hi = std::asinh(kappa * (hi - center)) / kappa;
  const int cells = std::max(1, static_cast<int>(std::lround((t_hi - t_lo) / h))) * refine;
  Axis ax(static_cast<std::size_t>(cells) + 1);
  for (int i = 0; i <= cells; ++i) ax[i] = center + std::sinh(kappa * (t_lo + (t_hi - t_lo) * i / cells)) / kappa;
  ax.front() = lo;
  ax.back() = hi;
  return ax;
}

Axis subdivide_axis(const Axis& axis, int factor) {
  if (factor < 1) throw Error(Errc::invalid_params, "subdivision factor must be >= 1", "factor");
  Axis out;
  out.reserve((axis.size() - 1) * static_cast<std::size_t>(factor) + 1);
  for (std::size_t i = 0; i + 1 < axis.size(); ++i)
    for (int j = 0; j < factor; ++j) out.push_back(axis[i] + (axis[i + 1] - axis[i]) * j / factor);
  out.push_back(axis.back());
  return out;
}

ScalarGrid::ScalarGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw Error(Errc::invalid_params, "grid needs at least one axis", "shape");
  std::size_t total = 1;
  strides_.resize(axes_.size());
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const Axis& ax = axes_[a];
    if (ax.size() < 2) throw Error(Errc::invalid_params, "grid shape must be >= 2 per axis", "shape");
    for (std::size_t i = 1; i < ax.size(); ++i)
      if (!(ax[i] > ax[i - 1])) throw Error(Errc::invalid_params, "grid axis must be strictly increasing", "axes");
    strides_[a] = total;
    total *= ax.size();
  }
  values_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
}

ScalarGrid ScalarGrid::uniform(const Box& box, const std::vector<int>& shape) {
  if (static_cast<int>(shape.size()) != box.dim())
    throw Error(Errc::invalid_params, "shape and box dimension differ", "shape");
  std::vector<Axis> axes;
  for (int a = 0; a < box.dim(); ++a) {
    if (shape[a] < 2) throw Error(Errc::invalid_params, "grid shape must be >= 2 per axis", "shape");
    axes.push_back(uniform_axis(box.lo[a], box.hi[a], shape[a] - 1));
  }
  return ScalarGrid(std::move(axes));
}

ScalarGrid ScalarGrid::like() const {
  ScalarGrid g = *this;
  g.values_.setZero();
  return g;
}

std::vector<int> ScalarGrid::shape() const {
  std::vector<int> s;
  for (const auto& ax : axes_) s.push_back(static_cast<int>(ax.size()));
  return s;
}

Box ScalarGrid::box() const {
  Box b{Point(dim()), Point(dim())};
  for (int a = 0; a < dim(); ++a) {
    b.lo[a] = axes_[a].front();
    b.hi[a] = axes_[a].back();
  }
  return b;
}

double ScalarGrid::spacing(int a) const {
  double s = std::numeric_limits<double>::infinity();
  const Axis& ax = axes_[a];
  for (std::size_t i = 1; i < ax.size(); ++i) s = std::min(s, ax[i] - ax[i - 1]);
  return s;
}

double ScalarGrid::min_spacing() const {
  double s = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim(); ++a) s = std::min(s, spacing(a));
  return s;
}

bool ScalarGrid::is_uniform(double rel_tol) const {
  for (const auto& ax : axes_) {
    const double h = (ax.back() - ax.front()) / static_cast<double>(ax.size() - 1);
    for (std::size_t i = 1; i < ax.size(); ++i)
      if (std::abs(ax[i] - ax[i - 1] - h) > rel_tol * h) return false;
  }
  return true;
}

std::vector<int> ScalarGrid::unravel(std::size_t k) const {
  std::vector<int> idx(axes_.size());
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    idx[a] = static_cast<int>(k % axes_[a].size());
    k /= axes_[a].size();
  }
  return idx;
}

long ScalarGrid::ravel(const std::vector<int>& idx) const {
  long k = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    if (idx[a] < 0 || idx[a] >= static_cast<int>(axes_[a].size())) return -1;
    k += static_cast<long>(idx[a]) * static_cast<long>(strides_[a]);
  }
  return k;
}

double ScalarGrid::coord(std::size_t k, int a) const {
  return axes_[a][(k / strides_[a]) % axes_[a].size()];
}

Point ScalarGrid::node(std::size_t k) const {
  Point p(dim());
  for (int a = 0; a < dim(); ++a) p[a] = coord(k, a);
  return p;
}

long ScalarGrid::neighbor(std::size_t k, int a, int sign) const {
  const std::size_t i = (k / strides_[a]) % axes_[a].size();
  if (sign < 0 && i == 0) return -1;
  if (sign > 0 && i + 1 == axes_[a].size()) return -1;
  return sign > 0 ? static_cast<long>(k + strides_[a]) : static_cast<long>(k - strides_[a]);
}

bool ScalarGrid::on_boundary(std::size_t k) const {
  for (int a = 0; a < dim(); ++a) {
    const std::size_t i = (k / strides_[a]) % axes_[a].size();
    if (i == 0 || i + 1 == axes_[a].size()) return true;
  }
  return false;
}

double ScalarGrid::cell_volume(std::size_t k) const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) {
    const Axis& ax = axes_[a];
    const std::size_t i = (k / strides_[a]) % ax.size();
    const double left = i > 0 ? ax[i] - ax[i - 1] : 0.0;
    const double right = i + 1 < ax.size() ? ax[i + 1] - ax[i] : 0.0;
    v *= 0.5 * (left + right);
  }
  return v;
}

namespace {

// Index i with ax[i] <= x <= ax[i+1] (clamped).
std::size_t bracket(const Axis& ax, double x) {
  auto it = std::upper_bound(ax.begin(), ax.end(), x);
  std::size_t i = it == ax.begin() ? 0 : static_cast<std::size_t>(it - ax.begin()) - 1;
  return std::min(i, ax.size() - 2);
}

}  // namespace

std::size_t ScalarGrid::nearest_node(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  std::size_t k = 0;
  for (int a = 0; a < dim(); ++a) {
    const Axis& ax = axes_[a];
    std::size_t i = bracket(ax, x[a]);
    if (std::abs(x[a] - ax[i + 1]) < std::abs(x[a] - ax[i])) ++i;
    k += i * strides_[a];
  }
  return k;
}

std::optional<double> ScalarGrid::interpolate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const int n = dim();
  std::vector<std::size_t> base(n);
  std::vector<double> t(n);
  for (int a = 0; a < n; ++a) {
    const Axis& ax = axes_[a];
    if (x[a] < ax.front() || x[a] > ax.back()) return std::nullopt;
    base[a] = bracket(ax, x[a]);
    t[a] = (x[a] - ax[base[a]]) / (ax[base[a] + 1] - ax[base[a]]);
  }
  double sum = 0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    double w = 1.0;
    std::size_t k = 0;
    for (int a = 0; a < n; ++a) {
      const bool up = corner & (1 << a);
      w *= up ? t[a] : 1.0 - t[a];
      k += (base[a] + (up ? 1 : 0)) * strides_[a];
    }
    if (w != 0.0) sum += w * values_[static_cast<Eigen::Index>(k)];
  }
  return sum;
}

Eigen::VectorXd ScalarGrid::gradient(std::size_t k) const {
  Eigen::VectorXd g(dim());
  for (int a = 0; a < dim(); ++a) {
    const long lo = neighbor(k, a, -1), hi = neighbor(k, a, +1);
    const double x0 = coord(k, a), f0 = values_[static_cast<Eigen::Index>(k)];
    if (lo >= 0 && hi >= 0) {
      const double hm = x0 - coord(static_cast<std::size_t>(lo), a);
      const double hp = coord(static_cast<std::size_t>(hi), a) - x0;
      const double fm = values_[lo], fp = values_[hi];
      g[a] = (hm * hm * (fp - f0) + hp * hp * (f0 - fm)) / (hm * hp * (hm + hp));
    } else if (hi >= 0) {
      g[a] = (values_[hi] - f0) / (coord(static_cast<std::size_t>(hi), a) - x0);
    } else {
      g[a] = (f0 - values_[lo]) / (x0 - coord(static_cast<std::size_t>(lo), a));
    }
  }
  return g;
}

std::vector<std::size_t> ScalarGrid::nodes_in_box(const Box& box, int stride) const {
  const int n = dim();
  std::vector<int> lo(n), hi(n);
  for (int a = 0; a < n; ++a) {
    const Axis& ax = axes_[a];
    lo[a] = static_cast<int>(std::lower_bound(ax.begin(), ax.end(), box.lo[a]) - ax.begin());
    hi[a] = static_cast<int>(std::upper_bound(ax.begin(), ax.end(), box.hi[a]) - ax.begin()) - 1;
    if (hi[a] < lo[a]) return {};
  }
  std::vector<std::size_t> out;
  std::vector<int> idx = lo;
  for (;;) {
    out.push_back(static_cast<std::size_t>(ravel(idx)));
    int a = 0;
    for (; a < n; ++a) {
      idx[a] += stride;
      if (idx[a] <= hi[a]) break;
      idx[a] = lo[a];
    }
    if (a == n) break;
  }
  return out;
}

}  // namespace gdl
