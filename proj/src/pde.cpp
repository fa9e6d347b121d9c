#include "gdl/pde.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gdl/error.hpp"
#include "gdl/parallel.hpp"

namespace gdl {

namespace {

constexpr double kClamp = 1e12;

double pow_weight(double base, double expo) {
  if (expo == 0.0) return 1.0;
  if (!(base > 0)) return expo < 0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::pow(base, expo);
}

// Node bookkeeping shared by assembly and the right-hand sides: periodic axes identify the last
// node with the first one.
struct Topology {
  const ScalarGrid* grid;
  std::vector<bool> periodic;
  std::vector<std::size_t> stride;

  Topology(const ScalarGrid& g, const std::vector<int>& periodic_axes) : grid(&g), periodic(g.dim(), false) {
    for (int a : periodic_axes) {
      if (a < 0 || a >= g.dim()) throw Error(Errc::invalid_params, "periodic axis out of range", "periodic_axes");
      periodic[a] = true;
    }
    std::size_t s = 1;
    for (int a = 0; a < g.dim(); ++a) {
      stride.push_back(s);
      s *= static_cast<std::size_t>(g.shape(a));
    }
  }

  int index(std::size_t k, int a) const { return static_cast<int>((k / stride[a]) % grid->shape(a)); }

  std::size_t canonical(std::size_t k) const {
    for (int a = 0; a < grid->dim(); ++a)
      if (periodic[a] && index(k, a) == grid->shape(a) - 1) k -= stride[a] * (grid->shape(a) - 1);
    return k;
  }

  bool duplicate(std::size_t k) const { return canonical(k) != k; }

  // Dual cell width of node k along axis a.
  double dual_width(std::size_t k, int a) const {
    const Axis& ax = grid->axis(a);
    const int i = index(k, a), last = grid->shape(a) - 1;
    double left = i > 0 ? ax[i] - ax[i - 1] : 0.0;
    double right = i < last ? ax[i + 1] - ax[i] : 0.0;
    if (periodic[a] && i == 0) left = ax[last] - ax[last - 1];
    return 0.5 * (left + right);
  }

  bool outer_boundary(std::size_t k) const {
    for (int a = 0; a < grid->dim(); ++a) {
      if (periodic[a]) continue;
      const int i = index(k, a);
      if (i == 0 || i == grid->shape(a) - 1) return true;
    }
    return false;
  }
};

}  // namespace

OperatorSpec OperatorSpec::laplacian() { return OperatorSpec{}; }

OperatorSpec OperatorSpec::degenerate(const DiscreteMeasure& mu, int n, WeightSource source, double alpha) {
  OperatorSpec s;
  s.kind = OperatorCase::degenerate;
  s.weight_exponent = mu.dim_d() + 1.0 - n;
  s.weight_source = source;
  s.potential.measure = mu;
  s.potential.alpha = alpha;
  return s;
}

Eigen::MatrixXd OperatorSpec::coefficient(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (!coeff) return Eigen::MatrixXd::Identity(x.size(), x.size());
  Eigen::MatrixXd a = coeff(x);
  if (a.rows() != x.size() || a.cols() != x.size())
    throw Error(Errc::invalid_params, "coefficient matrix has the wrong size", "coeff");
  return a;
}

double OperatorSpec::weight(const Domain& dom, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (kind == OperatorCase::classical || weight_exponent == 0.0) return 1.0;
  double base = 0;
  if (weight_source == WeightSource::euclid_dist) {
    base = dom.dist_to_boundary(x);
  } else {
    if (potential.measure.distance(x) <= potential.collar_width()) return pow_weight(0.0, weight_exponent);
    base = smooth_distance(potential, x);
  }
  return pow_weight(base, weight_exponent);
}

Eigen::SparseVector<double> LinearSystem::pointwise_row(std::size_t unknown_index) const {
  Eigen::SparseVector<double> row = matrix.row(static_cast<Eigen::Index>(unknown_index));
  Topology topo(layout, boundary.periodic_axes);
  double vol = 1.0;
  for (int a = 0; a < layout.dim(); ++a) vol *= topo.dual_width(node[unknown_index], a);
  return row / vol;
}

LinearSystem assemble(const OperatorSpec& spec, const Domain& dom, const ScalarGrid& layout,
                      const BoundarySetup& boundary) {
  const int n = layout.dim();
  if (dom.ambient() != n) throw Error(Errc::invalid_params, "grid and domain dimensions differ", "grid");
  if (spec.kind == OperatorCase::degenerate && spec.weight_source == WeightSource::smooth_D_alpha)
    spec.potential.validate();
  if (boundary.lift_axis >= n) throw Error(Errc::invalid_params, "lift axis out of range", "lift_axis");
  for (int a : boundary.periodic_axes)
    if (a == boundary.lift_axis) throw Error(Errc::invalid_params, "lift axis cannot be periodic", "lift_axis");

  Topology topo(layout, boundary.periodic_axes);
  const std::size_t N = layout.size();
  LinearSystem sys;
  sys.layout = layout.like();
  sys.boundary = boundary;
  sys.unknown.assign(N, -1);
  sys.dirichlet = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));

  // Node weights and membership.
  std::vector<double> w(N, 1.0);
  std::vector<char> inside(N, 0);
  parallel_for(N, [&](std::size_t k) {
    if (topo.duplicate(k)) return;
    const Point x = layout.node(k);
    inside[k] = !topo.outer_boundary(k) && dom.contains(x);
    if (inside[k]) w[k] = spec.weight(dom, x);
  });
  for (std::size_t k = 0; k < N; ++k) {
    if (topo.duplicate(k) || !inside[k]) continue;
    if (!std::isfinite(w[k]) || w[k] > kClamp) {
      if (dom.dist_to_boundary(layout.node(k)) > 2.0 * dom.collar_width() + layout.min_spacing() &&
          !std::isfinite(w[k]))
        throw Error(Errc::degenerate_weight_overflow, "weight overflows away from the collar", "weight_exponent");
      inside[k] = 0;
      sys.clamped.push_back(k);
    }
  }
  if (boundary.lift_axis >= 0) {
    for (std::size_t k = 0; k < N; ++k)
      if (topo.index(k, boundary.lift_axis) == layout.shape(boundary.lift_axis) - 1) {
        inside[k] = 0;
        sys.dirichlet[static_cast<Eigen::Index>(k)] = boundary.lift_value;
      }
  }
  if (boundary.outer_value) {
    for (std::size_t k = 0; k < N; ++k)
      if (!topo.duplicate(k) && topo.outer_boundary(k) &&
          !(boundary.lift_axis >= 0 && topo.index(k, boundary.lift_axis) == layout.shape(boundary.lift_axis) - 1))
        sys.dirichlet[static_cast<Eigen::Index>(k)] = boundary.outer_value(layout.node(k));
  }
  for (std::size_t k = 0; k < N; ++k) {
    if (topo.duplicate(k) || !inside[k]) continue;
    sys.unknown[k] = static_cast<long>(sys.node.size());
    sys.node.push_back(k);
  }
  for (std::size_t k = 0; k < N; ++k)
    if (topo.duplicate(k)) {
      sys.unknown[k] = sys.unknown[topo.canonical(k)];
      sys.dirichlet[static_cast<Eigen::Index>(k)] = sys.dirichlet[static_cast<Eigen::Index>(topo.canonical(k))];
    }
  if (sys.node.empty()) throw Error(Errc::no_interior_nodes, "no unknowns: the grid misses Omega", "grid");

  // Ellipticity spot check at every unknown with two random direction pairs.
  if (spec.coeff) {
    const double ce = spec.ellipticity;
    std::vector<char> bad(sys.node.size(), 0);
    parallel_for(sys.node.size(), [&](std::size_t u) {
      std::mt19937_64 rng(0x9e3779b97f4a7c15ULL ^ u);
      std::normal_distribution<double> gauss;
      const Point x = layout.node(sys.node[u]);
      const Eigen::MatrixXd a = spec.coefficient(x);
      for (int t = 0; t < 2; ++t) {
        Eigen::VectorXd xi(n), zeta(n);
        for (int i = 0; i < n; ++i) {
          xi[i] = gauss(rng);
          zeta[i] = gauss(rng);
        }
        const double q = xi.dot(a * xi), b = std::abs(zeta.dot(a * xi));
        if (q < xi.squaredNorm() / ce * (1 - 1e-12) || b > ce * xi.norm() * zeta.norm() * (1 + 1e-12)) bad[u] = 1;
      }
    });
    for (std::size_t u = 0; u < bad.size(); ++u)
      if (bad[u])
        throw Error(Errc::ellipticity_violation, "coefficient fails the ellipticity bounds at a grid node",
                    "ellipticity");
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(sys.node.size() * static_cast<std::size_t>(2 * n + 1));
  sys.lift = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.node.size()));
  auto couple = [&](std::size_t row_node, std::size_t col_node, double v) {
    const long r = sys.unknown[row_node];
    if (r < 0) return;
    const long c = sys.unknown[col_node];
    if (c >= 0)
      trip.emplace_back(r, c, v);
    else
      sys.lift[r] -= v * sys.dirichlet[static_cast<Eigen::Index>(col_node)];
  };

  // Two-point fluxes along every edge.
  for (int a = 0; a < n; ++a) {
    std::vector<double> coef(N, 0.0);
    parallel_for(N, [&](std::size_t k) {
      if (topo.index(k, a) == layout.shape(a) - 1) return;
      for (int b = 0; b < n; ++b)
        if (b != a && topo.periodic[b] && topo.index(k, b) == layout.shape(b) - 1) return;
      const std::size_t k2 = k + topo.stride[a];
      const std::size_t c1 = topo.canonical(k), c2 = topo.canonical(k2);
      if (sys.unknown[c1] < 0 && sys.unknown[c2] < 0) return;
      const Point x1 = layout.node(k), x2 = layout.node(k2);
      const Point mid = 0.5 * (x1 + x2);
      double wf = spec.weight(dom, mid);
      if (!std::isfinite(wf) || wf > kClamp) {
        double m = 0;
        for (std::size_t c : {c1, c2})
          if (sys.unknown[c] >= 0) m = std::max(m, w[c]);
        wf = m;
      }
      const double aa = spec.coeff ? spec.coefficient(mid)(a, a) : 1.0;
      double area = 1.0;
      for (int b = 0; b < n; ++b)
        if (b != a) area *= topo.dual_width(k, b);
      coef[k] = area * wf * aa / (x2[a] - x1[a]);
    });
    for (std::size_t k = 0; k < N; ++k) {
      if (coef[k] == 0.0) continue;
      const std::size_t c1 = topo.canonical(k), c2 = topo.canonical(k + topo.stride[a]);
      couple(c1, c1, coef[k]);
      couple(c1, c2, -coef[k]);
      couple(c2, c2, coef[k]);
      couple(c2, c1, -coef[k]);
      const bool u1 = sys.unknown[c1] >= 0, u2 = sys.unknown[c2] >= 0;
      if (u1 != u2) sys.boundary_edges.push_back({u1 ? c2 : c1, u1 ? c1 : c2, coef[k]});
    }
  }

  // Cross-derivative terms from the multilinear element form with the cell-centre coefficient.
  if (spec.coeff && n > 1) {
    const int corners = 1 << n;
    std::vector<std::size_t> cells;
    for (std::size_t k = 0; k < N; ++k) {
      bool ok = true;
      for (int a = 0; a < n && ok; ++a) ok = topo.index(k, a) < layout.shape(a) - 1;
      if (ok) cells.push_back(k);
    }
    std::vector<Eigen::MatrixXd> cell_a(cells.size());
    std::vector<char> active(cells.size(), 0);
    parallel_for(cells.size(), [&](std::size_t c) {
      const std::size_t k = cells[c];
      bool any = false;
      for (int t = 0; t < corners && !any; ++t) {
        std::size_t kk = k;
        for (int a = 0; a < n; ++a)
          if (t & (1 << a)) kk += topo.stride[a];
        any = sys.unknown[topo.canonical(kk)] >= 0;
      }
      if (!any) return;
      Point centre(n);
      for (int a = 0; a < n; ++a) {
        const int i = topo.index(k, a);
        centre[a] = 0.5 * (layout.axis(a)[i] + layout.axis(a)[i + 1]);
      }
      Eigen::MatrixXd m = spec.coefficient(centre);
      m.diagonal().setZero();
      if (m.cwiseAbs().maxCoeff() == 0.0) return;
      double wc = spec.weight(dom, centre);
      if (!std::isfinite(wc) || wc > kClamp) wc = kClamp;
      cell_a[c] = wc * m;
      active[c] = 1;
    });
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!active[c]) continue;
      if ((cell_a[c] - cell_a[c].transpose()).cwiseAbs().maxCoeff() > 1e-14 * cell_a[c].cwiseAbs().maxCoeff())
        sys.symmetric = false;
      const std::size_t k = cells[c];
      std::vector<double> h(n);
      double vol = 1.0;
      for (int a = 0; a < n; ++a) {
        const int i = topo.index(k, a);
        h[a] = layout.axis(a)[i + 1] - layout.axis(a)[i];
        vol *= h[a];
      }
      std::vector<std::size_t> corner_node(corners);
      for (int t = 0; t < corners; ++t) {
        std::size_t kk = k;
        for (int a = 0; a < n; ++a)
          if (t & (1 << a)) kk += topo.stride[a];
        corner_node[t] = topo.canonical(kk);
      }
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          if (a == b || cell_a[c](a, b) == 0.0) continue;
          const double base = cell_a[c](a, b) * vol / (h[a] * h[b]) / 4.0;
          for (int i = 0; i < corners; ++i) {
            if (sys.unknown[corner_node[i]] < 0) continue;
            for (int j = 0; j < corners; ++j) {
              double v = base * ((i >> a) & 1 ? 1.0 : -1.0) * ((j >> b) & 1 ? 1.0 : -1.0);
              for (int q = 0; q < n; ++q)
                if (q != a && q != b) v *= (((i ^ j) >> q) & 1) ? 1.0 / 6.0 : 1.0 / 3.0;
              couple(corner_node[i], corner_node[j], v);
            }
          }
        }
    }
  }

  sys.matrix.resize(static_cast<Eigen::Index>(sys.node.size()), static_cast<Eigen::Index>(sys.node.size()));
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.matrix.makeCompressed();
  return sys;
}

// ---------------------------------------------------------------------------
// Solver

struct SystemSolver::Impl {
  using ColMatrix = Eigen::SparseMatrix<double>;
  ColMatrix a;
  SolverOptions opts;
  bool symmetric = true;
  std::unique_ptr<Eigen::ConjugateGradient<ColMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>>> cg;
  std::unique_ptr<Eigen::BiCGSTAB<ColMatrix, Eigen::IncompleteLUT<double>>> bicg;
  std::unique_ptr<Eigen::SparseLU<ColMatrix>> lu;
  std::unique_ptr<Eigen::SimplicialLDLT<ColMatrix>> ldlt;
  bool iterative_ok = true;

  bool direct_allowed() const { return static_cast<std::size_t>(a.rows()) <= opts.direct_limit; }

  void factor_direct() {
    if (lu) return;
    lu = std::make_unique<Eigen::SparseLU<ColMatrix>>();
    lu->compute(a);
    if (lu->info() != Eigen::Success) throw Error(Errc::solver_divergence, "sparse LU factorization failed");
  }

  void prepare_iterative() {
    if (symmetric) {
      cg = std::make_unique<std::remove_reference_t<decltype(*cg)>>();
      cg->setTolerance(opts.tolerance);
      if (opts.max_iterations > 0) cg->setMaxIterations(opts.max_iterations);
      cg->compute(a);
      iterative_ok = cg->info() == Eigen::Success;
    } else {
      bicg = std::make_unique<std::remove_reference_t<decltype(*bicg)>>();
      bicg->setTolerance(opts.tolerance);
      if (opts.max_iterations > 0) bicg->setMaxIterations(opts.max_iterations);
      bicg->compute(a);
      iterative_ok = bicg->info() == Eigen::Success;
    }
  }
};

SystemSolver::SystemSolver(const LinearSystem& sys, const SolverOptions& opts) : impl_(std::make_unique<Impl>()) {
  impl_->a = sys.matrix;
  impl_->opts = opts;
  impl_->symmetric = sys.symmetric;
  const int n = sys.layout.dim();
  const std::size_t chol = n <= 2 ? opts.cholesky_limit_2d : n == 3 ? opts.cholesky_limit_3d : opts.cholesky_limit_high;
  if (opts.prefer_direct && impl_->direct_allowed()) {
    impl_->factor_direct();
  } else if (sys.symmetric && sys.unknowns() <= chol) {
    impl_->ldlt = std::make_unique<Eigen::SimplicialLDLT<Impl::ColMatrix>>();
    impl_->ldlt->compute(impl_->a);
    if (impl_->ldlt->info() != Eigen::Success) {
      impl_->ldlt.reset();
      impl_->prepare_iterative();
    }
  } else {
    impl_->prepare_iterative();
  }
}

SystemSolver::~SystemSolver() = default;

Eigen::VectorXd SystemSolver::solve(const Eigen::VectorXd& rhs, SolveReport* report) {
  Impl& m = *impl_;
  const double bnorm = rhs.norm();
  SolveReport rep;
  Eigen::VectorXd x;
  if (bnorm == 0.0) {
    rep.method = "trivial";
    if (report) *report = rep;
    return Eigen::VectorXd::Zero(rhs.size());
  }
  auto residual = [&](const Eigen::VectorXd& v) { return (m.a * v - rhs).norm() / bnorm; };
  if (m.ldlt) {
    x = m.ldlt->solve(rhs);
    rep.method = "cholesky";
    rep.relative_residual = residual(x);
    if (x.allFinite() && rep.relative_residual <= 10.0 * m.opts.tolerance) {
      if (report) *report = rep;
      return x;
    }
    m.ldlt.reset();
    m.prepare_iterative();
  }
  if (!m.lu && m.iterative_ok) {
    if (m.cg) {
      x = m.cg->solve(rhs);
      rep.method = "cg-ichol";
      rep.iterations = static_cast<int>(m.cg->iterations());
    } else {
      x = m.bicg->solve(rhs);
      rep.method = "bicgstab-ilut";
      rep.iterations = static_cast<int>(m.bicg->iterations());
    }
    rep.relative_residual = residual(x);
    if (x.allFinite() && rep.relative_residual <= 10.0 * m.opts.tolerance) {
      if (report) *report = rep;
      return x;
    }
  }
  if (!m.direct_allowed())
    throw Error(Errc::solver_divergence, "iterative solve missed the residual target and the system is too large "
                                         "for the direct fallback");
  m.factor_direct();
  x = m.lu->solve(rhs);
  rep.method = "sparse-lu";
  rep.iterations = 0;
  rep.relative_residual = residual(x);
  if (!x.allFinite() || rep.relative_residual > 1e-8)
    throw Error(Errc::solver_divergence, "direct solve residual too large");
  if (report) *report = rep;
  return x;
}

// ---------------------------------------------------------------------------
// Fields

Eigen::VectorXd point_source(const LinearSystem& sys, const Point& y, double mass) {
  const ScalarGrid& g = sys.layout;
  const int n = g.dim();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.unknowns()));
  std::vector<int> base(n);
  std::vector<double> t(n);
  for (int a = 0; a < n; ++a) {
    const Axis& ax = g.axis(a);
    if (y[a] < ax.front() || y[a] > ax.back()) throw Error(Errc::invalid_params, "source outside the grid", "pole");
    auto it = std::upper_bound(ax.begin(), ax.end(), y[a]);
    int i = static_cast<int>(it - ax.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(ax.size()) - 2);
    base[a] = i;
    t[a] = (y[a] - ax[i]) / (ax[i + 1] - ax[i]);
  }
  for (int c = 0; c < (1 << n); ++c) {
    double w = 1.0;
    std::vector<int> idx(base);
    for (int a = 0; a < n; ++a) {
      const bool up = c & (1 << a);
      w *= up ? t[a] : 1.0 - t[a];
      idx[a] += up ? 1 : 0;
    }
    if (w == 0.0) continue;
    const long u = sys.unknown[static_cast<std::size_t>(g.ravel(idx))];
    if (u >= 0) rhs[u] += mass * w;
  }
  return rhs;
}

ScalarGrid to_grid(const LinearSystem& sys, const Eigen::VectorXd& u) {
  ScalarGrid out = sys.layout.like();
  for (std::size_t k = 0; k < out.size(); ++k) {
    const long j = sys.unknown[k];
    out[k] = j >= 0 ? u[j] : sys.dirichlet[static_cast<Eigen::Index>(k)];
  }
  return out;
}

Eigen::VectorXd boundary_flux(const LinearSystem& sys, const ScalarGrid& u) {
  Eigen::VectorXd flux = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(u.size()));
  for (const auto& e : sys.boundary_edges)
    flux[static_cast<Eigen::Index>(e.dirichlet_node)] += e.coefficient * (u[e.interior_node] - u[e.dirichlet_node]);
  return flux;
}

double GreenField::at(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  auto v = values.interpolate(x);
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

namespace {

void check_pole(const Domain& dom, const Point& y) {
  if (!dom.contains(y) || dom.dist_to_boundary(y) <= dom.collar_width())
    throw Error(Errc::pole_in_collar, "pole must lie in Omega outside the collar", "pole");
}

void check_normalization_point(const Domain& dom, const Point& a0) {
  if (!dom.contains(a0)) throw Error(Errc::invalid_params, "normalization point must lie in Omega", "A0");
}

GreenField normalized(ScalarGrid values, const Point& a0) {
  GreenField f;
  f.values = std::move(values);
  f.normalization_point = a0;
  f.raw_value = f.at(a0);
  if (!(f.raw_value > 0) || !std::isfinite(f.raw_value))
    throw Error(Errc::non_convergence, "field vanishes at the normalization point", "A0");
  f.values.values() /= f.raw_value;
  return f;
}

}  // namespace

GreenField green_finite_pole(const LinearSystem& sys, SystemSolver& solver, const Domain& dom, const Point& y,
                             const Point& a0) {
  check_pole(dom, y);
  check_normalization_point(dom, a0);
  SolveReport rep;
  const Eigen::VectorXd u = solver.solve(point_source(sys, y), &rep);
  GreenField f = normalized(to_grid(sys, u), a0);
  f.pole = y;
  f.solve = rep;
  return f;
}

GreenField green_finite_pole(const OperatorSpec& spec, const Domain& dom, const ScalarGrid& layout, const Point& y,
                             const Point& a0, const SolverOptions& opts) {
  check_pole(dom, y);
  const LinearSystem sys = assemble(spec, dom, layout);
  SystemSolver solver(sys, opts);
  return green_finite_pole(sys, solver, dom, y, a0);
}

FarPoleReport green_far_pole_sequence(const OperatorSpec& spec, const Domain& dom, const ScalarGrid& layout,
                                      const Ball& window, const Point& a0, const FarPoleOptions& opts) {
  if (opts.distances.size() < 2) throw Error(Errc::invalid_params, "need at least two pole distances", "distances");
  for (std::size_t i = 1; i < opts.distances.size(); ++i)
    if (!(opts.distances[i] > opts.distances[i - 1]))
      throw Error(Errc::invalid_params, "pole distances must increase", "distances");
  if (opts.direction.size() != layout.dim() || !(opts.direction.norm() > 0))
    throw Error(Errc::invalid_params, "pole direction must be a nonzero vector", "direction");
  const Point dir = opts.direction.normalized();
  const Box box = layout.box();
  for (double s : opts.distances)
    if (!box.contains(window.center + s * window.radius * dir))
      throw Error(Errc::invalid_params, "far pole lies outside the solve box", "distances");

  const LinearSystem sys = assemble(spec, dom, layout);
  SystemSolver solver(sys, opts.solver);
  FarPoleReport rep;
  for (double s : opts.distances) {
    const Point y = layout.node(layout.nearest_node(window.center + s * window.radius * dir));
    rep.distances.push_back((y - window.center).norm() / window.radius);
    rep.fields.push_back(green_finite_pole(sys, solver, dom, y, a0));
    rep.lambda.push_back(rep.fields.back().raw_value);
  }
  for (std::size_t i = 1; i < rep.distances.size(); ++i)
    if (!(rep.distances[i] > rep.distances[i - 1]))
      throw Error(Errc::invalid_params, "pole distances collapse onto the same grid node", "distances");

  std::vector<std::size_t> win;
  for (std::size_t k = 0; k < layout.size(); ++k)
    if (sys.unknown[k] >= 0 && window.contains(layout.node(k))) win.push_back(k);
  if (win.empty()) throw Error(Errc::no_interior_nodes, "analysis window has no interior nodes", "window");
  for (std::size_t i = 0; i + 1 < rep.fields.size(); ++i) {
    double sup = 0;
    for (std::size_t k : win) sup = std::max(sup, std::abs(rep.fields[i].values[k] - rep.fields[i + 1].values[k]));
    rep.pairwise_sup.push_back(sup);
  }

  const std::size_t m = opts.distances.size();
  rep.weights.assign(m, 1.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) {
        const double xi = 1.0 / rep.distances[i], xj = 1.0 / rep.distances[j];
        rep.weights[i] *= xj / (xj - xi);
      }
  ScalarGrid lim = layout.like();
  for (std::size_t i = 0; i < m; ++i) lim.values() += rep.weights[i] * rep.fields[i].values.values();
  rep.limit = normalized(std::move(lim), a0);
  rep.limit.solve = rep.fields.back().solve;

  for (std::size_t i = 1; i < rep.pairwise_sup.size(); ++i)
    if (!(rep.pairwise_sup[i] < rep.pairwise_sup[i - 1]))
      throw Error(Errc::non_convergence,
                  "far-pole differences do not decrease on the window; the truncation box is too small", "distances");
  return rep;
}

GreenField green_periodic_strip(const OperatorSpec& spec, const Domain& dom, const ScalarGrid& layout, const Point& a0,
                                int vertical, const SolverOptions& opts) {
  check_normalization_point(dom, a0);
  BoundarySetup bc;
  for (int a = 0; a < layout.dim(); ++a)
    if (a != vertical) bc.periodic_axes.push_back(a);
  bc.lift_axis = vertical;
  bc.lift_value = 1.0;
  const LinearSystem sys = assemble(spec, dom, layout, bc);
  SystemSolver solver(sys, opts);
  SolveReport rep;
  const Eigen::VectorXd u = solver.solve(sys.lift, &rep);
  GreenField f = normalized(to_grid(sys, u), a0);
  f.solve = rep;
  f.flux = boundary_flux(sys, f.values);
  return f;
}

GreenField solve_dirichlet(const OperatorSpec& spec, const Domain& dom, const ScalarGrid& layout,
                           const BoundarySetup& boundary, const Point& a0, const SolverOptions& opts) {
  check_normalization_point(dom, a0);
  const LinearSystem sys = assemble(spec, dom, layout, boundary);
  SystemSolver solver(sys, opts);
  SolveReport rep;
  const Eigen::VectorXd u = solver.solve(sys.lift, &rep);
  GreenField f = normalized(to_grid(sys, u), a0);
  f.solve = rep;
  f.flux = boundary_flux(sys, f.values);
  return f;
}

ProxyValue harmonic_measure_proxy(const GreenField& g, const Domain& dom, const Ball& ball, double c_corkscrew) {
  if (g.pole && (*g.pole - ball.center).norm() < 2.0 * ball.radius)
    throw Error(Errc::pole_too_close, "pole lies inside twice the ball", "ball");
  auto a = corkscrew_point(dom, ball, c_corkscrew);
  if (!a) throw Error(Errc::no_corkscrew, "no corkscrew point in the ball", "ball");
  ProxyValue p;
  p.corkscrew = *a;
  p.value = std::pow(ball.radius, dom.ambient() - 2.0) * g.at(*a);
  if (!std::isfinite(p.value)) throw Error(Errc::no_corkscrew, "corkscrew point lies outside the solved grid", "ball");
  return p;
}

HolderEnvelope holder_envelope(const GreenField& g, const Domain& dom, const Ball& window) {
  std::vector<double> lx, ly;
  const ScalarGrid& v = g.values;
  const double collar = dom.collar_width();
  for (std::size_t k : v.nodes_in_box(Box::around(window))) {
    const Point x = v.node(k);
    if (!window.contains(x) || !dom.contains(x) || !(v[k] > 0)) continue;
    const double d = dom.dist_to_boundary(x);
    if (d <= collar) continue;
    lx.push_back(std::log(d / window.radius));
    ly.push_back(std::log(v[k]));
  }
  HolderEnvelope env;
  env.radius = window.radius;
  env.nodes = lx.size();
  if (lx.size() < 3) throw Error(Errc::insufficient_dynamic_range, "too few window nodes for a Hoelder fit", "window");
  const auto [mn, mx] = std::minmax_element(lx.begin(), lx.end());
  env.decades = (*mx - *mn) / std::log(10.0);
  if (env.decades < 2.0)
    throw Error(Errc::insufficient_dynamic_range, "fewer than two decades of dist(X, E) in the window", "window");
  const double m = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  env.gamma = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double b = (sy - env.gamma * sx) / m;
  std::vector<double> res(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) res[i] = ly[i] - b - env.gamma * lx[i];
  std::vector<double> sorted = res;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * (sorted.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double f = pos - i;
    return i + 1 < sorted.size() ? sorted[i] * (1 - f) + sorted[i + 1] * f : sorted[i];
  };
  const double qlo = quantile(0.025), qhi = quantile(0.975);
  env.c_lower = std::exp(b + qlo);
  env.c_upper = std::exp(b + qhi);
  std::size_t in = 0;
  for (double r : res)
    if (r >= qlo - 1e-12 && r <= qhi + 1e-12) ++in;
  env.fraction_inside = static_cast<double>(in) / m;
  return env;
}

ExtractionVerdict theorem61_extract(const GreenField& g, const Domain& dom, const Ball& pair, double eps,
                                    const AffinePlane& plane, double c, const HolderEnvelope& env,
                                    const ExtractionOptions& opts) {
  if (!(eps > 0)) throw Error(Errc::invalid_params, "eps must be positive", "eps");
  if (!(c > 0)) throw Error(Errc::invalid_params, "c must be positive", "c");
  if (!(env.c_lower > 0) || !(env.gamma > 0)) throw Error(Errc::invalid_params, "invalid Hoelder envelope", "gamma");
  const double r = pair.radius;
  const int n = dom.ambient();
  const ScalarGrid& v = g.values;
  const double collar = dom.collar_width();
  ExtractionVerdict out;

  // (i) E close to P.
  for (std::size_t i : dom.boundary.indices_in_ball(pair.scaled(10.0)))
    out.e_to_plane = std::max(out.e_to_plane, plane.distance(dom.boundary.point(i)) / r);
  out.step_e_near_plane = out.e_to_plane <= eps;

  // dist(X, E) <= certified(X) for X in Omega, from u = c G >= c c_lower (dist / r_env)^gamma.
  auto certified = [&](double gval) {
    return env.radius * std::pow(std::max(gval, 0.0) / env.c_lower, 1.0 / env.gamma);
  };

  const double h = opts.spacing > 0 ? opts.spacing : v.min_spacing();
  const double reach = 3.0 * eps * r + h;

  // (ii) corkscrew off P.
  double best = -1;
  std::vector<std::size_t> slab, near_plane;
  for (std::size_t k : v.nodes_in_box(Box::around(pair.scaled(2.0)))) {
    const Point x = v.node(k);
    const double dc = (x - pair.center).norm();
    if (dc >= 2.0 * r || !dom.contains(x)) continue;
    const double de = dom.dist_to_boundary(x);
    if (de <= collar) continue;
    const double dp = plane.distance(x);
    if (dc < r && de >= r / 4.0 && dp > best) {
      best = dp;
      out.a1 = x;
      out.u_a1 = c * v[k] / r;
    }
    if (dp <= 2.0 * eps * r) slab.push_back(k);
    if (dp <= reach && dc < r + reach) near_plane.push_back(k);
  }
  if (best < 0) throw Error(Errc::no_offset_corkscrew, "no grid point of Omega cap B(x, r) at distance r/4 from E");
  out.step_corkscrew = out.u_a1 >= 1.0 / 12.0;

  // (iii) u small on the slab, hence E close to every slab point.
  for (std::size_t k : slab) {
    out.slab_u_max = std::max(out.slab_u_max, c * v[k] / r);
    out.slab_dist_bound = std::max(out.slab_dist_bound, certified(v[k]) / r);
  }
  out.step_slab = out.slab_u_max <= 3.0 * eps;

  // (iv) every point of P cap B(x, r) close to E.
  out.codim_shortcut = dom.boundary.dim_d() < n - 1.0;
  const Eigen::MatrixXd lat = plane_lattice(plane, pair, h);
  double sup = 0;
  for (Eigen::Index j = 0; j < lat.cols(); ++j) {
    const Point x = lat.col(j);
    const double de = dom.dist_to_boundary(x);
    double bound;
    if (de <= collar) {
      bound = de;
    } else if (dom.contains(x)) {
      const double gx = g.at(x);
      bound = std::isfinite(gx) ? certified(gx) : std::numeric_limits<double>::infinity();
    } else {
      // Other side of E: go through the nearest certified points of Omega.
      bound = std::numeric_limits<double>::infinity();
      for (std::size_t k : near_plane) {
        const double dxy = (x - v.node(k)).norm();
        if (dxy <= reach) bound = std::min(bound, dxy + certified(v[k]));
      }
    }
    sup = std::max(sup, bound);
  }
  out.plane_to_e = sup / r;
  const double tau_plane = 2.0 * out.plane_to_e;
  out.tau = std::max(eps, tau_plane);
  const double target = opts.tau_target > 0 ? opts.tau_target : 2.0 * eps;
  out.pass = out.step_e_near_plane && out.step_corkscrew && out.step_slab && tau_plane <= target;
  return out;
}

}  // namespace gdl
