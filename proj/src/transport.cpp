#include "gdl/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gdl/error.hpp"
#include "gdl/kdtree.hpp"

namespace gdl {

namespace {

// Primal network simplex for an uncapacitated min-cost flow. An artificial root carries the initial
// basis; the leaving arc follows the strongly feasible rule, so degenerate pivots cannot cycle.
// Arcs may be appended between solves and the current basis stays feasible (warm start).
class NetworkSimplex {
 public:
  NetworkSimplex(const std::vector<double>& supply, double big_cost) : V_(static_cast<int>(supply.size())) {
    const int root = V_;
    const std::size_t N = static_cast<std::size_t>(V_) + 1;
    parent_.assign(N, -1);
    pred_.assign(N, -1);
    up_.assign(N, 0);
    pi_.assign(N, 0.0);
    depth_.assign(N, 0);
    first_child_.assign(N, -1);
    next_.assign(N, -1);
    prev_.assign(N, -1);
    for (int i = 0; i < V_; ++i) {
      const double b = supply[static_cast<std::size_t>(i)];
      const bool out = b >= 0;
      const int e = out ? add_arc(i, root, big_cost) : add_arc(root, i, big_cost);
      flow_[static_cast<std::size_t>(e)] = std::abs(b);
      tree_[static_cast<std::size_t>(e)] = 1;
      pred_[static_cast<std::size_t>(i)] = e;
      up_[static_cast<std::size_t>(i)] = out;
      pi_[static_cast<std::size_t>(i)] = out ? -big_cost : big_cost;
      depth_[static_cast<std::size_t>(i)] = 1;
      parent_[static_cast<std::size_t>(i)] = root;
      attach(i, root);
    }
    artificial_ = V_;
  }

  int add_arc(int s, int t, double c) {
    src_.push_back(s);
    tgt_.push_back(t);
    cost_.push_back(c);
    flow_.push_back(0.0);
    tree_.push_back(0);
    return static_cast<int>(src_.size()) - 1;
  }

  // Pivots until no arc has negative reduced cost beyond `eps`; returns the pivot count.
  int run(double eps) {
    int pivots = 0;
    const long limit = 200L * static_cast<long>(src_.size()) + 100000L;
    for (;;) {
      const int e = entering(eps);
      if (e < 0) return pivots;
      pivot(e);
      if (++pivots > limit) throw Error(Errc::lp_infeasible, "network simplex exceeded its pivot budget", "mass");
    }
  }

  double real_cost() const {
    double c = 0;
    for (std::size_t e = static_cast<std::size_t>(artificial_); e < src_.size(); ++e) c += cost_[e] * flow_[e];
    return c;
  }
  double artificial_flow() const {
    double f = 0;
    for (int e = 0; e < artificial_; ++e) f += flow_[static_cast<std::size_t>(e)];
    return f;
  }
  double potential(int v) const { return pi_[static_cast<std::size_t>(v)]; }

 private:
  double reduced(std::size_t e) const {
    return cost_[e] + pi_[static_cast<std::size_t>(src_[e])] - pi_[static_cast<std::size_t>(tgt_[e])];
  }

  // Block pricing: the most negative reduced cost within the first block that has one.
  int entering(double eps) {
    const std::size_t A = src_.size();
    const std::size_t block = std::max<std::size_t>(32, static_cast<std::size_t>(std::sqrt(static_cast<double>(A))));
    int best = -1;
    double best_rc = -eps;
    std::size_t scanned = 0;
    while (scanned < A) {
      const std::size_t stop = std::min(A, scanned + block);
      for (; scanned < stop; ++scanned) {
        const std::size_t e = next_arc_;
        next_arc_ = next_arc_ + 1 == A ? 0 : next_arc_ + 1;
        if (tree_[e]) continue;
        const double rc = reduced(e);
        if (rc < best_rc) {
          best_rc = rc;
          best = static_cast<int>(e);
        }
      }
      if (best >= 0) break;
    }
    return best;
  }

  void attach(int v, int p) {
    const std::size_t sv = static_cast<std::size_t>(v), sp = static_cast<std::size_t>(p);
    prev_[sv] = -1;
    next_[sv] = first_child_[sp];
    if (first_child_[sp] >= 0) prev_[static_cast<std::size_t>(first_child_[sp])] = v;
    first_child_[sp] = v;
  }
  void detach(int v, int p) {
    const std::size_t sv = static_cast<std::size_t>(v);
    if (prev_[sv] >= 0)
      next_[static_cast<std::size_t>(prev_[sv])] = next_[sv];
    else
      first_child_[static_cast<std::size_t>(p)] = next_[sv];
    if (next_[sv] >= 0) prev_[static_cast<std::size_t>(next_[sv])] = prev_[sv];
    prev_[sv] = next_[sv] = -1;
  }

  void pivot(int e) {
    const std::size_t se = static_cast<std::size_t>(e);
    const int first = src_[se], second = tgt_[se];
    int a = first, b = second;
    while (a != b) {
      if (depth_[static_cast<std::size_t>(a)] >= depth_[static_cast<std::size_t>(b)])
        a = parent_[static_cast<std::size_t>(a)];
      else
        b = parent_[static_cast<std::size_t>(b)];
    }
    const int join = a;
    const double inf = std::numeric_limits<double>::infinity();
    double delta = inf;
    int u_out = -1, side = 0;
    for (int u = first; u != join; u = parent_[static_cast<std::size_t>(u)]) {
      const double d = up_[static_cast<std::size_t>(u)] ? flow_[static_cast<std::size_t>(pred_[static_cast<std::size_t>(u)])] : inf;
      if (d < delta) {
        delta = d;
        u_out = u;
        side = 1;
      }
    }
    for (int u = second; u != join; u = parent_[static_cast<std::size_t>(u)]) {
      const double d = up_[static_cast<std::size_t>(u)] ? inf : flow_[static_cast<std::size_t>(pred_[static_cast<std::size_t>(u)])];
      if (d <= delta) {
        delta = d;
        u_out = u;
        side = 2;
      }
    }
    if (side == 0) throw Error(Errc::lp_infeasible, "unbounded transshipment cycle", "mass");

    flow_[se] += delta;
    for (int u = first; u != join; u = parent_[static_cast<std::size_t>(u)])
      flow_[static_cast<std::size_t>(pred_[static_cast<std::size_t>(u)])] += up_[static_cast<std::size_t>(u)] ? -delta : delta;
    for (int u = second; u != join; u = parent_[static_cast<std::size_t>(u)])
      flow_[static_cast<std::size_t>(pred_[static_cast<std::size_t>(u)])] += up_[static_cast<std::size_t>(u)] ? delta : -delta;

    const double rc = reduced(se);
    const int u_in = side == 1 ? first : second;
    const int v_in = side == 1 ? second : first;
    tree_[static_cast<std::size_t>(pred_[static_cast<std::size_t>(u_out)])] = 0;
    tree_[se] = 1;

    // Re-hang the path u_in .. u_out under v_in, reversing parent links.
    int cur = u_in, new_parent = v_in, new_pred = e;
    char new_up = src_[se] == u_in;
    for (;;) {
      const std::size_t sc = static_cast<std::size_t>(cur);
      const int old_parent = parent_[sc], old_pred = pred_[sc];
      const char old_up = up_[sc];
      detach(cur, old_parent);
      attach(cur, new_parent);
      parent_[sc] = new_parent;
      pred_[sc] = new_pred;
      up_[sc] = new_up;
      if (cur == u_out) break;
      new_parent = cur;
      new_pred = old_pred;
      new_up = !old_up;
      cur = old_parent;
    }

    // Shift the potentials of the re-hung subtree so that the entering arc has zero reduced cost.
    const double shift = src_[se] == u_in ? -rc : rc;
    stack_.clear();
    stack_.push_back(u_in);
    while (!stack_.empty()) {
      const int v = stack_.back();
      stack_.pop_back();
      const std::size_t sv = static_cast<std::size_t>(v);
      pi_[sv] += shift;
      depth_[sv] = depth_[static_cast<std::size_t>(parent_[sv])] + 1;
      for (int c = first_child_[sv]; c >= 0; c = next_[static_cast<std::size_t>(c)]) stack_.push_back(c);
    }
  }

  int V_;
  int artificial_ = 0;
  std::vector<int> src_, tgt_;
  std::vector<double> cost_, flow_;
  std::vector<char> tree_;
  std::vector<int> parent_, pred_, depth_, first_child_, next_, prev_;
  std::vector<char> up_;
  std::vector<double> pi_;
  std::vector<int> stack_;
  std::size_t next_arc_ = 0;
};

// Above this many positive-negative pairs the arc set starts from nearest neighbours and grows
// by constraint generation.
constexpr double kDenseArcLimit = 2.0e6;

}  // namespace

DualSolution lipschitz_dual(const SignedCloud& cloud) {
  const Eigen::Index m = cloud.points.cols();
  if (cloud.mass.size() != m) throw Error(Errc::invalid_params, "mass and points differ in length", "mass");
  DualSolution sol;
  sol.phi = Eigen::VectorXd::Zero(m);
  if (m == 0) return sol;
  const int ground = static_cast<int>(m);
  Eigen::VectorXd g(m);
  double scale = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    g[i] = std::max(0.0, cloud.radius - (cloud.points.col(i) - cloud.center).norm());
    scale += std::abs(cloud.mass[i]);
  }
  if (!(scale > 0)) return sol;
  // Routing through the ground is allowed, so the effective pair cost is min(|xi - xj|, gi + gj).
  // That cost is a metric, so transport only needs arcs from positive to negative points and
  // through the ground.
  auto pair_cost = [&](Eigen::Index i, Eigen::Index j) {
    return std::min((cloud.points.col(i) - cloud.points.col(j)).norm(), g[i] + g[j]);
  };
  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (cloud.mass[i] > 0) pos.push_back(i);
    if (cloud.mass[i] < 0) neg.push_back(i);
  }
  std::vector<double> supply(static_cast<std::size_t>(m) + 1);
  for (Eigen::Index i = 0; i < m; ++i) supply[static_cast<std::size_t>(i)] = cloud.mass[i];
  supply[static_cast<std::size_t>(ground)] = -cloud.mass.sum();

  const double max_cost = 2.0 * std::max(cloud.radius, 1e-300);
  NetworkSimplex ns(supply, (max_cost + 1.0) * static_cast<double>(m + 2));
  for (auto i : pos) ns.add_arc(static_cast<int>(i), ground, g[i]);
  for (auto j : neg) ns.add_arc(ground, static_cast<int>(j), g[j]);

  const bool dense = static_cast<double>(pos.size()) * static_cast<double>(neg.size()) <= kDenseArcLimit;
  if (dense) {
    for (auto i : pos)
      for (auto j : neg) ns.add_arc(static_cast<int>(i), static_cast<int>(j), pair_cost(i, j));
  } else {
    auto subset_tree = [&](const std::vector<Eigen::Index>& ids) {
      Eigen::MatrixXd p(cloud.points.rows(), static_cast<Eigen::Index>(ids.size()));
      for (std::size_t j = 0; j < ids.size(); ++j) p.col(static_cast<Eigen::Index>(j)) = cloud.points.col(ids[j]);
      return KdTree(p);
    };
    const KdTree neg_tree = subset_tree(neg);
    const std::size_t k = std::min<std::size_t>(16, neg.size());
    for (auto i : pos)
      for (const auto& [j, dj] : neg_tree.knn(cloud.points.col(i), k))
        ns.add_arc(static_cast<int>(i), static_cast<int>(neg[j]), pair_cost(i, neg[j]));
  }

  const double eps = 1e-12 * max_cost;
  for (int round = 0;; ++round) {
    sol.pivots += ns.run(eps);
    if (dense) break;
    // Add every violated positive-negative pair and continue from the current basis.
    std::size_t added = 0;
    for (auto i : pos)
      for (auto j : neg) {
        const double c = pair_cost(i, j);
        if (c + ns.potential(static_cast<int>(i)) - ns.potential(static_cast<int>(j)) < -eps) {
          ns.add_arc(static_cast<int>(i), static_cast<int>(j), c);
          ++added;
        }
      }
    if (added == 0) break;
    if (round > 100) throw Error(Errc::lp_infeasible, "constraint generation did not settle", "mass");
  }
  if (ns.artificial_flow() > 1e-9 * scale)
    throw Error(Errc::lp_infeasible, "transshipment problem has no feasible flow", "mass");
  sol.value = ns.real_cost();

  // Potentials relative to the ground solve the bipartite dual. Its c-transform over the negative
  // points and the ground is 1-Lipschitz for the capped metric on every pair, vanishes at the ground
  // and does not lower the objective.
  const double pg = ns.potential(ground);
  std::vector<double> phi_neg(neg.size());
  for (std::size_t t = 0; t < neg.size(); ++t) phi_neg[t] = pg - ns.potential(static_cast<int>(neg[t]));
  for (Eigen::Index i = 0; i < m; ++i) {
    double v = g[i];
    for (std::size_t t = 0; t < neg.size(); ++t) v = std::min(v, phi_neg[t] + pair_cost(i, neg[t]));
    sol.phi[i] = v;
  }
  return sol;
}

}  // namespace gdl
