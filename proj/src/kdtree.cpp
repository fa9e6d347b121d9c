#include "gdl/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace gdl {

KdTree::KdTree(Eigen::MatrixXd points, int leaf_size)
    : points_(std::move(points)), leaf_size_(std::max(1, leaf_size)) {
  order_.resize(size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!order_.empty()) {
    nodes_.reserve(2 * order_.size() / leaf_size_ + 2);
    build(0, order_.size(), 0);
  }
}

int KdTree::build(std::size_t begin, std::size_t end, int depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{});
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= static_cast<std::size_t>(leaf_size_)) return id;

  // Split on the axis of largest extent.
  const int n = dim();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = -lo;
  for (std::size_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_.col(order_[i]));
    hi = hi.cwiseMax(points_.col(order_[i]));
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] - lo[axis] <= 0.0) return id;  // all coincident

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::size_t a, std::size_t b) { return points_(axis, a) < points_(axis, b); });
  nodes_[id].axis = axis;
  nodes_[id].split = points_(axis, order_[mid]);
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double KdTree::sq_dist(std::size_t idx, const Eigen::Ref<const Eigen::VectorXd>& q) const {
  return (points_.col(idx) - q).squaredNorm();
}

std::pair<std::size_t, double> KdTree::nearest(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  auto r = knn(q, 1);
  if (r.empty()) return {0, std::numeric_limits<double>::infinity()};
  return r.front();
}

double KdTree::distance(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (order_.empty()) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  // Iterative descent with an explicit stack of (node, lower bound).
  std::vector<std::pair<int, double>> stack;
  stack.reserve(64);
  stack.emplace_back(0, 0.0);
  while (!stack.empty()) {
    auto [id, bound] = stack.back();
    stack.pop_back();
    if (bound >= best) continue;
    const Node& nd = nodes_[id];
    if (nd.axis < 0) {
      for (std::size_t i = nd.begin; i < nd.end; ++i) best = std::min(best, sq_dist(order_[i], q));
      continue;
    }
    const double diff = q[nd.axis] - nd.split;
    const int near = diff < 0 ? nd.left : nd.right;
    const int far = diff < 0 ? nd.right : nd.left;
    stack.emplace_back(far, std::max(bound, diff * diff));
    stack.emplace_back(near, bound);
  }
  return std::sqrt(best);
}

std::vector<std::pair<std::size_t, double>> KdTree::knn(const Eigen::Ref<const Eigen::VectorXd>& q,
                                                        std::size_t k) const {
  std::vector<std::pair<std::size_t, double>> out;
  if (order_.empty() || k == 0) return out;
  // Max-heap of (squared distance, index).
  std::priority_queue<std::pair<double, std::size_t>> heap;
  auto worst = [&]() {
    return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().first;
  };
  std::vector<std::pair<int, double>> stack;
  stack.emplace_back(0, 0.0);
  while (!stack.empty()) {
    auto [id, bound] = stack.back();
    stack.pop_back();
    if (bound >= worst()) continue;
    const Node& nd = nodes_[id];
    if (nd.axis < 0) {
      for (std::size_t i = nd.begin; i < nd.end; ++i) {
        const double d2 = sq_dist(order_[i], q);
        if (d2 < worst()) {
          heap.emplace(d2, order_[i]);
          if (heap.size() > k) heap.pop();
        }
      }
      continue;
    }
    const double diff = q[nd.axis] - nd.split;
    const int near = diff < 0 ? nd.left : nd.right;
    const int far = diff < 0 ? nd.right : nd.left;
    stack.emplace_back(far, std::max(bound, diff * diff));
    stack.emplace_back(near, bound);
  }
  out.resize(heap.size());
  for (std::size_t i = heap.size(); i-- > 0;) {
    out[i] = {heap.top().second, std::sqrt(heap.top().first)};
    heap.pop();
  }
  return out;
}

std::vector<std::size_t> KdTree::radius(const Eigen::Ref<const Eigen::VectorXd>& q, double r) const {
  std::vector<std::size_t> out;
  if (order_.empty() || r <= 0) return out;
  const double r2 = r * r;
  std::vector<std::pair<int, double>> stack;
  stack.emplace_back(0, 0.0);
  while (!stack.empty()) {
    auto [id, bound] = stack.back();
    stack.pop_back();
    if (bound >= r2) continue;
    const Node& nd = nodes_[id];
    if (nd.axis < 0) {
      for (std::size_t i = nd.begin; i < nd.end; ++i)
        if (sq_dist(order_[i], q) < r2) out.push_back(order_[i]);
      continue;
    }
    const double diff = q[nd.axis] - nd.split;
    const int near = diff < 0 ? nd.left : nd.right;
    const int far = diff < 0 ? nd.right : nd.left;
    stack.emplace_back(far, std::max(bound, diff * diff));
    stack.emplace_back(near, bound);
  }
  return out;
}

}  // namespace gdl
