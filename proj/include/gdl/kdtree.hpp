#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <utility>
#include <vector>

namespace gdl {

/// Static k-d tree over the columns of an n x N point matrix.
///
/// The tree keeps its own copy of the points so it can outlive the caller's
/// matrix. Queries are exact (no approximation factor).
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(Eigen::MatrixXd points, int leaf_size = 16);

  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }
  int dim() const { return static_cast<int>(points_.rows()); }
  const Eigen::MatrixXd& points() const { return points_; }

  /// Index and Euclidean distance of the closest point.
  std::pair<std::size_t, double> nearest(const Eigen::Ref<const Eigen::VectorXd>& q) const;
  /// Distance to the closest point; +inf on an empty tree.
  double distance(const Eigen::Ref<const Eigen::VectorXd>& q) const;
  /// The k closest points, sorted by increasing distance.
  std::vector<std::pair<std::size_t, double>> knn(const Eigen::Ref<const Eigen::VectorXd>& q,
                                                  std::size_t k) const;
  /// Indices of all points with |p - q| < radius (strict), unsorted.
  std::vector<std::size_t> radius(const Eigen::Ref<const Eigen::VectorXd>& q, double radius) const;

 private:
  struct Node {
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::size_t begin = 0, end = 0;
    int left = -1, right = -1;
  };

  int build(std::size_t begin, std::size_t end, int depth);
  double sq_dist(std::size_t idx, const Eigen::Ref<const Eigen::VectorXd>& q) const;

  Eigen::MatrixXd points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  int leaf_size_ = 16;
};

}  // namespace gdl
