#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <vector>

namespace sogmm::detail {

// Squared Euclidean distance with a fixed evaluation order, so tree-based
// and exhaustive searches produce bit-identical distances.
inline double squared_distance3(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

// Median-split kd-tree over 3D points supporting nearest-neighbor queries.
class KdTree3 {
 public:
  explicit KdTree3(std::vector<Eigen::Vector3d> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) {
      order_[i] = static_cast<int>(i);
    }
    nodes_.reserve(points_.size());
    root_ = build(0, static_cast<int>(points_.size()), 0);
  }

  bool empty() const { return points_.empty(); }

  // Squared distance from q to its nearest stored point.
  double nearest_squared(const Eigen::Vector3d& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(root_, q, best);
    return best;
  }

 private:
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(int lo, int hi, int depth) {
    if (lo >= hi) {
      return -1;
    }
    const int axis = depth % 3;
    const int mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) {
                       const double va = points_[a](axis);
                       const double vb = points_[b](axis);
                       return va < vb || (va == vb && a < b);
                     });
    const int node_index = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{order_[mid], axis, -1, -1});
    nodes_[node_index].left = build(lo, mid, depth + 1);
    nodes_[node_index].right = build(mid + 1, hi, depth + 1);
    return node_index;
  }

  void search(int node_index, const Eigen::Vector3d& q, double& best) const {
    if (node_index < 0) {
      return;
    }
    const Node& node = nodes_[node_index];
    const Eigen::Vector3d& p = points_[node.point];
    best = std::min(best, squared_distance3(q, p));
    const double delta = q(node.axis) - p(node.axis);
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search(near, q, best);
    if (delta * delta <= best) {
      search(far, q, best);
    }
  }

  std::vector<Eigen::Vector3d> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace sogmm::detail
