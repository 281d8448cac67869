#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

namespace cvpyr {

/// Static 3D k-d tree for nearest-neighbour queries. Points are copied in;
/// indices returned refer to the input order.
class KdTree {
 public:
  explicit KdTree(std::span<const Eigen::Vector3d> points);

  struct Hit {
    std::size_t index = 0;
    double distance = 0.0;
  };

  /// Nearest point to `query`. The tree must be non-empty.
  Hit nearest(const Eigen::Vector3d& query) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::size_t begin;  // range into order_
    std::size_t end;
    int axis;           // -1 for leaves
    double split;
    int left;
    int right;
  };

  int build(std::size_t begin, std::size_t end);
  void search(int node, const Eigen::Vector3d& q, Hit& best, double& best_sq) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace cvpyr
