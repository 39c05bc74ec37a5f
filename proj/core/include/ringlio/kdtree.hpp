#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "ringlio/geometry.hpp"

namespace ringlio {

/// Static 3-D kd-tree over a point set. Exact nearest / k-nearest queries with
/// ties broken by index so results are reproducible.
class KdTree {
 public:
  struct Neighbor {
    std::size_t index;
    double squared_distance;
  };

  KdTree() = default;
  explicit KdTree(std::vector<Vec3> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  std::optional<Neighbor> nearest(const Vec3& query,
                                  double max_distance = std::numeric_limits<double>::infinity()) const;

  /// Up to k neighbors within max_distance, ascending by distance.
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k,
                            double max_distance = std::numeric_limits<double>::infinity()) const;

 private:
  struct Node {
    std::size_t begin;
    std::size_t end;
    int axis;  // -1 for leaves
    double split;
    int left;
    int right;
  };

  int build(std::size_t begin, std::size_t end);
  void search(int node, const Vec3& q, std::size_t k, std::vector<Neighbor>& heap, double& bound) const;

  std::vector<Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace ringlio
