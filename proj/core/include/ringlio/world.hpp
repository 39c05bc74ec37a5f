#pragma once

#include <optional>
#include <vector>

#include "ringlio/geometry.hpp"

namespace ringlio {

/// Oriented box. A hollow box is seen from the inside (room shells); a solid
/// one blocks from the outside.
struct Box {
  PoseSE3 pose;  ///< box frame -> world, box centered at the frame origin
  Vec3 half_extents = Vec3::Constant(0.5);
  bool hollow = false;
};

/// Vertical cylinder standing on `base`.
struct Cylinder {
  Vec3 base = Vec3::Zero();
  double radius = 0.5;
  double height = 1.0;
};

/// Infinite plane through `point`.
struct Plane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
};

struct RayHit {
  double range = 0.0;
  Vec3 normal = Vec3::Zero();  ///< unit surface normal facing the ray origin, world frame
};

class World {
 public:
  void add(const Box& box) { boxes_.push_back(box); }
  void add(const Cylinder& cylinder) { cylinders_.push_back(cylinder); }
  void add(const Plane& plane) { planes_.push_back(plane); }

  /// Closest intersection along a unit direction within (min_range, max_range].
  std::optional<RayHit> cast(const Vec3& origin, const Vec3& direction, double max_range,
                             double min_range = 1e-6) const;

  /// True when p lies inside a solid box or cylinder, or outside a hollow box.
  bool inside_solid(const Vec3& p) const;

  const std::vector<Box>& boxes() const { return boxes_; }
  const std::vector<Cylinder>& cylinders() const { return cylinders_; }
  const std::vector<Plane>& planes() const { return planes_; }
  std::size_t size() const { return boxes_.size() + cylinders_.size() + planes_.size(); }

 private:
  std::vector<Box> boxes_;
  std::vector<Cylinder> cylinders_;
  std::vector<Plane> planes_;
};

}  // namespace ringlio
