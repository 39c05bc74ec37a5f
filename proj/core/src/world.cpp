#include "ringlio/world.hpp"

#include <cmath>
#include <limits>

namespace ringlio {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Candidate {
  double t = kInf;
  Vec3 normal = Vec3::Zero();

  void offer(double t_new, const Vec3& n, double t_min, double t_max) {
    if (t_new > t_min && t_new <= t_max && t_new < t) {
      t = t_new;
      normal = n;
    }
  }
};

void intersect_box(const Box& box, const Vec3& origin, const Vec3& dir, double t_min, double t_max,
                   Candidate& best) {
  const Mat3 r = box.pose.rotation.to_rotation_matrix();
  const Vec3 o = r.transpose() * (origin - box.pose.translation);
  const Vec3 d = r.transpose() * dir;
  double t_near = -kInf;
  double t_far = kInf;
  int axis_near = -1;
  int axis_far = -1;
  for (int a = 0; a < 3; ++a) {
    const double h = box.half_extents[a];
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < -h || o[a] > h) return;
      continue;
    }
    double t0 = (-h - o[a]) / d[a];
    double t1 = (h - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      axis_near = a;
    }
    if (t1 < t_far) {
      t_far = t1;
      axis_far = a;
    }
  }
  if (t_near > t_far) return;
  if (box.hollow) {
    if (axis_far < 0) return;
    Vec3 n = Vec3::Zero();
    n[axis_far] = d[axis_far] > 0.0 ? -1.0 : 1.0;  // inner face points back at the sensor
    best.offer(t_far, r * n, t_min, t_max);
  } else {
    if (axis_near < 0) return;
    Vec3 n = Vec3::Zero();
    n[axis_near] = d[axis_near] > 0.0 ? -1.0 : 1.0;
    best.offer(t_near, r * n, t_min, t_max);
  }
}

void intersect_cylinder(const Cylinder& c, const Vec3& origin, const Vec3& dir, double t_min, double t_max,
                        Candidate& best) {
  const Vec3 o = origin - c.base;
  const double z_top = c.height;
  // Side surface.
  const double a = dir.x() * dir.x() + dir.y() * dir.y();
  if (a > 1e-15) {
    const double b = 2.0 * (o.x() * dir.x() + o.y() * dir.y());
    const double cc = o.x() * o.x() + o.y() * o.y() - c.radius * c.radius;
    const double disc = b * b - 4.0 * a * cc;
    if (disc >= 0.0) {
      const double t = (-b - std::sqrt(disc)) / (2.0 * a);
      const double z = o.z() + t * dir.z();
      if (z >= 0.0 && z <= z_top) {
        const Vec3 hit = o + t * dir;
        best.offer(t, Vec3(hit.x(), hit.y(), 0.0).normalized(), t_min, t_max);
      }
    }
  }
  // Caps.
  if (std::abs(dir.z()) > 1e-15) {
    for (const double zc : {0.0, z_top}) {
      const double t = (zc - o.z()) / dir.z();
      const Vec3 hit = o + t * dir;
      if (hit.x() * hit.x() + hit.y() * hit.y() <= c.radius * c.radius) {
        best.offer(t, Vec3(0.0, 0.0, dir.z() > 0.0 ? -1.0 : 1.0), t_min, t_max);
      }
    }
  }
}

void intersect_plane(const Plane& p, const Vec3& origin, const Vec3& dir, double t_min, double t_max,
                     Candidate& best) {
  const Vec3 n = p.normal.normalized();
  const double denom = n.dot(dir);
  if (std::abs(denom) < 1e-15) return;
  const double t = n.dot(p.point - origin) / denom;
  best.offer(t, denom < 0.0 ? n : Vec3(-n), t_min, t_max);
}

}  // namespace

std::optional<RayHit> World::cast(const Vec3& origin, const Vec3& direction, double max_range,
                                  double min_range) const {
  Candidate best;
  for (const auto& b : boxes_) intersect_box(b, origin, direction, min_range, max_range, best);
  for (const auto& c : cylinders_) intersect_cylinder(c, origin, direction, min_range, max_range, best);
  for (const auto& p : planes_) intersect_plane(p, origin, direction, min_range, max_range, best);
  if (!std::isfinite(best.t)) return std::nullopt;
  return RayHit{best.t, best.normal};
}

bool World::inside_solid(const Vec3& p) const {
  for (const auto& b : boxes_) {
    const Vec3 local = b.pose.rotation.inverse().rotate(p - b.pose.translation);
    const bool inside = (local.cwiseAbs().array() < b.half_extents.array()).all();
    if (inside != b.hollow) return true;
  }
  for (const auto& c : cylinders_) {
    const Vec3 o = p - c.base;
    if (o.z() > 0.0 && o.z() < c.height && o.x() * o.x() + o.y() * o.y() < c.radius * c.radius) return true;
  }
  return false;
}

}  // namespace ringlio
