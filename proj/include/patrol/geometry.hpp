#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <vector>

namespace patrol {

using Vec3 = Eigen::Vector3d;

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

/// Distance from `p` to the closed segment [a, b].
inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

/// Elevation angle of the segment a->b above the horizontal plane, radians in [0, pi/2].
inline double elevation_angle(const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  return std::atan2(std::abs(d.z()), std::hypot(d.x(), d.y()));
}

inline double polyline_length(const std::vector<Vec3>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
  return len;
}

/// Box whose medial axis runs along a segment, used to restrict the path search.
/// `axis` is unit length; `side` and `up` complete an orthonormal frame.
struct OrientedBox {
  Vec3 origin = Vec3::Zero();
  Vec3 axis = Vec3::UnitX();
  Vec3 side = Vec3::UnitY();
  Vec3 up = Vec3::UnitZ();
  double length = 0.0;       // segment length along `axis`
  double pad = 0.0;          // longitudinal padding at both ends
  double half_side = 0.0;
  double half_up = 0.0;

  bool contains(const Vec3& p) const {
    const Vec3 d = p - origin;
    const double a = d.dot(axis);
    if (a < -pad || a > length + pad) return false;
    if (std::abs(d.dot(side)) > half_side) return false;
    return std::abs(d.dot(up)) <= half_up;
  }

  Vec3 center() const { return origin + axis * (0.5 * length); }

  double bounding_radius() const {
    const double hl = 0.5 * length + pad;
    return std::sqrt(hl * hl + half_side * half_side + half_up * half_up);
  }

  /// Box around segment a->b. Degenerate segments get an x-aligned frame.
  static OrientedBox around_segment(const Vec3& a, const Vec3& b, double pad, double half_side,
                                    double half_up) {
    OrientedBox box;
    box.origin = a;
    box.pad = pad;
    box.half_side = half_side;
    box.half_up = half_up;
    const Vec3 d = b - a;
    box.length = d.norm();
    if (box.length > 1e-12) box.axis = d / box.length;
    // side axis is horizontal unless the segment is vertical
    Vec3 side = Vec3::UnitZ().cross(box.axis);
    if (side.norm() < 1e-9) side = Vec3::UnitY();
    box.side = side.normalized();
    box.up = box.axis.cross(box.side).normalized();
    return box;
  }
};

}  // namespace patrol
