#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace slipstep {

using Vec2 = Eigen::Vector2d;  // ground plane (x, z)
using Vec3 = Eigen::Vector3d;  // world, y up
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

inline Vec3 up_axis() { return Vec3::UnitY(); }

inline Vec2 ground(const Vec3& p) { return {p.x(), p.z()}; }
inline Vec3 lift(const Vec2& g, double y) { return {g.x(), y, g.y()}; }

/// Heading yaw (rotation about +y) for a ground direction. Yaw 0 faces +x.
inline double yaw_of(const Vec2& dir) { return std::atan2(-dir.y(), dir.x()); }
inline Vec2 direction_of(double yaw) { return {std::cos(yaw), -std::sin(yaw)}; }

/// Left of a ground heading: up x forward, projected onto (x, z).
inline Vec2 left_of(const Vec2& forward) { return {forward.y(), -forward.x()}; }

inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

/// Signed angle that rotates `from` onto `to` in the ground plane, using the same
/// sense as yaw_of (positive = counter-clockwise seen from above).
inline double signed_angle(const Vec2& from, const Vec2& to) {
  return wrap_angle(yaw_of(to) - yaw_of(from));
}

inline Vec2 rotate_ground(const Vec2& v, double yaw) {
  // Yaw rotation about +y restricted to (x, z); consistent with direction_of.
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * v.x() + s * v.y(), -s * v.x() + c * v.y()};
}

inline Mat3 yaw_matrix(double yaw) { return Eigen::AngleAxisd(yaw, Vec3::UnitY()).toRotationMatrix(); }

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace slipstep
