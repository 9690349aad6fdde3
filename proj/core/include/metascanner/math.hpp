#pragma once

#include <array>
#include <cmath>

// Coordinate conventions: right-handed, Y-up, meters. A local transform
// scales component-wise, then rotates, then translates.

namespace metascanner {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
constexpr Vec3 operator*(double s, Vec3 a) { return a * s; }
constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) { return a * (1.0 / norm(a)); }

/// Rotation quaternion, scalar-first in memory. The package format stores
/// quaternions as [x, y, z, w].
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quat identity() { return {}; }
  static Quat from_axis_angle(Vec3 axis, double radians);

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Quat normalized() const;
  Vec3 rotate(Vec3 v) const;

  friend constexpr bool operator==(const Quat&, const Quat&) = default;
};

Quat operator*(const Quat& a, const Quat& b);

/// Local transform as authored in the package.
struct Transform {
  Vec3 position{};
  Quat rotation{};
  Vec3 scale{1.0, 1.0, 1.0};

  friend bool operator==(const Transform&, const Transform&) = default;
};

/// Affine world transform: p_world = linear * p_local + translation.
/// Composition of scaled, rotated frames can introduce shear, so the
/// world form keeps the full 3x3 matrix instead of a TRS triple.
struct WorldTransform {
  std::array<double, 9> linear{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
  Vec3 translation{};

  static WorldTransform identity() { return {}; }
  static WorldTransform from_local(const Transform& t);

  Vec3 apply_point(Vec3 p) const { return apply_vector(p) + translation; }
  Vec3 apply_vector(Vec3 v) const {
    return {linear[0] * v.x + linear[1] * v.y + linear[2] * v.z,
            linear[3] * v.x + linear[4] * v.y + linear[5] * v.z,
            linear[6] * v.x + linear[7] * v.y + linear[8] * v.z};
  }
  Vec3 position() const { return translation; }
  /// Length of each transformed local basis axis (the "lossy" scale).
  Vec3 axis_scale() const;

  friend bool operator==(const WorldTransform&, const WorldTransform&) = default;
};

/// parent ∘ child: the child's frame expressed in world space.
WorldTransform compose(const WorldTransform& parent, const WorldTransform& child);
WorldTransform compose_transform(const WorldTransform& parent, const Transform& child);

}  // namespace metascanner
