#include "metascanner/math.hpp"

namespace metascanner {

Quat Quat::from_axis_angle(Vec3 axis, double radians) {
  const Vec3 a = metascanner::normalized(axis);
  const double s = std::sin(radians / 2.0);
  return {std::cos(radians / 2.0), a.x * s, a.y * s, a.z * s};
}

Quat Quat::normalized() const {
  const double n = norm();
  return {w / n, x / n, y / n, z / n};
}

Vec3 Quat::rotate(Vec3 v) const {
  // v' = v + 2w(q x v) + 2 q x (q x v)
  const Vec3 q{x, y, z};
  const Vec3 t = cross(q, v) * 2.0;
  return v + t * w + cross(q, t);
}

Quat operator*(const Quat& a, const Quat& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

WorldTransform WorldTransform::from_local(const Transform& t) {
  const Vec3 cx = t.rotation.rotate({t.scale.x, 0, 0});
  const Vec3 cy = t.rotation.rotate({0, t.scale.y, 0});
  const Vec3 cz = t.rotation.rotate({0, 0, t.scale.z});
  WorldTransform out;
  out.linear = {cx.x, cy.x, cz.x, cx.y, cy.y, cz.y, cx.z, cy.z, cz.z};
  out.translation = t.position;
  return out;
}

Vec3 WorldTransform::axis_scale() const {
  return {std::sqrt(linear[0] * linear[0] + linear[3] * linear[3] + linear[6] * linear[6]),
          std::sqrt(linear[1] * linear[1] + linear[4] * linear[4] + linear[7] * linear[7]),
          std::sqrt(linear[2] * linear[2] + linear[5] * linear[5] + linear[8] * linear[8])};
}

WorldTransform compose(const WorldTransform& parent, const WorldTransform& child) {
  WorldTransform out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      double sum = 0.0;
      for (int k = 0; k < 3; ++k) sum += parent.linear[r * 3 + k] * child.linear[k * 3 + c];
      out.linear[r * 3 + c] = sum;
    }
  }
  out.translation = parent.apply_point(child.translation);
  return out;
}

WorldTransform compose_transform(const WorldTransform& parent, const Transform& child) {
  return compose(parent, WorldTransform::from_local(child));
}

}  // namespace metascanner
