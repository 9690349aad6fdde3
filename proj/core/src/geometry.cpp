#include "metascanner/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace metascanner {

double Aabb::volume() const {
  const Vec3 e = extent();
  return e.x * e.y * e.z;
}

bool Aabb::contains(Vec3 p, double slack) const {
  return p.x >= min.x - slack && p.x <= max.x + slack && p.y >= min.y - slack &&
         p.y <= max.y + slack && p.z >= min.z - slack && p.z <= max.z + slack;
}

bool Aabb::overlaps(const Aabb& o) const {
  return min.x <= o.max.x && o.min.x <= max.x && min.y <= o.max.y && o.min.y <= max.y &&
         min.z <= o.max.z && o.min.z <= max.z;
}

Aabb Aabb::merged(const Aabb& o) const {
  return {{std::min(min.x, o.min.x), std::min(min.y, o.min.y), std::min(min.z, o.min.z)},
          {std::max(max.x, o.max.x), std::max(max.y, o.max.y), std::max(max.z, o.max.z)}};
}

Aabb Aabb::inflated(double m) const {
  return {min - Vec3{m, m, m}, max + Vec3{m, m, m}};
}

Aabb primitive_aabb(MeshKind mesh, const WorldTransform& wt) {
  const Vec3 half = mesh == MeshKind::quad ? Vec3{0.5, 0.5, 0.0} : Vec3{0.5, 0.5, 0.5};
  // Tight box of the transformed corners: |M| * half around the image of the center.
  const auto& m = wt.linear;
  const Vec3 r{std::abs(m[0]) * half.x + std::abs(m[1]) * half.y + std::abs(m[2]) * half.z,
               std::abs(m[3]) * half.x + std::abs(m[4]) * half.y + std::abs(m[5]) * half.z,
               std::abs(m[6]) * half.x + std::abs(m[7]) * half.y + std::abs(m[8]) * half.z};
  const Vec3 c = wt.translation;
  return {c - r, c + r};
}

std::optional<Aabb> world_aabb(const SceneNode& node, const WorldTransform& wt) {
  if (node.collider) {
    switch (node.collider->shape) {
      case ColliderShape::box: return primitive_aabb(MeshKind::box, wt);
      case ColliderShape::sphere: return primitive_aabb(MeshKind::sphere, wt);
      case ColliderShape::aabb_of_mesh:
        return primitive_aabb(node.renderer ? node.renderer->mesh : MeshKind::box, wt);
    }
  }
  if (node.renderer) return primitive_aabb(node.renderer->mesh, wt);
  return std::nullopt;
}

double aabb_iou(const Aabb& a, const Aabb& b) {
  double inter = 1.0;
  double meas_a = 1.0;
  double meas_b = 1.0;
  bool any_active = false;
  for (int axis = 0; axis < 3; ++axis) {
    const double ea = a.max[axis] - a.min[axis];
    const double eb = b.max[axis] - b.min[axis];
    const double lo = std::max(a.min[axis], b.min[axis]);
    const double hi = std::min(a.max[axis], b.max[axis]);
    if (ea <= 0.0 && eb <= 0.0) {
      // Both flat on this axis: it only gates overlap.
      if (lo > hi) return 0.0;
      continue;
    }
    any_active = true;
    inter *= std::max(0.0, hi - lo);
    meas_a *= ea;
    meas_b *= eb;
  }
  if (!any_active) return 1.0;  // coincident points
  const double uni = meas_a + meas_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::optional<double> ray_aabb_intersect(const Ray& ray, const Aabb& box) {
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis];
    const double d = ray.direction[axis];
    if (d == 0.0) {
      if (o < box.min[axis] || o > box.max[axis]) return std::nullopt;
      continue;
    }
    double t1 = (box.min[axis] - o) / d;
    double t2 = (box.max[axis] - o) / d;
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
  }
  if (tmax < -kSlabEpsilon) return std::nullopt;  // box behind the ray
  if (tmin > tmax + kSlabEpsilon) return std::nullopt;
  return std::max(tmin, 0.0);
}

std::optional<Hit> first_hit(const Ray& ray, std::span<const ColliderBox> colliders) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : colliders) {
    if (!c.enabled || !c.blocks_ray) continue;
    if (auto t = ray_aabb_intersect(ray, c.box); t && *t < best) best = *t;
  }
  if (!std::isfinite(best)) return std::nullopt;
  const ColliderBox* winner = nullptr;
  double winner_t = 0.0;
  for (const auto& c : colliders) {
    if (!c.enabled || !c.blocks_ray) continue;
    if (winner && c.node_id >= winner->node_id) continue;
    if (auto t = ray_aabb_intersect(ray, c.box); t && *t <= best + kHitTieEpsilon) {
      winner = &c;
      winner_t = *t;
    }
  }
  return Hit{winner->node_id, winner_t};
}

std::vector<Ray> viewpoint_rays(const Aabb& target, std::span<const double> distances,
                                std::span<const Vec3> spawn_positions) {
  const Vec3 center = target.center();
  std::vector<Ray> rays;
  rays.reserve(26 * distances.size() + spawn_positions.size());
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dz = -1; dz <= 1; ++dz) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const Vec3 dir = normalized(Vec3{double(dx), double(dy), double(dz)});
        for (double d : distances) rays.push_back({center + dir * d, -dir});
      }
    }
  }
  for (const Vec3& p : spawn_positions) {
    const Vec3 to_center = center - p;
    if (norm(to_center) <= 0.0) continue;
    rays.push_back({p, normalized(to_center)});
  }
  return rays;
}

std::vector<Ray> sample_viewpoints(const Aabb& target, const NodeIndex& scene,
                                   std::span<const WorldTransform> world_transforms,
                                   const Thresholds& thresholds) {
  std::vector<Vec3> spawns;
  for (std::size_t i : scene.with_tag(kTagSpawnPoint)) {
    spawns.push_back(world_transforms[i].position());
  }
  return viewpoint_rays(target, thresholds.view_distances, spawns);
}

}  // namespace metascanner
