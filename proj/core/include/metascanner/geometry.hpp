#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metascanner/math.hpp"
#include "metascanner/policy.hpp"
#include "metascanner/world_model.hpp"

namespace metascanner {

inline constexpr double kSlabEpsilon = 1e-9;
inline constexpr double kHitTieEpsilon = 1e-9;

struct Aabb {
  Vec3 min{};
  Vec3 max{};

  Vec3 center() const { return (min + max) * 0.5; }
  Vec3 extent() const { return max - min; }
  double volume() const;
  bool contains(Vec3 p, double slack = 0.0) const;
  bool overlaps(const Aabb& other) const;  // closed boxes
  Aabb merged(const Aabb& other) const;
  Aabb inflated(double margin) const;

  friend bool operator==(const Aabb&, const Aabb&) = default;
};

struct Ray {
  Vec3 origin{};
  Vec3 direction{0, 0, 1};  // unit length
  friend bool operator==(const Ray&, const Ray&) = default;
};

struct Hit {
  std::string node_id;
  double t = 0.0;
  friend bool operator==(const Hit&, const Hit&) = default;
};

/// Collider entry for first-hit queries.
struct ColliderBox {
  std::string node_id;
  Aabb box;
  bool enabled = true;
  bool blocks_ray = true;
};

/// World AABB of a unit primitive (box/quad half-extent 0.5, sphere radius
/// 0.5, quads in local XY with zero Z extent) under an affine transform.
Aabb primitive_aabb(MeshKind mesh, const WorldTransform& wt);

/// The node's hit volume: the collider shape when present (aabb-of-mesh
/// uses the renderer mesh), otherwise the renderer mesh.
/// Returns nullopt for nodes with neither.
std::optional<Aabb> world_aabb(const SceneNode& node, const WorldTransform& wt);

/// Intersection over union. Zero-volume boxes fall back to the area (or
/// length) analogue over the axes on which both boxes have extent.
double aabb_iou(const Aabb& a, const Aabb& b);

/// Smallest t >= 0 at which the ray meets the box (slab method).
/// Origins inside the box return 0.
std::optional<double> ray_aabb_intersect(const Ray& ray, const Aabb& box);

/// Nearest enabled, ray-blocking collider. Ties within kHitTieEpsilon go to
/// the lexicographically smallest node id.
std::optional<Hit> first_hit(const Ray& ray, std::span<const ColliderBox> colliders);

/// Deterministic viewpoint pattern aimed at `target`'s center: the 26
/// normalized directions of {-1,0,1}^3 \ {0} at each of `distances`, then one
/// ray from each spawn position. Spawn points coinciding with the center
/// are skipped.
std::vector<Ray> viewpoint_rays(const Aabb& target, std::span<const double> distances,
                                std::span<const Vec3> spawn_positions);

/// viewpoint_rays with distances from the policy and spawn positions taken
/// from the nodes tagged "spawn-point".
std::vector<Ray> sample_viewpoints(const Aabb& target, const NodeIndex& scene,
                                   std::span<const WorldTransform> world_transforms,
                                   const Thresholds& thresholds);

}  // namespace metascanner
