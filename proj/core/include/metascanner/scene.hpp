#pragma once

#include <optional>
#include <vector>

#include "metascanner/geometry.hpp"
#include "metascanner/world_model.hpp"

namespace metascanner {

/// Derived per-node geometry shared by the object and QR scanners.
/// Vectors are parallel to `package.nodes`.
struct SceneContext {
  explicit SceneContext(const WorldPackage& pkg);

  const WorldPackage& package;
  NodeIndex index;
  std::vector<WorldTransform> transforms;
  std::vector<std::optional<Aabb>> aabbs;
};

}  // namespace metascanner
