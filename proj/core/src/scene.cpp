#include "metascanner/scene.hpp"

namespace metascanner {

SceneContext::SceneContext(const WorldPackage& pkg)
    : package(pkg), index(pkg), transforms(resolve_world_transforms(pkg)) {
  aabbs.reserve(pkg.nodes.size());
  for (std::size_t i = 0; i < pkg.nodes.size(); ++i) {
    aabbs.push_back(world_aabb(pkg.nodes[i], transforms[i]));
  }
}

}  // namespace metascanner
