#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "metascanner/math.hpp"

namespace metascanner {

inline constexpr int kPackageFormatVersion = 1;

// Tag vocabulary understood by the rules. Other tags are kept but ignored.
inline constexpr std::string_view kTagInputSurface = "input-surface";
inline constexpr std::string_view kTagSpawnPoint = "spawn-point";

enum class MeshKind { box, quad, sphere };
enum class ShaderTag { opaque, cutout, transparent };
enum class ColliderShape { box, sphere, aabb_of_mesh };
enum class InteractEvent { OnInteract, OnKeyPress };

struct Rgba {
  double r = 1.0;
  double g = 1.0;
  double b = 1.0;
  double a = 1.0;
  friend bool operator==(const Rgba&, const Rgba&) = default;
};

struct Renderer {
  MeshKind mesh = MeshKind::box;
  std::string material_ref;
  bool enabled = true;
  int render_queue = 2000;
  friend bool operator==(const Renderer&, const Renderer&) = default;
};

struct Material {
  std::string id;
  Rgba base_color{};
  ShaderTag shader_tag = ShaderTag::opaque;
  std::optional<std::string> texture_ref;
  friend bool operator==(const Material&, const Material&) = default;
};

struct Collider {
  ColliderShape shape = ColliderShape::box;
  bool enabled = true;
  bool blocks_ray = true;
  friend bool operator==(const Collider&, const Collider&) = default;
};

struct Interactable {
  std::string script_ref;
  InteractEvent event = InteractEvent::OnInteract;
  std::optional<std::string> key_label;
  friend bool operator==(const Interactable&, const Interactable&) = default;
};

struct WorldOwned {
  friend bool operator==(const WorldOwned&, const WorldOwned&) = default;
};
struct AvatarOwned {
  std::string avatar_id;
  friend bool operator==(const AvatarOwned&, const AvatarOwned&) = default;
};
using Owner = std::variant<WorldOwned, AvatarOwned>;

struct SceneNode {
  std::string id;
  std::string name;
  std::optional<std::string> parent;
  Transform transform{};
  std::optional<Renderer> renderer;
  std::optional<Collider> collider;
  std::optional<Interactable> interactable;
  std::set<std::string> tags;
  Owner owner = WorldOwned{};

  bool has_tag(std::string_view tag) const { return tags.count(std::string(tag)) > 0; }
  const AvatarOwned* avatar_owner() const { return std::get_if<AvatarOwned>(&owner); }

  friend bool operator==(const SceneNode&, const SceneNode&) = default;
};

struct LibraryRef {
  std::string name;
  std::string version;
  std::string sha256;  // 64 lowercase hex chars
  friend bool operator==(const LibraryRef&, const LibraryRef&) = default;
};

struct Manifest {
  int format_version = kPackageFormatVersion;
  std::string world_id;
  std::vector<std::string> avatars;
  std::vector<LibraryRef> libraries;
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// Row-major 8-bit RGBA raster.
struct TextureAsset {
  std::string id;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  const std::uint8_t* pixel(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 4;
  }
  friend bool operator==(const TextureAsset&, const TextureAsset&) = default;
};

/// Validated, fully resolved package. Node order is the canonical
/// iteration order for every downstream consumer.
struct WorldPackage {
  Manifest manifest;
  std::vector<SceneNode> nodes;
  std::map<std::string, Material> materials;
  std::map<std::string, TextureAsset> textures;
  std::map<std::string, std::string> scripts;  // id -> raw JSON document

  friend bool operator==(const WorldPackage&, const WorldPackage&) = default;
};

struct LoadOptions {
  /// Unknown keys become warnings instead of ValidationError.
  bool lenient = false;
};

struct LoadResult {
  WorldPackage package;
  std::vector<std::string> warnings;
};

/// Reads `manifest.json`, `world.json`, `textures/*.png` and `scripts/*.json`
/// from a package directory and validates every invariant.
/// Throws ParseError, ValidationError, UnsupportedVersion or IoError.
LoadResult load_package(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Parses already-read documents. `textures` are decoded rasters keyed by id.
LoadResult load_package_documents(std::string_view manifest_json, std::string_view world_json,
                                  std::map<std::string, TextureAsset> textures,
                                  std::map<std::string, std::string> scripts,
                                  const LoadOptions& options = {});

/// Checks every package invariant; throws ValidationError on the first violation.
void validate_package(const WorldPackage& pkg);

/// Writes the package in the on-disk layout read by load_package.
void save_package(const WorldPackage& pkg, const std::filesystem::path& dir);

std::string serialize_manifest(const Manifest& manifest);
std::string serialize_world(const WorldPackage& pkg);

/// World transform for each node, parallel to `pkg.nodes`.
std::vector<WorldTransform> resolve_world_transforms(const WorldPackage& pkg);

/// Read-only lookup structures over a package. Holds a pointer to the
/// package, which must outlive the index. All lists are in canonical order.
class NodeIndex {
 public:
  explicit NodeIndex(const WorldPackage& pkg);

  const WorldPackage& package() const { return *pkg_; }
  std::span<const SceneNode> nodes() const { return pkg_->nodes; }

  std::optional<std::size_t> position_of(std::string_view id) const;
  const SceneNode* find(std::string_view id) const;

  std::span<const std::size_t> with_tag(std::string_view tag) const;
  std::span<const std::size_t> owned_by_avatar(std::string_view avatar_id) const;
  std::span<const std::size_t> world_owned() const { return world_owned_; }
  std::span<const std::size_t> interactables() const { return interactables_; }
  std::span<const std::size_t> colliders() const { return colliders_; }

 private:
  const WorldPackage* pkg_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_tag_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_avatar_;
  std::vector<std::size_t> world_owned_;
  std::vector<std::size_t> interactables_;
  std::vector<std::size_t> colliders_;
};

NodeIndex index_nodes(const WorldPackage& pkg);

std::string_view to_string(MeshKind v);
std::string_view to_string(ShaderTag v);
std::string_view to_string(ColliderShape v);
std::string_view to_string(InteractEvent v);

}  // namespace metascanner
