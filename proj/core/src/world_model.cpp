#include "metascanner/world_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "metascanner/errors.hpp"
#include "metascanner/png_io.hpp"

namespace metascanner {

namespace fs = std::filesystem;
using detail::Cursor;
using detail::DocContext;
using detail::json;

std::string_view to_string(MeshKind v) {
  switch (v) {
    case MeshKind::box: return "box";
    case MeshKind::quad: return "quad";
    case MeshKind::sphere: return "sphere";
  }
  return "?";
}

std::string_view to_string(ShaderTag v) {
  switch (v) {
    case ShaderTag::opaque: return "opaque";
    case ShaderTag::cutout: return "cutout";
    case ShaderTag::transparent: return "transparent";
  }
  return "?";
}

std::string_view to_string(ColliderShape v) {
  switch (v) {
    case ColliderShape::box: return "box";
    case ColliderShape::sphere: return "sphere";
    case ColliderShape::aabb_of_mesh: return "aabb-of-mesh";
  }
  return "?";
}

std::string_view to_string(InteractEvent v) {
  switch (v) {
    case InteractEvent::OnInteract: return "OnInteract";
    case InteractEvent::OnKeyPress: return "OnKeyPress";
  }
  return "?";
}

namespace {

template <class E, std::size_t N>
E parse_enum(const Cursor& c, const E (&values)[N]) {
  const std::string text = c.string();
  for (E v : values) {
    if (to_string(v) == text) return v;
  }
  c.fail("unknown value '" + text + "'");
}

constexpr MeshKind kMeshKinds[] = {MeshKind::box, MeshKind::quad, MeshKind::sphere};
constexpr ShaderTag kShaderTags[] = {ShaderTag::opaque, ShaderTag::cutout, ShaderTag::transparent};
constexpr ColliderShape kColliderShapes[] = {ColliderShape::box, ColliderShape::sphere,
                                             ColliderShape::aabb_of_mesh};
constexpr InteractEvent kInteractEvents[] = {InteractEvent::OnInteract, InteractEvent::OnKeyPress};

double finite_number(const Cursor& c) {
  const double v = c.number();
  if (!std::isfinite(v)) c.invalid("number must be finite");
  return v;
}

std::vector<double> fixed_numbers(const Cursor& c, std::size_t n) {
  if (c.array().size() != n) c.fail("expected array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(finite_number(c.element(i)));
  return out;
}

Vec3 parse_vec3(const Cursor& c) {
  const auto v = fixed_numbers(c, 3);
  return {v[0], v[1], v[2]};
}

Transform parse_transform(const Cursor& c) {
  c.check_keys({"position", "rotation", "scale"});
  Transform t;
  if (c.has("position")) t.position = parse_vec3(c.child("position"));
  if (c.has("rotation")) {
    const auto q = fixed_numbers(c.child("rotation"), 4);  // x, y, z, w
    Quat rot{q[3], q[0], q[1], q[2]};
    if (rot.norm() < 1e-12) c.child("rotation").invalid("rotation quaternion has zero norm");
    t.rotation = rot.normalized();
  }
  if (c.has("scale")) {
    t.scale = parse_vec3(c.child("scale"));
    if (t.scale.x < 0 || t.scale.y < 0 || t.scale.z < 0) {
      c.child("scale").invalid("scale components must be >= 0");
    }
  }
  return t;
}

Renderer parse_renderer(const Cursor& c) {
  c.check_keys({"mesh", "material_ref", "enabled", "render_queue"});
  Renderer r;
  r.mesh = parse_enum(c.child("mesh"), kMeshKinds);
  r.material_ref = c.child("material_ref").string();
  if (c.has("enabled")) r.enabled = c.child("enabled").boolean();
  if (c.has("render_queue")) {
    const auto q = c.child("render_queue").integer();
    if (q < 0 || q > 5000) c.child("render_queue").invalid("render_queue must be in [0, 5000]");
    r.render_queue = static_cast<int>(q);
  }
  return r;
}

Collider parse_collider(const Cursor& c) {
  c.check_keys({"shape", "enabled", "blocks_ray"});
  Collider col;
  col.shape = parse_enum(c.child("shape"), kColliderShapes);
  if (c.has("enabled")) col.enabled = c.child("enabled").boolean();
  if (c.has("blocks_ray")) col.blocks_ray = c.child("blocks_ray").boolean();
  return col;
}

Interactable parse_interactable(const Cursor& c) {
  c.check_keys({"script_ref", "event", "key_label"});
  Interactable i;
  i.script_ref = c.child("script_ref").string();
  i.event = parse_enum(c.child("event"), kInteractEvents);
  if (c.has("key_label")) i.key_label = c.child("key_label").string();
  return i;
}

Owner parse_owner(const Cursor& c) {
  if (c.value().is_string()) {
    if (c.string() != "world") c.fail("owner must be \"world\" or {\"avatar\": id}");
    return WorldOwned{};
  }
  c.check_keys({"avatar"});
  return AvatarOwned{c.child("avatar").string()};
}

SceneNode parse_node(const Cursor& c) {
  c.check_keys({"id", "name", "parent", "transform", "renderer", "collider", "interactable",
                "tags", "owner"});
  SceneNode n;
  n.id = c.child("id").string();
  if (n.id.empty()) c.child("id").invalid("node id must be nonempty");
  n.name = c.child("name").string();
  if (c.has("parent")) n.parent = c.child("parent").string();
  n.transform = parse_transform(c.child("transform"));
  if (c.has("renderer")) n.renderer = parse_renderer(c.child("renderer"));
  if (c.has("collider")) n.collider = parse_collider(c.child("collider"));
  if (c.has("interactable")) n.interactable = parse_interactable(c.child("interactable"));
  if (c.has("tags")) {
    for (auto& tag : c.child("tags").string_list()) n.tags.insert(std::move(tag));
  }
  if (c.has("owner")) n.owner = parse_owner(c.child("owner"));
  return n;
}

Material parse_material(const Cursor& c) {
  c.check_keys({"id", "base_color", "shader_tag", "texture_ref"});
  Material m;
  m.id = c.child("id").string();
  if (c.has("base_color")) {
    const auto rgba = fixed_numbers(c.child("base_color"), 4);
    for (double v : rgba) {
      if (v < 0.0 || v > 1.0) c.child("base_color").invalid("color components must be in [0, 1]");
    }
    m.base_color = {rgba[0], rgba[1], rgba[2], rgba[3]};
  }
  if (c.has("shader_tag")) m.shader_tag = parse_enum(c.child("shader_tag"), kShaderTags);
  if (c.has("texture_ref")) m.texture_ref = c.child("texture_ref").string();
  return m;
}

Manifest parse_manifest(std::string_view text, const DocContext& ctx) {
  const json doc = detail::parse_json_document(text, ctx.file);
  Cursor c(doc, ctx);
  const auto version = c.child("format_version").integer();
  if (version != kPackageFormatVersion) {
    throw UnsupportedVersion(ctx.file + ": format_version " + std::to_string(version) +
                             " is not supported (expected " +
                             std::to_string(kPackageFormatVersion) + ")");
  }
  c.check_keys({"format_version", "world_id", "avatars", "libraries"});
  Manifest m;
  m.format_version = static_cast<int>(version);
  m.world_id = c.child("world_id").string();
  if (c.has("avatars")) m.avatars = c.child("avatars").string_list();
  if (c.has("libraries")) {
    const Cursor libs = c.child("libraries");
    for (std::size_t i = 0; i < libs.array().size(); ++i) {
      const Cursor l = libs.element(i);
      l.check_keys({"name", "version", "sha256"});
      m.libraries.push_back(
          {l.child("name").string(), l.child("version").string(), l.child("sha256").string()});
    }
  }
  return m;
}

void parse_world(std::string_view text, const DocContext& ctx, WorldPackage& pkg) {
  const json doc = detail::parse_json_document(text, ctx.file);
  Cursor c(doc, ctx);
  c.check_keys({"nodes", "materials"});
  const Cursor nodes = c.child("nodes");
  for (std::size_t i = 0; i < nodes.array().size(); ++i) {
    pkg.nodes.push_back(parse_node(nodes.element(i)));
  }
  if (c.has("materials")) {
    const Cursor mats = c.child("materials");
    for (std::size_t i = 0; i < mats.array().size(); ++i) {
      Material m = parse_material(mats.element(i));
      const std::string id = m.id;
      if (!pkg.materials.emplace(id, std::move(m)).second) {
        throw ValidationError(ctx.file + ": duplicate material id '" + id + "'");
      }
    }
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

bool is_lower_hex64(std::string_view s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char ch) {
           return (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f');
         });
}

std::vector<fs::path> sorted_files(const fs::path& dir, std::string_view ext) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void validate_package(const WorldPackage& pkg) {
  const Manifest& m = pkg.manifest;
  if (m.format_version != kPackageFormatVersion) {
    throw UnsupportedVersion("format_version " + std::to_string(m.format_version));
  }
  for (const auto& lib : m.libraries) {
    if (!is_lower_hex64(lib.sha256)) {
      throw ValidationError("library '" + lib.name + "': sha256 must be 64 lowercase hex chars");
    }
  }
  const std::set<std::string> avatars(m.avatars.begin(), m.avatars.end());

  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < pkg.nodes.size(); ++i) {
    if (!pos.emplace(pkg.nodes[i].id, i).second) {
      throw ValidationError("duplicate node id '" + pkg.nodes[i].id + "'");
    }
  }

  for (const auto& n : pkg.nodes) {
    const std::string who = "node '" + n.id + "'";
    if (n.parent && !pos.count(*n.parent)) {
      throw ValidationError(who + ": parent '" + *n.parent + "' does not exist");
    }
    if (std::abs(n.transform.rotation.norm() - 1.0) > 1e-6) {
      throw ValidationError(who + ": rotation is not a unit quaternion");
    }
    if (n.renderer) {
      if (!pkg.materials.count(n.renderer->material_ref)) {
        throw ValidationError(who + ": material_ref '" + n.renderer->material_ref +
                              "' does not resolve");
      }
      if (n.renderer->render_queue < 0 || n.renderer->render_queue > 5000) {
        throw ValidationError(who + ": render_queue out of range");
      }
    }
    if (n.interactable) {
      if (!n.collider) throw ValidationError(who + ": interactable requires a collider");
      if (!pkg.scripts.count(n.interactable->script_ref)) {
        throw ValidationError(who + ": script_ref '" + n.interactable->script_ref +
                              "' does not resolve");
      }
      const bool keyed = n.interactable->event == InteractEvent::OnKeyPress;
      if (keyed != n.interactable->key_label.has_value()) {
        throw ValidationError(who + ": key_label must be present exactly for OnKeyPress");
      }
    }
    if (const auto* av = n.avatar_owner(); av && !avatars.count(av->avatar_id)) {
      throw ValidationError(who + ": owner avatar '" + av->avatar_id +
                            "' is not listed in the manifest");
    }
  }

  // Parent relation must be acyclic.
  std::vector<std::uint8_t> state(pkg.nodes.size(), 0);  // 0 new, 1 on path, 2 done
  for (std::size_t start = 0; start < pkg.nodes.size(); ++start) {
    std::vector<std::size_t> path;
    std::size_t cur = start;
    while (true) {
      if (state[cur] == 2) break;
      if (state[cur] == 1) {
        throw ValidationError("parent cycle through node '" + pkg.nodes[cur].id + "'");
      }
      state[cur] = 1;
      path.push_back(cur);
      const auto& parent = pkg.nodes[cur].parent;
      if (!parent) break;
      cur = pos.at(*parent);
    }
    for (auto p : path) state[p] = 2;
  }

  for (const auto& [id, mat] : pkg.materials) {
    if (mat.texture_ref && !pkg.textures.count(*mat.texture_ref)) {
      throw ValidationError("material '" + id + "': texture_ref '" + *mat.texture_ref +
                            "' does not resolve");
    }
    const Rgba& c = mat.base_color;
    for (double v : {c.r, c.g, c.b, c.a}) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("material '" + id + "': color component out of [0, 1]");
      }
    }
  }
  for (const auto& [id, tex] : pkg.textures) {
    if (tex.width < 0 || tex.height < 0 ||
        tex.pixels.size() != static_cast<std::size_t>(tex.width) * tex.height * 4) {
      throw ValidationError("texture '" + id + "': pixel buffer size mismatch");
    }
  }
}

LoadResult load_package_documents(std::string_view manifest_json, std::string_view world_json,
                                  std::map<std::string, TextureAsset> textures,
                                  std::map<std::string, std::string> scripts,
                                  const LoadOptions& options) {
  LoadResult result;
  DocContext manifest_ctx{"manifest.json", options.lenient, &result.warnings};
  result.package.manifest = parse_manifest(manifest_json, manifest_ctx);

  DocContext world_ctx{"world.json", options.lenient, &result.warnings};
  parse_world(world_json, world_ctx, result.package);

  for (auto& [id, text] : scripts) {
    const std::string file = "scripts/" + id + ".json";
    const json doc = detail::parse_json_document(text, file);
    DocContext ctx{file, options.lenient, &result.warnings};
    const Cursor c(doc, ctx);
    const std::string declared = c.child("id").string();
    if (declared != id) {
      throw ValidationError(file + ": script id '" + declared + "' does not match file name");
    }
  }
  result.package.textures = std::move(textures);
  result.package.scripts = std::move(scripts);
  validate_package(result.package);
  return result;
}

LoadResult load_package(const fs::path& dir, const LoadOptions& options) {
  if (!fs::is_directory(dir)) throw IoError("package directory not found: " + dir.string());
  const fs::path manifest = dir / "manifest.json";
  const fs::path world = dir / "world.json";
  if (!fs::exists(manifest)) throw IoError("missing " + manifest.string());
  if (!fs::exists(world)) throw IoError("missing " + world.string());

  std::map<std::string, TextureAsset> textures;
  for (const auto& path : sorted_files(dir / "textures", ".png")) {
    const std::string id = path.stem().string();
    textures.emplace(id, read_png(path, id));
  }
  std::map<std::string, std::string> scripts;
  for (const auto& path : sorted_files(dir / "scripts", ".json")) {
    scripts.emplace(path.stem().string(), read_text(path));
  }
  return load_package_documents(read_text(manifest), read_text(world), std::move(textures),
                                std::move(scripts), options);
}

std::string serialize_manifest(const Manifest& manifest) {
  json libs = json::array();
  for (const auto& l : manifest.libraries) {
    libs.push_back({{"name", l.name}, {"version", l.version}, {"sha256", l.sha256}});
  }
  const json doc = {{"format_version", manifest.format_version},
                    {"world_id", manifest.world_id},
                    {"avatars", manifest.avatars},
                    {"libraries", libs}};
  return doc.dump(2) + "\n";
}

std::string serialize_world(const WorldPackage& pkg) {
  json nodes = json::array();
  for (const auto& n : pkg.nodes) {
    const Transform& t = n.transform;
    json node = {
        {"id", n.id},
        {"name", n.name},
        {"transform",
         {{"position", {t.position.x, t.position.y, t.position.z}},
          {"rotation", {t.rotation.x, t.rotation.y, t.rotation.z, t.rotation.w}},
          {"scale", {t.scale.x, t.scale.y, t.scale.z}}}},
        {"tags", n.tags},
    };
    if (n.parent) node["parent"] = *n.parent;
    if (n.renderer) {
      node["renderer"] = {{"mesh", to_string(n.renderer->mesh)},
                          {"material_ref", n.renderer->material_ref},
                          {"enabled", n.renderer->enabled},
                          {"render_queue", n.renderer->render_queue}};
    }
    if (n.collider) {
      node["collider"] = {{"shape", to_string(n.collider->shape)},
                          {"enabled", n.collider->enabled},
                          {"blocks_ray", n.collider->blocks_ray}};
    }
    if (n.interactable) {
      json i = {{"script_ref", n.interactable->script_ref},
                {"event", to_string(n.interactable->event)}};
      if (n.interactable->key_label) i["key_label"] = *n.interactable->key_label;
      node["interactable"] = i;
    }
    if (const auto* av = n.avatar_owner()) {
      node["owner"] = {{"avatar", av->avatar_id}};
    } else {
      node["owner"] = "world";
    }
    nodes.push_back(std::move(node));
  }
  json materials = json::array();
  for (const auto& [id, m] : pkg.materials) {
    json mat = {{"id", id},
                {"base_color", {m.base_color.r, m.base_color.g, m.base_color.b, m.base_color.a}},
                {"shader_tag", to_string(m.shader_tag)}};
    if (m.texture_ref) mat["texture_ref"] = *m.texture_ref;
    materials.push_back(std::move(mat));
  }
  return json{{"nodes", nodes}, {"materials", materials}}.dump(2) + "\n";
}

void save_package(const WorldPackage& pkg, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "manifest.json", serialize_manifest(pkg.manifest));
  write_text(dir / "world.json", serialize_world(pkg));
  if (!pkg.textures.empty()) {
    fs::create_directories(dir / "textures");
    for (const auto& [id, tex] : pkg.textures) write_png(dir / "textures" / (id + ".png"), tex);
  }
  if (!pkg.scripts.empty()) {
    fs::create_directories(dir / "scripts");
    for (const auto& [id, text] : pkg.scripts) write_text(dir / "scripts" / (id + ".json"), text);
  }
}

std::vector<WorldTransform> resolve_world_transforms(const WorldPackage& pkg) {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < pkg.nodes.size(); ++i) pos.emplace(pkg.nodes[i].id, i);

  std::vector<WorldTransform> out(pkg.nodes.size());
  std::vector<std::uint8_t> done(pkg.nodes.size(), 0);
  for (std::size_t start = 0; start < pkg.nodes.size(); ++start) {
    // Walk up to the first resolved ancestor (or root), then resolve down.
    std::vector<std::size_t> chain;
    std::size_t cur = start;
    while (!done[cur]) {
      chain.push_back(cur);
      const auto& parent = pkg.nodes[cur].parent;
      if (!parent) break;
      cur = pos.at(*parent);
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const SceneNode& n = pkg.nodes[*it];
      const WorldTransform parent_wt =
          n.parent ? out[pos.at(*n.parent)] : WorldTransform::identity();
      out[*it] = compose_transform(parent_wt, n.transform);
      done[*it] = 1;
    }
  }
  return out;
}

NodeIndex::NodeIndex(const WorldPackage& pkg) : pkg_(&pkg) {
  for (std::size_t i = 0; i < pkg.nodes.size(); ++i) {
    const SceneNode& n = pkg.nodes[i];
    by_id_.emplace(n.id, i);
    for (const auto& tag : n.tags) by_tag_[tag].push_back(i);
    if (const auto* av = n.avatar_owner()) {
      by_avatar_[av->avatar_id].push_back(i);
    } else {
      world_owned_.push_back(i);
    }
    if (n.interactable) interactables_.push_back(i);
    if (n.collider) colliders_.push_back(i);
  }
}

std::optional<std::size_t> NodeIndex::position_of(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

const SceneNode* NodeIndex::find(std::string_view id) const {
  const auto p = position_of(id);
  return p ? &pkg_->nodes[*p] : nullptr;
}

std::span<const std::size_t> NodeIndex::with_tag(std::string_view tag) const {
  auto it = by_tag_.find(tag);
  if (it == by_tag_.end()) return {};
  return it->second;
}

std::span<const std::size_t> NodeIndex::owned_by_avatar(std::string_view avatar_id) const {
  auto it = by_avatar_.find(avatar_id);
  if (it == by_avatar_.end()) return {};
  return it->second;
}

NodeIndex index_nodes(const WorldPackage& pkg) { return NodeIndex(pkg); }

}  // namespace metascanner
