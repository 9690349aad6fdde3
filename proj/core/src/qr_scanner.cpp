#include "metascanner/qr_scanner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "metascanner/parallel.hpp"
#include "metascanner/url_eval.hpp"

namespace metascanner {

namespace {

struct Point2 {
  double u = 0.0;
  double v = 0.0;
};

double cross2(Point2 o, Point2 a, Point2 b) {
  return (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u);
}

double polygon_area(const std::vector<Point2>& p) {
  double twice = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point2& a = p[i];
    const Point2& b = p[(i + 1) % p.size()];
    twice += a.u * b.v - b.u * a.v;
  }
  return std::abs(twice) / 2.0;
}

/// Counter-clockwise ordering of a parallelogram given in corner order.
std::vector<Point2> ccw(std::vector<Point2> p) {
  if (cross2(p[0], p[1], p[2]) < 0) std::reverse(p.begin(), p.end());
  return p;
}

/// Area of the intersection of two convex polygons (Sutherland-Hodgman).
double convex_overlap(const std::vector<Point2>& subject, const std::vector<Point2>& clip) {
  std::vector<Point2> out = subject;
  for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
    const Point2 a = clip[i];
    const Point2 b = clip[(i + 1) % clip.size()];
    std::vector<Point2> in = std::move(out);
    out.clear();
    for (std::size_t j = 0; j < in.size(); ++j) {
      const Point2 p = in[j];
      const Point2 q = in[(j + 1) % in.size()];
      const double dp = cross2(a, b, p);
      const double dq = cross2(a, b, q);
      if (dp >= 0) out.push_back(p);
      if ((dp >= 0) != (dq >= 0)) {
        const double t = dp / (dp - dq);
        out.push_back({p.u + t * (q.u - p.u), p.v + t * (q.v - p.v)});
      }
    }
  }
  return out.size() < 3 ? 0.0 : polygon_area(out);
}

struct QrQuad {
  std::size_t node = 0;
  std::string texture;
  Vec3 center{};
  Vec3 normal{};
  std::array<Vec3, 4> corners{};
};

std::optional<QrQuad> make_quad(const SceneContext& scene, std::size_t i, const std::string& tex) {
  const WorldTransform& wt = scene.transforms[i];
  const Vec3 ax = wt.apply_vector({1, 0, 0});
  const Vec3 ay = wt.apply_vector({0, 1, 0});
  const Vec3 n = cross(ax, ay);
  if (norm(n) <= 1e-12) return std::nullopt;
  QrQuad q;
  q.node = i;
  q.texture = tex;
  q.center = wt.apply_point({0, 0, 0});
  q.normal = normalized(n);
  q.corners = {wt.apply_point({-0.5, -0.5, 0}), wt.apply_point({0.5, -0.5, 0}),
               wt.apply_point({0.5, 0.5, 0}), wt.apply_point({-0.5, 0.5, 0})};
  return q;
}

std::string payloads(const std::vector<qr::QrSymbol>& symbols) {
  std::string out;
  for (const auto& s : symbols) {
    if (!s.decode_ok) continue;
    if (!out.empty()) out += " | ";
    out += s.payload;
  }
  return out;
}

std::string reasons_text(const UrlEvaluation& ev) {
  std::string out;
  for (UrlReason r : ev.reasons) {
    if (!out.empty()) out += ",";
    out += to_string(r);
  }
  return out;
}

std::optional<std::size_t> avatar_root(const SceneContext& scene, const std::string& avatar) {
  const auto& nodes = scene.package.nodes;
  for (std::size_t i : scene.index.owned_by_avatar(avatar)) {
    const SceneNode& n = nodes[i];
    if (!n.parent) return i;
    const SceneNode* parent = scene.index.find(*n.parent);
    const AvatarOwned* owner = parent ? parent->avatar_owner() : nullptr;
    if (!owner || owner->avatar_id != avatar) return i;
  }
  return std::nullopt;
}

}  // namespace

QrScanResult scan_qr(const SceneContext& scene, const RuleSet& ruleset, unsigned jobs) {
  QrScanResult result;
  const WorldPackage& pkg = scene.package;
  const bool aq1 = ruleset.enabled(RuleId::AQ_1);
  const bool aq2 = ruleset.enabled(RuleId::AQ_2);

  std::vector<const TextureAsset*> textures;
  for (const auto& [id, tex] : pkg.textures) textures.push_back(&tex);
  std::vector<std::vector<qr::QrSymbol>> decoded(textures.size());
  parallel_for(textures.size(), jobs,
               [&](std::size_t i) { decoded[i] = qr::scan_texture(*textures[i]); });
  for (std::size_t i = 0; i < textures.size(); ++i) {
    if (!decoded[i].empty()) result.symbols.emplace(textures[i]->id, std::move(decoded[i]));
  }
  if (!aq1 && !aq2) return result;

  auto texture_of = [&](const SceneNode& n) -> const std::string* {
    if (!n.renderer) return nullptr;
    auto mat = pkg.materials.find(n.renderer->material_ref);
    if (mat == pkg.materials.end() || !mat->second.texture_ref) return nullptr;
    return &*mat->second.texture_ref;
  };
  auto decoded_on = [&](const std::string& tex) -> const std::vector<qr::QrSymbol>* {
    auto it = result.symbols.find(tex);
    if (it == result.symbols.end()) return nullptr;
    const bool any = std::any_of(it->second.begin(), it->second.end(),
                                 [](const qr::QrSymbol& s) { return s.decode_ok; });
    return any ? &it->second : nullptr;
  };

  std::vector<QrQuad> avatar_quads;
  std::vector<QrQuad> world_quads;
  for (std::size_t i = 0; i < pkg.nodes.size(); ++i) {
    const SceneNode& n = pkg.nodes[i];
    const std::string* tex = texture_of(n);
    if (!tex) continue;
    const auto* symbols = decoded_on(*tex);
    if (!symbols) continue;

    if (aq1 && n.avatar_owner()) {
      for (const auto& s : *symbols) {
        if (!s.decode_ok || !looks_like_url(s.payload)) continue;
        const UrlEvaluation ev = evaluate_url(s.payload, ruleset.url_policy());
        if (!ev.flagged()) continue;
        Finding f;
        f.rule_id = RuleId::AQ_1;
        f.severity = ruleset.severity(RuleId::AQ_1);
        f.subjects = {n.id, *tex};
        f.evidence["url"] = s.payload;
        f.evidence["url_class"] = std::string(to_string(ev.verdict));
        f.evidence["reasons"] = reasons_text(ev);
        f.evidence["avatar"] = n.avatar_owner()->avatar_id;
        f.evidence["symbol"] = std::to_string(s.x) + "," + std::to_string(s.y) + "," +
                               std::to_string(s.w) + "," + std::to_string(s.h) + " v" +
                               std::to_string(s.version) + "-" +
                               std::string(qr::to_string(*s.ec_level));
        f.message = "avatar QR code on '" + n.id + "' points to a " +
                    (ev.verdict == UrlClass::Blocked ? "blocked" : "suspicious") + " URL";
        result.findings.push_back(std::move(f));
      }
    }
    if (n.renderer->mesh != MeshKind::quad) continue;
    if (auto q = make_quad(scene, i, *tex)) {
      (n.avatar_owner() ? avatar_quads : world_quads).push_back(std::move(*q));
    }
  }
  if (!aq2) return result;

  const Thresholds& th = ruleset.thresholds();
  const double cos_max = std::cos(th.normal_angle_max * std::numbers::pi / 180.0);
  for (const QrQuad& a : avatar_quads) {
    const SceneNode& an = pkg.nodes[a.node];
    const std::string& avatar = an.avatar_owner()->avatar_id;
    std::optional<double> detached;
    std::string root_id;
    if (auto root = avatar_root(scene, avatar)) {
      root_id = pkg.nodes[*root].id;
      const Vec3 c = scene.aabbs[a.node] ? scene.aabbs[a.node]->center() : a.center;
      const double d = norm(c - scene.transforms[*root].position());
      if (d > kDetachedDistance) detached = d;
    }

    bool paired = false;
    for (const QrQuad& w : world_quads) {
      const double cos_angle = std::clamp(dot(a.normal, w.normal), -1.0, 1.0);
      if (cos_angle < cos_max) continue;
      const double offset = dot(a.center - w.center, w.normal);
      if (offset < 0.0 || offset > th.coplanar_epsilon + 1e-9) continue;

      const Vec3 u = normalized(w.corners[1] - w.corners[0]);
      const Vec3 v = cross(w.normal, u);
      auto project = [&](const std::array<Vec3, 4>& pts) {
        std::vector<Point2> out;
        for (const Vec3& p : pts) out.push_back({dot(p - w.center, u), dot(p - w.center, v)});
        return ccw(std::move(out));
      };
      const double area = convex_overlap(project(a.corners), project(w.corners));
      if (area <= 0.0) continue;

      paired = true;
      const SceneNode& wn = pkg.nodes[w.node];
      Finding f;
      f.rule_id = RuleId::AQ_2;
      f.severity = ruleset.severity(RuleId::AQ_2);
      f.subjects = {an.id, wn.id};
      f.evidence["avatar_payload"] = payloads(result.symbols.at(a.texture));
      f.evidence["world_payload"] = payloads(result.symbols.at(w.texture));
      f.evidence["offset_m"] = format_decimal(offset, 6);
      f.evidence["normal_angle_deg"] =
          format_decimal(std::acos(cos_angle) * 180.0 / std::numbers::pi, 3);
      f.evidence["overlap_area_m2"] = format_decimal(area, 6);
      f.evidence["avatar"] = avatar;
      if (detached) f.evidence["detached_distance_m"] = format_decimal(*detached, 3);
      f.message = "avatar QR code on '" + an.id + "' overlays world QR code on '" + wn.id + "'";
      result.findings.push_back(std::move(f));
    }

    if (detached && !paired) {
      Finding f;
      f.rule_id = RuleId::AQ_2;
      f.severity = ruleset.severity(RuleId::AQ_2);
      f.subjects = {an.id, root_id};
      f.evidence["avatar_payload"] = payloads(result.symbols.at(a.texture));
      f.evidence["avatar"] = avatar;
      f.evidence["detached_distance_m"] = format_decimal(*detached, 3);
      f.message = "avatar QR code on '" + an.id + "' is detached from avatar root '" + root_id +
                  "'";
      result.findings.push_back(std::move(f));
    }
  }
  return result;
}

}  // namespace metascanner
