#include "metascanner/object_scanner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "metascanner/parallel.hpp"

namespace metascanner {

std::string_view to_string(VisibilityClass c) {
  return c == VisibilityClass::Visible ? "Visible" : "Invisible";
}

std::string_view to_string(InvisibleReason r) {
  switch (r) {
    case InvisibleReason::none: return "none";
    case InvisibleReason::no_renderer: return "no_renderer";
    case InvisibleReason::renderer_disabled: return "renderer_disabled";
    case InvisibleReason::alpha_below_threshold: return "alpha_below_threshold";
    case InvisibleReason::fully_transparent_texture: return "fully_transparent_texture";
    case InvisibleReason::zero_scale: return "zero_scale";
  }
  return "?";
}

namespace {

int max_texel_alpha(const TextureAsset& tex) {
  int best = 0;
  for (std::size_t i = 3; i < tex.pixels.size() && best < 255; i += 4) {
    best = std::max<int>(best, tex.pixels[i]);
  }
  return best;
}

using AlphaLookup = std::function<std::optional<int>(const std::string&)>;

Visibility classify(const SceneNode& node, const WorldTransform& wt,
                    const std::map<std::string, Material>& materials, const AlphaLookup& alpha_of,
                    const Thresholds& th) {
  auto invisible = [](InvisibleReason r) { return Visibility{VisibilityClass::Invisible, r}; };
  if (!node.renderer) return invisible(InvisibleReason::no_renderer);
  if (!node.renderer->enabled) return invisible(InvisibleReason::renderer_disabled);

  auto mat = materials.find(node.renderer->material_ref);
  if (mat != materials.end()) {
    const Material& m = mat->second;
    std::optional<int> tex_alpha;
    if (m.texture_ref) tex_alpha = alpha_of(*m.texture_ref);
    if (m.shader_tag != ShaderTag::opaque) {
      const double effective = m.base_color.a * (tex_alpha ? *tex_alpha / 255.0 : 1.0);
      if (effective <= th.alpha_invisible) return invisible(InvisibleReason::alpha_below_threshold);
    }
    if (tex_alpha && *tex_alpha <= th.alpha_invisible * 255.0) {
      return invisible(InvisibleReason::fully_transparent_texture);
    }
  }
  if (node.collider && node.collider->enabled) {
    const Vec3 s = wt.axis_scale();
    if (std::abs(s.x) <= kZeroScaleEpsilon || std::abs(s.y) <= kZeroScaleEpsilon ||
        std::abs(s.z) <= kZeroScaleEpsilon) {
      return invisible(InvisibleReason::zero_scale);
    }
  }
  return {};
}

}  // namespace

Visibility classify_visibility(const SceneNode& node, const WorldTransform& wt,
                               const std::map<std::string, Material>& materials,
                               const std::map<std::string, TextureAsset>& textures,
                               const Thresholds& thresholds) {
  auto alpha_of = [&](const std::string& id) -> std::optional<int> {
    auto it = textures.find(id);
    if (it == textures.end()) return std::nullopt;
    return max_texel_alpha(it->second);
  };
  return classify(node, wt, materials, alpha_of, thresholds);
}

ObjectAnalysis::ObjectAnalysis(const SceneContext& scene, const Thresholds& thresholds,
                               unsigned jobs)
    : scene_(&scene) {
  const WorldPackage& pkg = scene.package;
  const std::size_t n = pkg.nodes.size();

  std::map<std::string, std::optional<int>> alpha_cache;
  auto alpha_of = [&](const std::string& id) -> std::optional<int> {
    auto [it, fresh] = alpha_cache.try_emplace(id);
    if (fresh) {
      auto tex = pkg.textures.find(id);
      if (tex != pkg.textures.end()) it->second = max_texel_alpha(tex->second);
    }
    return it->second;
  };
  visibility_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    visibility_.push_back(
        classify(pkg.nodes[i], scene.transforms[i], pkg.materials, alpha_of, thresholds));
  }

  std::vector<ColliderBox> colliders;
  for (std::size_t i : scene.index.colliders()) {
    if (!scene.aabbs[i]) continue;
    const Collider& c = *pkg.nodes[i].collider;
    if (!c.enabled || !c.blocks_ray) continue;
    colliders.push_back({pkg.nodes[i].id, *scene.aabbs[i], true, true});
  }

  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < n; ++i) {
    if (!scene.aabbs[i]) continue;
    const SceneNode& node = pkg.nodes[i];
    const bool visible_interactable = node.interactable && !visibility_[i].invisible();
    if (visible_interactable || node.has_tag(kTagInputSurface)) targets.push_back(i);
  }

  std::vector<std::vector<std::ptrdiff_t>> first_hits(targets.size());
  parallel_for(targets.size(), jobs, [&](std::size_t k) {
    const Aabb& box = *scene.aabbs[targets[k]];
    const Vec3 center = box.center();
    const auto rays = sample_viewpoints(box, scene.index, scene.transforms, thresholds);

    // Any hit no farther than the target center lies inside the box spanned
    // by the ray origins and the center, so colliders outside it cannot win.
    Aabb region{center, center};
    for (const Ray& r : rays) region = region.merged({r.origin, r.origin});
    region = region.inflated(1e-6);
    std::vector<ColliderBox> near;
    for (const auto& c : colliders) {
      if (c.box.overlaps(region)) near.push_back(c);
    }

    auto& out = first_hits[k];
    out.reserve(rays.size());
    for (const Ray& r : rays) {
      const double reach = norm(center - r.origin) + kHitTieEpsilon;
      std::optional<Hit> hit = first_hit(r, near);
      if (!hit || hit->t > reach) hit = first_hit(r, colliders);
      out.push_back(hit ? static_cast<std::ptrdiff_t>(*scene.index.position_of(hit->node_id)) : -1);
    }
  });

  for (std::size_t k = 0; k < targets.size(); ++k) {
    totals_[targets[k]] = static_cast<int>(first_hits[k].size());
    for (std::ptrdiff_t h : first_hits[k]) {
      if (h >= 0) ++hits_[{static_cast<std::size_t>(h), targets[k]}];
    }
  }
}

int ObjectAnalysis::total_rays(std::size_t target) const {
  auto it = totals_.find(target);
  return it == totals_.end() ? 0 : it->second;
}

int ObjectAnalysis::blocked_rays(std::size_t blocker, std::size_t target) const {
  auto it = hits_.find({blocker, target});
  return it == hits_.end() ? 0 : it->second;
}

std::vector<std::size_t> ObjectAnalysis::intercepted_targets(std::size_t blocker) const {
  std::vector<std::size_t> out;
  for (auto it = hits_.lower_bound({blocker, 0}); it != hits_.end() && it->first.first == blocker;
       ++it) {
    if (it->first.second != blocker) out.push_back(it->first.second);
  }
  return out;
}

std::vector<BlockerAssessment> ObjectAnalysis::assessments() const {
  const auto& nodes = scene_->package.nodes;
  std::vector<BlockerAssessment> out;
  for (const auto& [key, count] : hits_) {
    if (key.first == key.second) continue;
    out.push_back({nodes[key.first].id, nodes[key.second].id, count, total_rays(key.second), {}});
  }
  return out;
}

namespace {

const ScriptVerdict* verdict_for(const SceneNode& node, const VerdictMap& verdicts) {
  if (!node.interactable) return nullptr;
  auto it = verdicts.find(node.interactable->script_ref);
  return it == verdicts.end() ? nullptr : &it->second;
}

std::string ray_ratio(int blocked, int total) {
  return std::to_string(blocked) + "/" + std::to_string(total);
}

}  // namespace

std::vector<Finding> detect_clickjacking(const ObjectAnalysis& analysis, const RuleSet& ruleset,
                                         const VerdictMap& verdicts) {
  const SceneContext& scene = analysis.scene();
  const auto& nodes = scene.package.nodes;
  const auto& vis = analysis.visibility();
  const Thresholds& th = ruleset.thresholds();
  std::vector<Finding> out;

  if (ruleset.enabled(RuleId::CJ_1)) {
    std::vector<std::size_t> visible;
    for (std::size_t i : scene.index.interactables()) {
      if (!vis[i].invisible() && scene.aabbs[i]) visible.push_back(i);
    }
    for (std::size_t x = 0; x < visible.size(); ++x) {
      for (std::size_t y = x + 1; y < visible.size(); ++y) {
        const SceneNode& a = nodes[visible[x]];
        const SceneNode& b = nodes[visible[y]];
        if (a.interactable->script_ref == b.interactable->script_ref) continue;
        const Aabb& ba = *scene.aabbs[visible[x]];
        const Aabb& bb = *scene.aabbs[visible[y]];
        if (!ba.overlaps(bb)) continue;
        const double iou = aabb_iou(ba, bb);
        if (iou < th.iou_colocated) continue;
        const Vec3 ea = ba.extent();
        const Vec3 eb = bb.extent();
        bool same_size = true;
        for (int axis = 0; axis < 3; ++axis) {
          const double hi = std::max(ea[axis], eb[axis]);
          if (std::abs(ea[axis] - eb[axis]) > th.size_ratio_tolerance * hi) same_size = false;
        }
        if (!same_size) continue;

        const int qa = a.renderer->render_queue;
        const int qb = b.renderer->render_queue;
        const bool a_later = qa != qb ? qa > qb : a.id > b.id;
        const SceneNode& suspect = a_later ? a : b;
        const SceneNode& other = a_later ? b : a;
        Finding f;
        f.rule_id = RuleId::CJ_1;
        f.severity = ruleset.severity(RuleId::CJ_1);
        f.subjects = {suspect.id, other.id};
        f.evidence["iou"] = format_decimal(iou);
        f.evidence["render_queue.suspect"] = std::to_string(suspect.renderer->render_queue);
        f.evidence["render_queue.other"] = std::to_string(other.renderer->render_queue);
        f.evidence["script.suspect"] = suspect.interactable->script_ref;
        f.evidence["script.other"] = other.interactable->script_ref;
        if (const ScriptVerdict* v = verdict_for(suspect, verdicts)) {
          f.evidence["verdict.suspect"] = std::string(to_string(v->verdict));
        }
        f.message = "interactable '" + suspect.id + "' is rendered over '" + other.id +
                    "' at the same position with a different script";
        out.push_back(std::move(f));
      }
    }
  }

  if (ruleset.enabled(RuleId::CJ_2)) {
    for (std::size_t b : scene.index.interactables()) {
      if (!vis[b].invisible()) continue;
      const SceneNode& blocker = nodes[b];
      const ScriptVerdict* v = verdict_for(blocker, verdicts);
      if (!v || v->verdict == VerdictClass::Exfiltrator) continue;
      std::vector<std::size_t> victims;
      for (std::size_t t : analysis.intercepted_targets(b)) {
        if (nodes[t].interactable && !vis[t].invisible()) victims.push_back(t);
      }
      if (victims.empty()) continue;
      const bool distinct = std::any_of(victims.begin(), victims.end(), [&](std::size_t t) {
        return nodes[t].interactable->script_ref != blocker.interactable->script_ref;
      });
      if (v->verdict != VerdictClass::Redirector && !distinct) continue;

      Finding f;
      f.rule_id = RuleId::CJ_2;
      f.severity = ruleset.severity(RuleId::CJ_2);
      f.subjects.push_back(blocker.id);
      for (std::size_t t : victims) {
        f.subjects.push_back(nodes[t].id);
        f.evidence["rays." + nodes[t].id] =
            ray_ratio(analysis.blocked_rays(b, t), analysis.total_rays(t));
      }
      f.evidence["visibility"] = std::string(to_string(vis[b].reason));
      f.evidence["verdict"] = std::string(to_string(v->verdict));
      f.evidence["script"] = blocker.interactable->script_ref;
      f.message = "invisible interactable '" + blocker.id + "' intercepts rays aimed at " +
                  std::to_string(victims.size()) + " visible interactable(s)";
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<Finding> detect_denial_of_raycasting(const ObjectAnalysis& analysis,
                                                 const RuleSet& ruleset) {
  std::vector<Finding> out;
  if (!ruleset.enabled(RuleId::DOR_1)) return out;
  const SceneContext& scene = analysis.scene();
  const auto& nodes = scene.package.nodes;
  const auto& vis = analysis.visibility();
  for (std::size_t b : scene.index.colliders()) {
    const SceneNode& blocker = nodes[b];
    if (!vis[b].invisible() || blocker.interactable) continue;
    if (!blocker.collider->enabled || !blocker.collider->blocks_ray) continue;
    for (std::size_t t : analysis.intercepted_targets(b)) {
      if (!nodes[t].interactable || vis[t].invisible()) continue;
      const int blocked = analysis.blocked_rays(b, t);
      const int total = analysis.total_rays(t);
      if (total == 0 || blocked < kDenialRayFraction * total) continue;
      Finding f;
      f.rule_id = RuleId::DOR_1;
      f.severity = ruleset.severity(RuleId::DOR_1);
      f.subjects = {blocker.id, nodes[t].id};
      f.evidence["blocked_rays"] = std::to_string(blocked);
      f.evidence["total_rays"] = std::to_string(total);
      f.evidence["visibility"] = std::string(to_string(vis[b].reason));
      f.message = "invisible collider '" + blocker.id + "' blocks " + ray_ratio(blocked, total) +
                  " sampled rays to '" + nodes[t].id + "'";
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<Finding> detect_object_in_the_middle(const ObjectAnalysis& analysis,
                                                 const RuleSet& ruleset,
                                                 const VerdictMap& verdicts) {
  std::vector<Finding> out;
  if (!ruleset.enabled(RuleId::OITM_1)) return out;
  const SceneContext& scene = analysis.scene();
  const auto& nodes = scene.package.nodes;
  const auto& vis = analysis.visibility();

  // Input surfaces grouped by parent: the keys of one keypad share a parent.
  struct Group {
    std::string name;
    std::vector<std::size_t> keys;
    std::optional<Aabb> bounds;
  };
  std::map<std::string, Group> groups;
  for (std::size_t k : scene.index.with_tag(kTagInputSurface)) {
    const std::string name = nodes[k].parent.value_or("<root>");
    Group& g = groups[name];
    g.name = name;
    g.keys.push_back(k);
    if (scene.aabbs[k]) g.bounds = g.bounds ? g.bounds->merged(*scene.aabbs[k]) : *scene.aabbs[k];
  }
  if (groups.empty()) return out;

  for (std::size_t b : scene.index.interactables()) {
    if (!vis[b].invisible()) continue;
    const SceneNode& panel = nodes[b];
    const ScriptVerdict* v = verdict_for(panel, verdicts);
    if (!v || v->verdict != VerdictClass::Exfiltrator) continue;

    std::vector<std::size_t> keys;
    std::vector<std::string> matched;
    int intercepted = 0;
    int total = 0;
    bool overlapping = false;
    for (const auto& [name, g] : groups) {
      bool hit = false;
      if (g.bounds && scene.aabbs[b]) {
        const Aabb& pb = *scene.aabbs[b];
        const Aabb& gb = *g.bounds;
        const bool contained = (gb.contains(pb.min) && gb.contains(pb.max)) ||
                               (pb.contains(gb.min) && pb.contains(gb.max));
        if (contained || aabb_iou(pb, gb) > 0.0) {
          hit = true;
          overlapping = true;
        }
      }
      for (std::size_t k : g.keys) {
        const int blocked = analysis.blocked_rays(b, k);
        intercepted += blocked;
        total += analysis.total_rays(k);
        if (blocked > 0) hit = true;
      }
      if (!hit) continue;
      matched.push_back(name);
      keys.insert(keys.end(), g.keys.begin(), g.keys.end());
    }
    if (matched.empty()) continue;

    Finding f;
    f.rule_id = RuleId::OITM_1;
    f.severity = ruleset.severity(RuleId::OITM_1);
    f.subjects.push_back(panel.id);
    for (std::size_t k : keys) f.subjects.push_back(nodes[k].id);
    std::string group_list;
    for (const auto& name : matched) group_list += (group_list.empty() ? "" : ",") + name;
    f.evidence["input_groups"] = group_list;
    f.evidence["overlaps_input_surface"] = overlapping ? "true" : "false";
    f.evidence["intercepted_rays"] = ray_ratio(intercepted, total);
    f.evidence["visibility"] = std::string(to_string(vis[b].reason));
    f.evidence["script"] = panel.interactable->script_ref;
    f.evidence["verdict"] = std::string(to_string(v->verdict));
    for (std::size_t p = 0; p < v->taint_paths.size(); ++p) {
      std::string path;
      for (const auto& id : v->taint_paths[p]) path += (path.empty() ? "" : " -> ") + id;
      f.evidence["taint_path." + std::to_string(p)] = path;
    }
    f.message = "invisible interactable '" + panel.id + "' covers input surface '" + group_list +
                "' and forwards input to a sink";
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Finding> scan_objects(const SceneContext& scene, const RuleSet& ruleset,
                                  const VerdictMap& verdicts, unsigned jobs) {
  std::vector<Finding> out;
  const bool any = ruleset.enabled(RuleId::CJ_1) || ruleset.enabled(RuleId::CJ_2) ||
                   ruleset.enabled(RuleId::DOR_1) || ruleset.enabled(RuleId::OITM_1);
  if (!any) return out;
  const ObjectAnalysis analysis(scene, ruleset.thresholds(), jobs);
  auto cj = detect_clickjacking(analysis, ruleset, verdicts);
  auto dor = detect_denial_of_raycasting(analysis, ruleset);
  auto oitm = detect_object_in_the_middle(analysis, ruleset, verdicts);
  out.insert(out.end(), cj.begin(), cj.end());
  out.insert(out.end(), dor.begin(), dor.end());
  out.insert(out.end(), oitm.begin(), oitm.end());
  return out;
}

}  // namespace metascanner
