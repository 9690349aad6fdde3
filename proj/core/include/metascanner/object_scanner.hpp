#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "metascanner/finding.hpp"
#include "metascanner/policy.hpp"
#include "metascanner/scene.hpp"
#include "metascanner/script_scanner.hpp"

namespace metascanner {

inline constexpr double kZeroScaleEpsilon = 1e-6;
/// Share of a victim's sampled rays a blocker must take for DOR-1.
inline constexpr double kDenialRayFraction = 0.5;

enum class VisibilityClass { Visible, Invisible };
enum class InvisibleReason {
  none,
  no_renderer,
  renderer_disabled,
  alpha_below_threshold,
  fully_transparent_texture,
  zero_scale,
};

std::string_view to_string(VisibilityClass c);
std::string_view to_string(InvisibleReason r);

struct Visibility {
  VisibilityClass visibility = VisibilityClass::Visible;
  InvisibleReason reason = InvisibleReason::none;

  bool invisible() const { return visibility == VisibilityClass::Invisible; }
  friend bool operator==(const Visibility&, const Visibility&) = default;
};

Visibility classify_visibility(const SceneNode& node, const WorldTransform& wt,
                               const std::map<std::string, Material>& materials,
                               const std::map<std::string, TextureAsset>& textures,
                               const Thresholds& thresholds);

/// Ray interception summary for one (blocker, victim) pair.
struct BlockerAssessment {
  std::string blocker;
  std::string victim;
  int blocked_rays = 0;
  int total_rays = 0;
  std::optional<ScriptVerdict> blocker_verdict;
};

using VerdictMap = std::map<std::string, ScriptVerdict>;

/// Shared analysis state: visibility per node, and the first-hit census of
/// sampled rays aimed at every visible interactable and input-surface node.
class ObjectAnalysis {
 public:
  ObjectAnalysis(const SceneContext& scene, const Thresholds& thresholds, unsigned jobs = 1);

  const SceneContext& scene() const { return *scene_; }
  const std::vector<Visibility>& visibility() const { return visibility_; }
  /// Rays sampled per target node position (0 for non-targets).
  int total_rays(std::size_t target) const;
  /// Rays aimed at `target` whose first hit is `blocker` (positions).
  int blocked_rays(std::size_t blocker, std::size_t target) const;
  /// Targets for which `blocker` is the first hit on at least one ray.
  std::vector<std::size_t> intercepted_targets(std::size_t blocker) const;
  std::vector<BlockerAssessment> assessments() const;

 private:
  const SceneContext* scene_;
  std::vector<Visibility> visibility_;
  std::map<std::size_t, int> totals_;
  std::map<std::pair<std::size_t, std::size_t>, int> hits_;  // (blocker, target)
};

std::vector<Finding> detect_clickjacking(const ObjectAnalysis& analysis, const RuleSet& ruleset,
                                         const VerdictMap& verdicts);
std::vector<Finding> detect_denial_of_raycasting(const ObjectAnalysis& analysis,
                                                 const RuleSet& ruleset);
std::vector<Finding> detect_object_in_the_middle(const ObjectAnalysis& analysis,
                                                 const RuleSet& ruleset,
                                                 const VerdictMap& verdicts);

/// Runs all three detectors; disabled rules produce no findings.
std::vector<Finding> scan_objects(const SceneContext& scene, const RuleSet& ruleset,
                                  const VerdictMap& verdicts, unsigned jobs = 1);

}  // namespace metascanner
