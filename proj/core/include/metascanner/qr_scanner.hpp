#pragma once

#include <map>
#include <string>
#include <vector>

#include "metascanner/finding.hpp"
#include "metascanner/policy.hpp"
#include "metascanner/qr_codec.hpp"
#include "metascanner/scene.hpp"

namespace metascanner {

/// Avatar QR quads farther than this from their avatar root are "detached".
inline constexpr double kDetachedDistance = 2.0;

struct QrScanResult {
  std::map<std::string, std::vector<qr::QrSymbol>> symbols;  // by texture id
  std::vector<Finding> findings;
};

/// Locates and decodes QR symbols in every texture (in parallel up to
/// `jobs`), then applies AQ-1 (flagged URL on an avatar texture) and AQ-2
/// (avatar QR quad overlaid on a world QR quad, or detached from its avatar).
QrScanResult scan_qr(const SceneContext& scene, const RuleSet& ruleset, unsigned jobs = 1);

}  // namespace metascanner
