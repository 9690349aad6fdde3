#pragma once

#include <string_view>
#include <vector>

#include "metascanner/finding.hpp"
#include "metascanner/policy.hpp"
#include "metascanner/world_model.hpp"

namespace metascanner {

enum class LibraryClass { Allowed, Blocked, HashMismatch, Unknown };
std::string_view to_string(LibraryClass c);

struct LibraryVerdict {
  LibraryRef ref;
  LibraryClass verdict = LibraryClass::Unknown;
  friend bool operator==(const LibraryVerdict&, const LibraryVerdict&) = default;
};

/// Precedence: blocklist > exact allowlist triple > allowlisted name/version
/// with another hash > unknown.
LibraryClass classify_library(const LibraryRef& ref, const LibraryPolicy& policy);

struct LibraryScanResult {
  std::vector<LibraryVerdict> verdicts;  // one per manifest entry, same order
  std::vector<Finding> findings;
};

LibraryScanResult scan_libraries(const Manifest& manifest, const LibraryPolicy& policy,
                                 const RuleSet& ruleset);

}  // namespace metascanner
