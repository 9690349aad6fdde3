#include "metascanner/library_scanner.hpp"

#include <algorithm>

namespace metascanner {

std::string_view to_string(LibraryClass c) {
  switch (c) {
    case LibraryClass::Allowed: return "Allowed";
    case LibraryClass::Blocked: return "Blocked";
    case LibraryClass::HashMismatch: return "HashMismatch";
    case LibraryClass::Unknown: return "Unknown";
  }
  return "?";
}

LibraryClass classify_library(const LibraryRef& ref, const LibraryPolicy& policy) {
  if (policy.blocklist.count(ref.name)) return LibraryClass::Blocked;
  if (policy.allowlist.count({ref.name, ref.version, ref.sha256})) return LibraryClass::Allowed;
  const bool same_release =
      std::any_of(policy.allowlist.begin(), policy.allowlist.end(), [&](const LibraryIdentity& a) {
        return a.name == ref.name && a.version == ref.version;
      });
  return same_release ? LibraryClass::HashMismatch : LibraryClass::Unknown;
}

LibraryScanResult scan_libraries(const Manifest& manifest, const LibraryPolicy& policy,
                                 const RuleSet& ruleset) {
  LibraryScanResult out;
  for (const auto& ref : manifest.libraries) {
    const LibraryClass verdict = classify_library(ref, policy);
    out.verdicts.push_back({ref, verdict});
    if (verdict == LibraryClass::Allowed) continue;

    const RuleId rule = verdict == LibraryClass::Unknown ? RuleId::LIB_2 : RuleId::LIB_1;
    if (!ruleset.enabled(rule)) continue;
    Finding f;
    f.rule_id = rule;
    f.severity = ruleset.severity(rule);
    f.subjects = {ref.name + "@" + ref.version};
    f.evidence["verdict"] = std::string(to_string(verdict));
    f.evidence["sha256"] = ref.sha256;
    switch (verdict) {
      case LibraryClass::Blocked:
        f.message = "library '" + ref.name + "' is on the provider blocklist";
        break;
      case LibraryClass::HashMismatch:
        for (const auto& a : policy.allowlist) {
          if (a.name == ref.name && a.version == ref.version) {
            f.evidence["expected_sha256"] = a.sha256;
            break;
          }
        }
        f.message = "library '" + ref.name + "@" + ref.version +
                    "' does not match the allowlisted hash";
        break;
      default:
        f.message = "library '" + ref.name + "@" + ref.version + "' is not on the allowlist";
        break;
    }
    out.findings.push_back(std::move(f));
  }
  return out;
}

}  // namespace metascanner
