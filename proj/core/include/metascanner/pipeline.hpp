#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "metascanner/policy.hpp"
#include "metascanner/report.hpp"
#include "metascanner/world_model.hpp"

namespace metascanner {

struct ScanOptions {
  bool lenient = false;
  unsigned jobs = 1;
};

/// "sha256:<hex>" of the raw policy bytes.
std::string policy_digest(std::string_view policy_document);
std::string sha256_hex(std::string_view data);

/// load -> compile rules -> libraries -> scripts -> objects -> QR, merged
/// and sorted. Load and policy errors propagate.
Report scan_package(const std::filesystem::path& package_dir,
                    const std::filesystem::path& policy_path, const ScanOptions& options = {});

/// As above with an in-memory policy document; an empty document means the
/// built-in defaults.
Report scan_package_with_policy(const std::filesystem::path& package_dir,
                                std::string_view policy_document,
                                const ScanOptions& options = {});

/// Scan stages only, on an already loaded package and compiled rule set.
Report scan_loaded(const WorldPackage& pkg, const RuleSet& ruleset, std::string policy_digest,
                   unsigned jobs = 1);

/// CLI exit status: 1 when any finding is at or above `fail_on`, else 0.
int exit_code_for(const Report& report, std::optional<Severity> fail_on);

}  // namespace metascanner
