#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "metascanner/finding.hpp"

namespace metascanner {

inline constexpr std::string_view kReportSchema = "metascanner-report/1";

struct ScanStats {
  std::size_t node_count = 0;
  std::size_t script_count = 0;
  std::size_t texture_count = 0;
  // Wall times in milliseconds.
  double load_ms = 0.0;
  double library_ms = 0.0;
  double script_ms = 0.0;
  double object_ms = 0.0;
  double qr_ms = 0.0;
  double total_ms = 0.0;
};

struct Report {
  std::string package_id;
  std::string policy_digest;
  std::vector<Finding> findings;  // report order
  ScanStats stats;
  std::vector<std::string> warnings;  // lenient-mode diagnostics
};

enum class ReportFormat { json, text };

struct RenderOptions {
  /// Adds wall times and a generation timestamp; breaks byte-identity.
  bool timestamps = false;
  /// ANSI severity colors in text form.
  bool color = false;
};

/// Canonical JSON (sorted keys, two-space indent, trailing newline) or one
/// warning line per finding followed by a summary line.
std::string render_report(const Report& report, ReportFormat format,
                          const RenderOptions& options = {});

}  // namespace metascanner
