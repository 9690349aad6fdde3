#include "metascanner/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "json_util.hpp"
#include "metascanner/errors.hpp"
#include "metascanner/parallel.hpp"

namespace metascanner {

BenchResult bench_corpus(const std::filesystem::path& dir, std::string_view policy_document,
                         unsigned jobs) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> packages;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) packages.push_back(entry.path());
  }
  std::sort(packages.begin(), packages.end());

  struct Outcome {
    std::optional<BenchRow> row;
    std::string error;
  };
  std::vector<Outcome> outcomes(packages.size());
  const auto start = std::chrono::steady_clock::now();
  parallel_for(packages.size(), jobs, [&](std::size_t i) {
    try {
      // Packages already run concurrently; keep each scan single-threaded.
      const Report r = scan_package_with_policy(packages[i], policy_document, {false, 1});
      outcomes[i].row = BenchRow{packages[i].filename().string(), r.package_id, r.stats,
                                 r.findings.size()};
    } catch (const Error& e) {
      outcomes[i].error = e.what();
    }
  });

  BenchResult result;
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  for (std::size_t i = 0; i < packages.size(); ++i) {
    if (outcomes[i].row) {
      result.rows.push_back(std::move(*outcomes[i].row));
    } else {
      result.skipped.push_back({packages[i].filename().string(), outcomes[i].error});
    }
  }
  return result;
}

std::string render_bench_table(const BenchResult& result) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %6s %7s %8s %8s %10s %10s\n", "package", "nodes",
                "scripts", "textures", "findings", "load_ms", "total_ms");
  out += line;
  std::size_t findings = 0;
  for (const auto& r : result.rows) {
    std::snprintf(line, sizeof line, "%-28s %6zu %7zu %8zu %8zu %10.1f %10.1f\n",
                  r.package.c_str(), r.stats.node_count, r.stats.script_count,
                  r.stats.texture_count, r.findings, r.stats.load_ms, r.stats.total_ms);
    out += line;
    findings += r.findings;
  }
  for (const auto& s : result.skipped) out += "skipped " + s.package + ": " + s.reason + "\n";
  std::snprintf(line, sizeof line, "%zu package(s) scanned, %zu skipped, %zu finding(s), %.1f ms wall\n",
                result.rows.size(), result.skipped.size(), findings, result.wall_ms);
  out += line;
  return out;
}

std::string render_bench_json(const BenchResult& result) {
  using detail::json;
  json rows = json::array();
  std::size_t findings = 0;
  for (const auto& r : result.rows) {
    rows.push_back({{"package", r.package},
                    {"package_id", r.package_id},
                    {"node_count", r.stats.node_count},
                    {"script_count", r.stats.script_count},
                    {"texture_count", r.stats.texture_count},
                    {"findings", r.findings},
                    {"timings_ms",
                     {{"load", r.stats.load_ms},
                      {"library", r.stats.library_ms},
                      {"script", r.stats.script_ms},
                      {"object", r.stats.object_ms},
                      {"qr", r.stats.qr_ms},
                      {"total", r.stats.total_ms}}}});
    findings += r.findings;
  }
  json skipped = json::array();
  for (const auto& s : result.skipped) skipped.push_back({{"package", s.package}, {"reason", s.reason}});
  json doc = {{"rows", rows},
              {"skipped", skipped},
              {"summary",
               {{"packages", result.rows.size()},
                {"skipped", result.skipped.size()},
                {"findings", findings},
                {"wall_ms", result.wall_ms}}}};
  return doc.dump(2) + "\n";
}

}  // namespace metascanner
