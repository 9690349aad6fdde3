#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "metascanner/pipeline.hpp"
#include "metascanner/report.hpp"

namespace metascanner {

struct BenchRow {
  std::string package;  // directory name
  std::string package_id;
  ScanStats stats;
  std::size_t findings = 0;
};

struct BenchSkip {
  std::string package;
  std::string reason;
};

struct BenchResult {
  std::vector<BenchRow> rows;  // sorted by package name
  std::vector<BenchSkip> skipped;
  double wall_ms = 0.0;  // end-to-end, including loading
};

/// Scans every package directory directly under `dir`, up to `jobs` at a
/// time. Unloadable packages are skipped and reported.
BenchResult bench_corpus(const std::filesystem::path& dir, std::string_view policy_document,
                         unsigned jobs = 1);

std::string render_bench_table(const BenchResult& result);
std::string render_bench_json(const BenchResult& result);

}  // namespace metascanner
