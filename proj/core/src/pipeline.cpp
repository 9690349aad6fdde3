#include "metascanner/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "metascanner/errors.hpp"
#include "metascanner/library_scanner.hpp"
#include "metascanner/object_scanner.hpp"
#include "metascanner/qr_scanner.hpp"
#include "metascanner/scene.hpp"
#include "metascanner/script_scanner.hpp"

namespace metascanner {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

std::string policy_digest(std::string_view policy_document) {
  return "sha256:" + sha256_hex(policy_document);
}

Report scan_loaded(const WorldPackage& pkg, const RuleSet& ruleset, std::string digest,
                   unsigned jobs) {
  Report report;
  report.package_id = pkg.manifest.world_id;
  report.policy_digest = std::move(digest);
  report.stats.node_count = pkg.nodes.size();
  report.stats.script_count = pkg.scripts.size();
  report.stats.texture_count = pkg.textures.size();
  const auto start = Clock::now();

  auto t = Clock::now();
  auto libraries = scan_libraries(pkg.manifest, ruleset.library_policy(), ruleset);
  report.stats.library_ms = ms_since(t);

  t = Clock::now();
  auto scripts = scan_scripts(pkg, ruleset, jobs);
  report.stats.script_ms = ms_since(t);

  t = Clock::now();
  const SceneContext scene(pkg);
  auto objects = scan_objects(scene, ruleset, scripts.verdicts, jobs);
  report.stats.object_ms = ms_since(t);

  t = Clock::now();
  auto qr = scan_qr(scene, ruleset, jobs);
  report.stats.qr_ms = ms_since(t);

  for (auto* part : {&libraries.findings, &scripts.findings, &objects, &qr.findings}) {
    report.findings.insert(report.findings.end(), std::make_move_iterator(part->begin()),
                           std::make_move_iterator(part->end()));
  }
  sort_findings(report.findings);
  report.stats.total_ms = ms_since(start);
  return report;
}

Report scan_package_with_policy(const std::filesystem::path& package_dir,
                                std::string_view policy_document, const ScanOptions& options) {
  const auto start = Clock::now();
  PolicyParseResult policy;
  std::string digest;
  if (policy_document.empty()) {
    policy.policy = Policy::defaults();
    digest = policy_digest(serialize_policy(policy.policy));
  } else {
    policy = parse_policy(policy_document, {options.lenient});
    digest = policy_digest(policy_document);
  }
  const RuleSet ruleset = compile_rules(policy.policy);

  auto t = Clock::now();
  LoadResult loaded = load_package(package_dir, {options.lenient});
  const double load_ms = ms_since(t);

  Report report = scan_loaded(loaded.package, ruleset, std::move(digest), options.jobs);
  report.warnings = std::move(policy.warnings);
  report.warnings.insert(report.warnings.end(), loaded.warnings.begin(), loaded.warnings.end());
  report.stats.load_ms = load_ms;
  report.stats.total_ms = ms_since(start);
  return report;
}

Report scan_package(const std::filesystem::path& package_dir,
                    const std::filesystem::path& policy_path, const ScanOptions& options) {
  return scan_package_with_policy(package_dir, read_file(policy_path), options);
}

int exit_code_for(const Report& report, std::optional<Severity> fail_on) {
  const Severity floor = fail_on.value_or(Severity::low);
  const bool hit = std::any_of(report.findings.begin(), report.findings.end(),
                               [&](const Finding& f) { return f.severity >= floor; });
  return hit ? 1 : 0;
}

}  // namespace metascanner
