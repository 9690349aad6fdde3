#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "metascanner/bench.hpp"
#include "metascanner/errors.hpp"
#include "metascanner/parallel.hpp"
#include "metascanner/pipeline.hpp"
#include "metascanner/policy.hpp"
#include "metascanner/synth.hpp"

namespace ms = metascanner;

namespace {

constexpr int kExitError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ms::IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw ms::IoError("cannot write " + path);
}

bool color_wanted(const std::string& out_path) {
  const char* no_color = std::getenv("NO_COLOR");
  if (no_color && *no_color) return false;
  return out_path.empty() && isatty(STDOUT_FILENO);
}

struct ScanArgs {
  std::string package;
  std::string policy;
  std::string format = "json";
  std::string out;
  std::string fail_on = "low";
  bool lenient = false;
  bool timestamps = false;
  unsigned jobs = ms::default_jobs();
};

int run_scan(const ScanArgs& a) {
  const auto fail_on = ms::parse_severity(a.fail_on);
  if (!fail_on) throw ms::ValidationError("unknown severity '" + a.fail_on + "'");
  const ms::Report report =
      ms::scan_package(a.package, a.policy, {a.lenient, std::max(1u, a.jobs)});
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  const auto format = a.format == "text" ? ms::ReportFormat::text : ms::ReportFormat::json;
  ms::RenderOptions opts;
  opts.timestamps = a.timestamps;
  opts.color = format == ms::ReportFormat::text && color_wanted(a.out);
  write_output(a.out, ms::render_report(report, format, opts));
  return ms::exit_code_for(report, fail_on);
}

int run_synth(const std::string& name, const std::string& out, int count) {
  if (name == "corpus") {
    ms::CorpusOptions opts;
    opts.count = count;
    const auto paths = ms::synthesize_corpus(out, opts);
    std::cerr << "wrote " << paths.size() << " package(s) under " << out << "\n";
    return 0;
  }
  if (name == "attack-corpus" || name == "attack-corpus-twins") {
    ms::WorldPackage pkg = ms::build_attack_corpus(name == "attack-corpus-twins");
    if (std::filesystem::exists(out) && !std::filesystem::is_empty(out)) {
      throw ms::IoError("output directory " + out + " is not empty");
    }
    ms::save_package(pkg, out);
    std::cerr << "wrote " << name << " to " << out << "\n";
    return 0;
  }
  const auto spec = ms::parse_fixture_name(name);
  if (!spec) throw ms::ValidationError("unknown fixture '" + name + "'");
  ms::synthesize_fixture(*spec, out);
  std::cerr << "wrote " << ms::fixture_name(*spec) << " to " << out << "\n";
  return 0;
}

int run_bench(const std::string& dir, const std::string& policy, const std::string& format,
              unsigned jobs) {
  const ms::BenchResult result = ms::bench_corpus(dir, read_file(policy), std::max(1u, jobs));
  for (const auto& s : result.skipped) {
    std::cerr << "warning: skipped " << s.package << ": " << s.reason << "\n";
  }
  std::cout << (format == "json" ? ms::render_bench_json(result) : ms::render_bench_table(result));
  return 0;
}

int run_policy_check(const std::string& path) {
  const std::string doc = read_file(path);
  const auto parsed = ms::parse_policy(doc);
  const ms::RuleSet rules = ms::compile_rules(parsed.policy);
  std::cout << path << ": ok, " << rules.size() << " of " << ms::kRuleCatalog.size()
            << " rules enabled, " << ms::policy_digest(doc) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static scanner for deceptive VR world packages"};
  app.require_subcommand(1);

  ScanArgs scan;
  auto* scan_cmd = app.add_subcommand("scan", "Scan a world package");
  scan_cmd->add_option("package", scan.package, "Package directory")->required();
  scan_cmd->add_option("--policy", scan.policy, "Policy file")->required();
  scan_cmd->add_option("--format", scan.format, "Report format")
      ->check(CLI::IsMember({"json", "text"}));
  scan_cmd->add_option("--out", scan.out, "Write the report to a file");
  scan_cmd->add_option("--fail-on", scan.fail_on, "Exit 1 at or above this severity")
      ->check(CLI::IsMember({"info", "low", "medium", "high", "critical"}));
  scan_cmd->add_flag("--lenient", scan.lenient, "Downgrade unknown keys to warnings");
  scan_cmd->add_option("--jobs", scan.jobs, "Worker threads")->check(CLI::PositiveNumber);
  scan_cmd->add_flag("--timestamps", scan.timestamps, "Include timings in the report");

  std::string synth_name;
  std::string synth_out;
  int corpus_count = 38;
  auto* synth_cmd = app.add_subcommand("synth", "Write an attack fixture, benign twin or corpus");
  synth_cmd->add_option("attack", synth_name,
                        "Attack name, benign-twin-of(<attack>), attack-corpus[-twins] or corpus")
      ->required();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--count", corpus_count, "Packages in a corpus")
      ->check(CLI::PositiveNumber);

  std::string bench_dir;
  std::string bench_policy;
  std::string bench_format = "table";
  unsigned bench_jobs = ms::default_jobs();
  auto* bench_cmd = app.add_subcommand("bench", "Scan every package in a directory");
  bench_cmd->add_option("dir", bench_dir, "Corpus directory")->required();
  bench_cmd->add_option("--policy", bench_policy, "Policy file")->required();
  bench_cmd->add_option("--format", bench_format, "Output format")
      ->check(CLI::IsMember({"table", "json"}));
  bench_cmd->add_option("--jobs", bench_jobs, "Packages scanned concurrently")
      ->check(CLI::PositiveNumber);

  std::string policy_file;
  auto* policy_cmd = app.add_subcommand("policy", "Policy utilities");
  policy_cmd->require_subcommand(1);
  auto* check_cmd = policy_cmd->add_subcommand("check", "Validate a policy file");
  check_cmd->add_option("file", policy_file, "Policy file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*scan_cmd) return run_scan(scan);
    if (*synth_cmd) return run_synth(synth_name, synth_out, corpus_count);
    if (*bench_cmd) return run_bench(bench_dir, bench_policy, bench_format, bench_jobs);
    if (*check_cmd) return run_policy_check(policy_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
