// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "metascanner/bench.hpp"
#include "metascanner/errors.hpp"
#include "metascanner/geometry.hpp"
#include "metascanner/pipeline.hpp"
#include "metascanner/policy.hpp"
#include "metascanner/qr_codec.hpp"
#include "metascanner/script_scanner.hpp"
#include "metascanner/synth.hpp"
#include "qr_reference.hpp"
#include "random_inputs.hpp"
#include "raycast_oracle.hpp"
#include "taint_oracle.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
namespace ms = metascanner;
namespace qr = metascanner::qr;
namespace ts = testing_support;

namespace {

const fs::path kDefaultPolicy = METASCANNER_DEFAULT_POLICY;
const fs::path kQrRefDir = fs::path(METASCANNER_TEST_DATA_DIR) / "qr_reference";

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail = what;
    pass = false;
  }
};

struct Criterion {
  std::string name;
  double budget_s;  // 0 means untimed
  std::function<Outcome()> run;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::set<ms::RuleId> rules_in(const ms::Report& r) {
  std::set<ms::RuleId> out;
  for (const auto& f : r.findings) out.insert(f.rule_id);
  return out;
}

std::string json_of(const ms::Report& r) {
  return ms::render_report(r, ms::ReportFormat::json, {});
}

/// Defaults plus an allowlist entry whose hash the corpus library does not
/// match, so every rule has at least one finding to gate.
std::string gating_policy(ms::RuleId* disabled = nullptr) {
  auto p = ms::Policy::defaults();
  p.library_policy.allowlist.insert({"ui-toolkit", "2.1.0", std::string(64, 'c')});
  if (disabled) p.rules[*disabled].enabled = false;
  return ms::serialize_policy(p);
}

std::map<ms::AttackKind, std::set<ms::RuleId>> expected_families() {
  return {
      {ms::AttackKind::clickjacking_same_position, {ms::RuleId::CJ_1}},
      {ms::AttackKind::clickjacking_invisible, {ms::RuleId::CJ_2}},
      {ms::AttackKind::denial_of_raycasting, {ms::RuleId::DOR_1}},
      {ms::AttackKind::object_in_the_middle, {ms::RuleId::OITM_1}},
      {ms::AttackKind::avatar_quishing, {ms::RuleId::AQ_1, ms::RuleId::AQ_2}},
  };
}

Outcome attack_corpus() {
  Outcome out;
  ts::TempDir dir;
  int n = 0;
  for (const auto& [attack, family] : expected_families()) {
    for (bool twin : {false, true}) {
      const ms::FixtureSpec spec{attack, twin};
      const fs::path pkg = dir / ("p" + std::to_string(n++));
      ms::synthesize_fixture(spec, pkg);
      const auto report = ms::scan_package(pkg, kDefaultPolicy);
      const std::string name = ms::fixture_name(spec);
      if (twin) {
        out.require(report.findings.empty(),
                    name + " has " + std::to_string(report.findings.size()) + " finding(s)");
        continue;
      }
      const auto found = rules_in(report);
      for (ms::RuleId id : family) {
        out.require(found.count(id) > 0, name + " lacks " + std::string(ms::to_string(id)));
      }
    }
  }
  if (out.pass) out.detail = "5 attacks flagged, 5 twins clean";
  return out;
}

Outcome raycast_oracle() {
  Outcome out;
  std::mt19937_64 rng(0xacce55);
  int rays = 0;
  for (int scene = 0; scene < 10; ++scene) {
    const auto boxes = ts::random_collider_scene(rng, 50);
    for (int k = 0; k < 1000; ++k, ++rays) {
      const auto ray = ts::random_ray(rng);
      const auto got = ms::first_hit(ray, boxes);
      const auto want = oracle::first_hit(ray, boxes);
      const std::string where = "scene " + std::to_string(scene) + " ray " + std::to_string(k);
      out.require(got.has_value() == want.has_value(), where + ": hit/miss differs");
      if (got && want) {
        out.require(got->node_id == want->id, where + ": " + got->node_id + " vs " + want->id);
        out.require(std::abs(got->t - want->t) <= 1e-9, where + ": distance differs");
      }
    }
  }
  if (out.pass) out.detail = std::to_string(rays) + " rays agree";
  return out;
}

/// True when the data-flow graph, including variable write-to-read links,
/// contains a directed cycle.
bool has_flow_cycle(const ms::ScriptGraph& g) {
  const std::size_t n = g.nodes.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& e : g.edges) succ[e.from].push_back(e.to);
  for (std::size_t a = 0; a < n; ++a) {
    if (g.nodes[a].kind != ms::NodeKind::SetVariable) continue;
    for (std::size_t b = 0; b < n; ++b) {
      if (g.nodes[b].kind == ms::NodeKind::VariableRead &&
          g.nodes[b].attrs.at("name") == g.nodes[a].attrs.at("name")) {
        succ[a].push_back(b);
      }
    }
  }
  std::vector<int> color(n, 0);
  std::function<bool(std::size_t)> visit = [&](std::size_t v) {
    color[v] = 1;
    for (std::size_t w : succ[v]) {
      if (color[w] == 1 || (color[w] == 0 && visit(w))) return true;
    }
    color[v] = 2;
    return false;
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (color[v] == 0 && visit(v)) return true;
  }
  return false;
}

Outcome taint_oracle() {
  Outcome out;
  std::mt19937_64 rng(0x7a1e7);
  int cyclic = 0;
  for (int i = 0; i < 100; ++i) {
    const auto g = ts::random_script_graph(rng, 12);
    const std::string where = "graph " + std::to_string(i);
    if (has_flow_cycle(g)) ++cyclic;
    const auto got = ms::analyze_taint(g);
    const auto want = oracle::enumerate_taint(g);
    std::set<std::string> sinks;
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& p : got.paths) {
      sinks.insert(p.back());
      pairs.insert({p.front(), p.back()});
    }
    out.require(got.paths.empty() != want.any, where + ": reachability differs");
    out.require(sinks == want.sinks, where + ": sink set differs");
    out.require(pairs == want.pairs, where + ": source/sink pairs differ");
    out.require(got.iterations <= g.nodes.size() * std::max<std::size_t>(1, g.edges.size()),
                where + ": fixed point exceeded its bound");
  }
  out.require(cyclic > 0, "no cyclic graph was generated");
  if (out.pass) out.detail = "100 graphs agree, " + std::to_string(cyclic) + " cyclic";
  return out;
}

Outcome qr_reference() {
  Outcome out;
  const auto refs = oracle::load_qr_references(kQrRefDir, "byte-");
  out.require(refs.size() == 20, "expected 20 reference symbols, found " + std::to_string(refs.size()));
  if (!out.pass) return out;
  for (const auto& r : refs) {
    const auto symbols = qr::scan_texture(qr::render(r.matrix, 4, qr::kQuietZoneModules, r.name));
    const bool exact = symbols.size() == 1 && symbols[0].decode_ok &&
                       symbols[0].payload == r.payload && symbols[0].version == r.version &&
                       symbols[0].ec_level == r.level;
    out.require(exact, r.name + " did not decode exactly");
  }
  // Five format-information flips and five 30% data inversions.
  int rejected = 0;
  for (int i = 0; i < 10; ++i) {
    const auto& r = refs[static_cast<std::size_t>(i * 2)];
    qr::ModuleMatrix bad = r.matrix;
    if (i < 5) {
      const auto [row, col] = qr::format_primary_position(i * 3);
      bad.flip(row, col);
    } else {
      bad = ts::invert_data_modules(r.matrix, r.version, 0.30, static_cast<unsigned>(i));
    }
    const auto symbols = qr::scan_texture(qr::render(bad, 4, qr::kQuietZoneModules, r.name));
    const bool ok = symbols.size() == 1 && !symbols[0].decode_ok && symbols[0].payload.empty();
    out.require(ok, "corrupted " + r.name + " was not rejected");
    if (ok) ++rejected;
  }
  if (out.pass) out.detail = "20 decoded exactly, " + std::to_string(rejected) + " corrupted rejected";
  return out;
}

Outcome policy_gating(const fs::path& corpus) {
  Outcome out;
  const auto full = ms::scan_package_with_policy(corpus, gating_policy()).findings;
  for (ms::RuleId id : ms::kRuleCatalog) {
    const std::string name(ms::to_string(id));
    auto expected = full;
    expected.erase(std::remove_if(expected.begin(), expected.end(),
                                  [&](const ms::Finding& f) { return f.rule_id == id; }),
                   expected.end());
    out.require(expected.size() < full.size(), name + " never fires on the corpus");
    const auto got = ms::scan_package_with_policy(corpus, gating_policy(&id)).findings;
    out.require(got == expected, "disabling " + name + " changed other findings");
  }
  if (out.pass) out.detail = "10 rules gate exactly their own findings";
  return out;
}

Outcome determinism(const fs::path& corpus) {
  Outcome out;
  const std::string policy = ts::read_text(kDefaultPolicy);
  const auto a = json_of(ms::scan_package_with_policy(corpus, policy, {.jobs = 1}));
  const auto b = json_of(ms::scan_package_with_policy(corpus, policy, {.jobs = 1}));
  const auto c = json_of(ms::scan_package_with_policy(corpus, policy, {.jobs = 8}));
  out.require(a == b, "repeated runs differ");
  out.require(a == c, "jobs 1 and jobs 8 differ");
  if (out.pass) out.detail = std::to_string(a.size()) + " report bytes identical across runs and jobs";
  return out;
}

Outcome scale(const fs::path& corpus_dir, double* elapsed_s) {
  Outcome out;
  const auto start = Clock::now();
  const auto result = ms::bench_corpus(corpus_dir, ts::read_text(kDefaultPolicy), 1);
  *elapsed_s = seconds_since(start);
  out.require(result.rows.size() == 38, std::to_string(result.rows.size()) + " of 38 packages scanned");
  out.require(result.skipped.empty(), std::to_string(result.skipped.size()) + " package(s) skipped");
  std::size_t nodes = 0;
  for (const auto& row : result.rows) nodes += row.stats.node_count;
  if (out.pass) {
    std::ostringstream ss;
    ss << "38 packages, " << nodes << " nodes";
    out.detail = ss.str();
  }
  return out;
}

}  // namespace

int main() {
  try {
    ts::TempDir work;
    const fs::path corpus = work / "attack-corpus";
    ms::save_package(ms::build_attack_corpus(), corpus);
    const fs::path scale_dir = work / "scale";
    ms::synthesize_corpus(scale_dir);  // generation is not part of the timed scan

    double scale_s = 0.0;
    const std::vector<Criterion> criteria = {
        {"attack-corpus", 5.0, attack_corpus},
        {"raycast-oracle", 10.0, raycast_oracle},
        {"taint-oracle", 5.0, taint_oracle},
        {"qr-reference", 5.0, qr_reference},
        {"policy-gating", 0.0, [&] { return policy_gating(corpus); }},
        {"determinism", 0.0, [&] { return determinism(corpus); }},
        {"scale", 10.0, [&] { return scale(scale_dir, &scale_s); }},
    };

    int failures = 0;
    for (const auto& c : criteria) {
      const auto start = Clock::now();
      Outcome o = c.run();
      const double took = c.name == "scale" ? scale_s : seconds_since(start);
      if (c.budget_s > 0 && took >= c.budget_s) {
        o.pass = false;
        o.detail = "took " + std::to_string(took) + " s, budget " + std::to_string(c.budget_s) + " s";
      }
      if (!o.pass) ++failures;
      std::printf("%s %-15s %7.3f s  %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), took,
                  o.detail.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
}
