#include <gtest/gtest.h>

#include <algorithm>

#include "metascanner/qr_scanner.hpp"
#include "metascanner/synth.hpp"
#include "test_support.hpp"

namespace ms = metascanner;
namespace ts = testing_support;

namespace {

ms::RuleSet defaults() { return ms::compile_rules(ms::Policy::defaults()); }

ms::QrScanResult scan(const ms::WorldPackage& pkg, const ms::RuleSet& rs = defaults(), unsigned jobs = 1) {
  const ms::SceneContext scene(pkg);
  return ms::scan_qr(scene, rs, jobs);
}

std::size_t count(const std::vector<ms::Finding>& fs, ms::RuleId id) {
  return static_cast<std::size_t>(
      std::count_if(fs.begin(), fs.end(), [&](const ms::Finding& f) { return f.rule_id == id; }));
}

ms::WorldPackage quishing(bool twin = false) {
  return ms::build_fixture({ms::AttackKind::avatar_quishing, twin});
}

ms::SceneNode& node(ms::WorldPackage& pkg, const std::string& id) {
  return *std::find_if(pkg.nodes.begin(), pkg.nodes.end(), [&](auto& n) { return n.id == id; });
}

}  // namespace

TEST(ScanQr, QuishingFixtureYieldsOneOfEach) {
  const auto r = scan(quishing());
  ASSERT_EQ(count(r.findings, ms::RuleId::AQ_1), 1u);
  ASSERT_EQ(count(r.findings, ms::RuleId::AQ_2), 1u);
  for (const auto& f : r.findings) {
    if (f.rule_id == ms::RuleId::AQ_1) {
      EXPECT_EQ(f.subjects, (std::vector<std::string>{"avatar-badge", "badge-qr"}));
      EXPECT_EQ(f.evidence.at("url"), "https://malicious.example/pay");
      EXPECT_EQ(f.evidence.at("url_class"), "Blocked");
    } else {
      EXPECT_EQ(f.subjects, (std::vector<std::string>{"avatar-badge", "menu-poster"}));
      EXPECT_EQ(f.evidence.at("offset_m"), "0.001000");
      EXPECT_EQ(f.evidence.at("world_payload"), "https://example.com/menu");
    }
  }
  EXPECT_EQ(r.symbols.size(), 2u);
}

TEST(ScanQr, BenignTwinIsClean) {
  const auto r = scan(quishing(true));
  EXPECT_TRUE(r.findings.empty());
  EXPECT_EQ(r.symbols.at("badge-qr").front().payload, "https://example.com/profile");
}

TEST(ScanQr, WorldOwnedOverlapIsNotAq2) {
  auto pkg = quishing();
  for (auto& n : pkg.nodes) n.owner = ms::WorldOwned{};
  EXPECT_EQ(count(scan(pkg).findings, ms::RuleId::AQ_2), 0u);
  EXPECT_EQ(count(scan(pkg).findings, ms::RuleId::AQ_1), 0u);
}

TEST(ScanQr, TiltedOverlayBeyondAngleLimitIsNotAq2) {
  auto pkg = quishing();
  node(pkg, "avatar-badge").transform.rotation = ms::Quat::from_axis_angle({0, 1, 0}, 0.2);  // ~11.5 deg
  EXPECT_EQ(count(scan(pkg).findings, ms::RuleId::AQ_2), 0u);
}

TEST(ScanQr, OverlayBehindPosterIsNotAq2) {
  auto pkg = quishing();
  node(pkg, "avatar-badge").transform.position.z = -0.601;  // 1 mm behind
  EXPECT_EQ(count(scan(pkg).findings, ms::RuleId::AQ_2), 0u);
}

TEST(ScanQr, SidewaysOffsetWithoutOverlapIsNotAq2) {
  auto pkg = quishing();
  node(pkg, "avatar-badge").transform.position.x = 0.6;  // adjacent, edges 0.1 m apart
  EXPECT_EQ(count(scan(pkg).findings, ms::RuleId::AQ_2), 0u);
}

TEST(ScanQr, DetachedAvatarQrWithoutOverlap) {
  auto pkg = quishing(true);
  node(pkg, "avatar-badge").transform.position = {3.0, 0.5, 0.0};
  const auto r = scan(pkg);
  ASSERT_EQ(count(r.findings, ms::RuleId::AQ_2), 1u);
  const auto& f = r.findings.front();
  EXPECT_EQ(f.subjects, (std::vector<std::string>{"avatar-badge", "avatar-root"}));
  EXPECT_EQ(f.evidence.at("detached_distance_m"), ms::format_decimal(std::sqrt(9.0 + 0.25), 3));
}

TEST(ScanQr, FindingsIndependentOfNodeOrder) {
  auto pkg = quishing();
  auto a = scan(pkg).findings;
  std::reverse(pkg.nodes.begin(), pkg.nodes.end());
  auto b = scan(pkg).findings;
  ms::sort_findings(a);
  ms::sort_findings(b);
  EXPECT_EQ(a, b);
}

TEST(ScanQr, DisabledRulesStillDecode) {
  auto p = ms::Policy::defaults();
  p.rules[ms::RuleId::AQ_1].enabled = false;
  const auto only_aq2 = scan(quishing(), ms::compile_rules(p));
  EXPECT_EQ(count(only_aq2.findings, ms::RuleId::AQ_1), 0u);
  EXPECT_EQ(count(only_aq2.findings, ms::RuleId::AQ_2), 1u);
  p.rules[ms::RuleId::AQ_2].enabled = false;
  const auto none = scan(quishing(), ms::compile_rules(p));
  EXPECT_TRUE(none.findings.empty());
  EXPECT_EQ(none.symbols.size(), 2u);
}

TEST(ScanQr, AllowlistedAvatarUrlIsNotAq1) {
  auto pkg = quishing();
  auto p = ms::Policy::defaults();
  p.url_policy.block_domains.clear();
  p.url_policy.allow_domains.insert("malicious.example");
  EXPECT_EQ(count(scan(pkg, ms::compile_rules(p)).findings, ms::RuleId::AQ_1), 0u);
}

TEST(ScanQr, ParallelDecodeMatchesSequential) {
  const auto pkg = quishing();
  const auto a = scan(pkg, defaults(), 1);
  const auto b = scan(pkg, defaults(), 8);
  EXPECT_EQ(a.symbols, b.symbols);
  EXPECT_EQ(a.findings, b.findings);
}
