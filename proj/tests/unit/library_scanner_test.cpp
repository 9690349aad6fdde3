#include <gtest/gtest.h>

#include <algorithm>

#include "metascanner/library_scanner.hpp"

namespace ms = metascanner;

namespace {

const std::string kHashA(64, 'a');
const std::string kHashB(64, 'b');

ms::LibraryPolicy policy() {
  ms::LibraryPolicy p;
  p.allowlist.insert({"ui-kit", "1.2.0", kHashA});
  p.blocklist.insert("coin-miner");
  return p;
}

ms::LibraryScanResult scan(std::vector<ms::LibraryRef> libs) {
  ms::Manifest m;
  m.libraries = std::move(libs);
  return ms::scan_libraries(m, policy(), ms::compile_rules(ms::Policy::defaults()));
}

}  // namespace

TEST(ScanLibraries, ExactAllowlistTriple) {
  const auto r = scan({{"ui-kit", "1.2.0", kHashA}});
  EXPECT_EQ(r.verdicts[0].verdict, ms::LibraryClass::Allowed);
  EXPECT_TRUE(r.findings.empty());
}

TEST(ScanLibraries, SameReleaseDifferentHash) {
  const auto r = scan({{"ui-kit", "1.2.0", kHashB}});
  EXPECT_EQ(r.verdicts[0].verdict, ms::LibraryClass::HashMismatch);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].rule_id, ms::RuleId::LIB_1);
  EXPECT_EQ(r.findings[0].evidence.at("expected_sha256"), kHashA);
}

TEST(ScanLibraries, UnlistedName) {
  const auto r = scan({{"physics", "3.0", kHashA}});
  EXPECT_EQ(r.verdicts[0].verdict, ms::LibraryClass::Unknown);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].rule_id, ms::RuleId::LIB_2);
}

TEST(ScanLibraries, BlocklistBeatsAllowlist) {
  auto p = policy();
  p.allowlist.insert({"coin-miner", "1", kHashA});
  EXPECT_EQ(ms::classify_library({"coin-miner", "1", kHashA}, p), ms::LibraryClass::Blocked);
}

TEST(ScanLibraries, OtherVersionOfAllowlistedNameIsUnknown) {
  EXPECT_EQ(ms::classify_library({"ui-kit", "1.3.0", kHashA}, policy()), ms::LibraryClass::Unknown);
}

TEST(ScanLibraries, VerdictsIndependentOfManifestOrder) {
  std::vector<ms::LibraryRef> libs = {{"ui-kit", "1.2.0", kHashA},
                                      {"ui-kit", "1.2.0", kHashB},
                                      {"coin-miner", "0.1", kHashB},
                                      {"physics", "3.0", kHashA}};
  std::map<std::string, ms::LibraryClass> first;
  for (const auto& v : scan(libs).verdicts) first[v.ref.name + v.ref.sha256] = v.verdict;
  std::sort(libs.begin(), libs.end(), [](auto& a, auto& b) { return a.sha256 + a.name < b.sha256 + b.name; });
  do {
    const auto r = scan(libs);
    ASSERT_EQ(r.verdicts.size(), libs.size());
    for (std::size_t i = 0; i < libs.size(); ++i) {
      EXPECT_EQ(r.verdicts[i].ref, libs[i]);
      EXPECT_EQ(r.verdicts[i].verdict, first.at(libs[i].name + libs[i].sha256));
    }
  } while (std::next_permutation(libs.begin(), libs.end(), [](auto& a, auto& b) {
    return a.sha256 + a.name < b.sha256 + b.name;
  }));
}

TEST(ScanLibraries, DisabledRuleSuppressesFindingOnly) {
  auto p = ms::Policy::defaults();
  p.rules[ms::RuleId::LIB_2].enabled = false;
  ms::Manifest m;
  m.libraries = {{"physics", "3.0", kHashA}};
  const auto r = ms::scan_libraries(m, policy(), ms::compile_rules(p));
  EXPECT_TRUE(r.findings.empty());
  EXPECT_EQ(r.verdicts[0].verdict, ms::LibraryClass::Unknown);
}
