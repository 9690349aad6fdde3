#include <gtest/gtest.h>

#include "metascanner/errors.hpp"
#include "metascanner/policy.hpp"
#include "test_support.hpp"

namespace ms = metascanner;

namespace {

std::string validation_message(const std::string& doc) {
  try {
    ms::parse_policy(doc);
  } catch (const ms::ValidationError& e) {
    return e.what();
  }
  return "no error";
}

}  // namespace

TEST(ParsePolicy, EmptyDocumentEnablesEveryRule) {
  const auto p = ms::parse_policy("{}").policy;
  EXPECT_EQ(p.schema_version, 1);
  ASSERT_EQ(p.rules.size(), 10u);
  for (ms::RuleId id : ms::kRuleCatalog) {
    EXPECT_TRUE(p.rules.at(id).enabled);
    EXPECT_EQ(p.rules.at(id).severity, ms::default_severity(id));
  }
  EXPECT_EQ(p, ms::Policy::defaults());
}

TEST(ParsePolicy, NegativeAlphaThresholdIsRejected) {
  EXPECT_THROW(ms::parse_policy(R"({"thresholds":{"alpha_invisible":-0.1}})"), ms::ValidationError);
}

TEST(ParsePolicy, UnknownRuleIdIsNamed) {
  const std::string msg = validation_message(R"({"rules":{"XX-9":{"enabled":false}}})");
  EXPECT_NE(msg.find("XX-9"), std::string::npos) << msg;
}

TEST(ParsePolicy, RangeChecks) {
  EXPECT_THROW(ms::parse_policy(R"({"thresholds":{"iou_colocated":1.5}})"), ms::ValidationError);
  EXPECT_THROW(ms::parse_policy(R"({"thresholds":{"normal_angle_max":190}})"), ms::ValidationError);
  EXPECT_THROW(ms::parse_policy(R"({"thresholds":{"view_distances":[]}})"), ms::ValidationError);
  EXPECT_THROW(ms::parse_policy(R"({"rules":{"CJ-1":{"severity":"extreme"}}})"), ms::ValidationError);
  EXPECT_THROW(ms::parse_policy(R"({"schema_version":2})"), ms::ValidationError);
}

TEST(ParsePolicy, MalformedJsonIsParseError) {
  EXPECT_THROW(ms::parse_policy("{\"rules\": "), ms::ParseError);
}

TEST(ParsePolicy, LenientModeWarnsOnUnknownKeys) {
  const std::string doc = R"({"colour":"red"})";
  EXPECT_THROW(ms::parse_policy(doc), ms::ValidationError);
  const auto r = ms::parse_policy(doc, {.lenient = true});
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.policy, ms::Policy::defaults());
}

TEST(ParsePolicy, SerializeRoundTripIsIdempotent) {
  const auto p = ms::parse_policy(R"({"rules":{"CJ-1":{"enabled":false},"LIB-2":{"severity":"info"}},
      "thresholds":{"alpha_invisible":0.2,"view_distances":[1.5]},
      "url_policy":{"allow_domains":["Shop.Example"],"require_https":false},
      "library_policy":{"blocklist":["evil-lib"],"allowlist":[{"name":"ui","version":"1",
        "sha256":"0000000000000000000000000000000000000000000000000000000000000000"}]}})")
                     .policy;
  const std::string once = ms::serialize_policy(p);
  const auto again = ms::parse_policy(once).policy;
  EXPECT_EQ(again, p);
  EXPECT_EQ(ms::serialize_policy(again), once);
}

TEST(ParsePolicy, ShippedDefaultPolicyMatchesBuiltInDefaults) {
  const std::string text = testing_support::read_text(METASCANNER_DEFAULT_POLICY);
  EXPECT_EQ(ms::parse_policy(text).policy, ms::Policy::defaults());
  EXPECT_EQ(text, ms::serialize_policy(ms::Policy::defaults()));
}

TEST(CompileRules, DefaultPolicyHasTenRules) {
  EXPECT_EQ(ms::compile_rules(ms::Policy::defaults()).size(), 10u);
}

TEST(CompileRules, DisablingClickjackingLeavesEight) {
  const auto p = ms::parse_policy(R"({"rules":{"CJ-1":{"enabled":false},"CJ-2":{"enabled":false}}})");
  const auto rs = ms::compile_rules(p.policy);
  EXPECT_EQ(rs.size(), 8u);
  EXPECT_FALSE(rs.enabled(ms::RuleId::CJ_1));
  EXPECT_FALSE(rs.enabled(ms::RuleId::CJ_2));
  for (const auto& r : rs.rules_for(ms::ScannerKind::object)) {
    EXPECT_NE(r.id, ms::RuleId::CJ_1);
    EXPECT_NE(r.id, ms::RuleId::CJ_2);
  }
}

TEST(CompileRules, Deterministic) {
  const auto p = ms::parse_policy(R"({"rules":{"AQ-2":{"severity":"critical"}}})").policy;
  const auto a = ms::compile_rules(p);
  EXPECT_EQ(a, ms::compile_rules(p));
  EXPECT_EQ(a.severity(ms::RuleId::AQ_2), ms::Severity::critical);
}

TEST(CompileRules, RulesAreInCatalogOrderAndRoutedToOneScanner) {
  const auto rs = ms::compile_rules(ms::Policy::defaults());
  std::size_t routed = 0;
  for (auto s : {ms::ScannerKind::object, ms::ScannerKind::library, ms::ScannerKind::script,
                 ms::ScannerKind::qr}) {
    routed += rs.rules_for(s).size();
  }
  EXPECT_EQ(routed, 10u);
  for (std::size_t i = 0; i < rs.rules().size(); ++i) EXPECT_EQ(rs.rules()[i].id, ms::kRuleCatalog[i]);
}

TEST(RuleIds, TextRoundTrip) {
  for (ms::RuleId id : ms::kRuleCatalog) EXPECT_EQ(ms::parse_rule_id(ms::to_string(id)), id);
  EXPECT_FALSE(ms::parse_rule_id("XX-9"));
}
