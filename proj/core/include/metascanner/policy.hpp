#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace metascanner {

inline constexpr int kPolicySchemaVersion = 1;

enum class RuleId { CJ_1, CJ_2, DOR_1, OITM_1, AQ_1, AQ_2, SCR_1, SCR_2, LIB_1, LIB_2 };

inline constexpr std::array<RuleId, 10> kRuleCatalog = {
    RuleId::CJ_1,  RuleId::CJ_2,  RuleId::DOR_1, RuleId::OITM_1, RuleId::AQ_1,
    RuleId::AQ_2,  RuleId::SCR_1, RuleId::SCR_2, RuleId::LIB_1,  RuleId::LIB_2};

std::string_view to_string(RuleId id);
std::optional<RuleId> parse_rule_id(std::string_view text);

enum class Severity { info, low, medium, high, critical };

std::string_view to_string(Severity s);
std::optional<Severity> parse_severity(std::string_view text);

/// Which scanner evaluates a rule.
enum class ScannerKind { object, library, script, qr };

ScannerKind scanner_of(RuleId id);
Severity default_severity(RuleId id);

struct RuleConfig {
  bool enabled = true;
  Severity severity = Severity::medium;
  friend bool operator==(const RuleConfig&, const RuleConfig&) = default;
};

struct Thresholds {
  double alpha_invisible = 0.05;
  double iou_colocated = 0.9;
  double size_ratio_tolerance = 0.1;
  double coplanar_epsilon = 1e-3;   // meters
  double normal_angle_max = 5.0;    // degrees
  std::vector<double> view_distances{1.0, 2.0, 4.0};  // meters
  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

struct UrlPolicy {
  std::set<std::string> allow_domains{"example.com"};
  std::set<std::string> block_domains{"malicious.example"};
  std::set<std::string> shortener_domains{"bit.ly",  "buff.ly", "cutt.ly",    "goo.gl",
                                          "is.gd",   "ow.ly",   "rebrand.ly", "shorturl.at",
                                          "t.co",    "tinyurl.com"};
  bool require_https = true;
  /// Treat non-constant ("<dynamic>") script URLs as Suspicious.
  bool dynamic_is_suspicious = true;
  friend bool operator==(const UrlPolicy&, const UrlPolicy&) = default;
};

struct LibraryIdentity {
  std::string name;
  std::string version;
  std::string sha256;
  friend auto operator<=>(const LibraryIdentity&, const LibraryIdentity&) = default;
};

struct LibraryPolicy {
  std::set<LibraryIdentity> allowlist;
  std::set<std::string> blocklist;
  friend bool operator==(const LibraryPolicy&, const LibraryPolicy&) = default;
};

struct Policy {
  int schema_version = kPolicySchemaVersion;
  std::map<RuleId, RuleConfig> rules;  // always holds all catalog entries
  Thresholds thresholds;
  UrlPolicy url_policy;
  LibraryPolicy library_policy;

  /// Every rule enabled at its catalog-default severity.
  static Policy defaults();
  friend bool operator==(const Policy&, const Policy&) = default;
};

struct PolicyParseOptions {
  bool lenient = false;
};

struct PolicyParseResult {
  Policy policy;
  std::vector<std::string> warnings;
};

/// Parses a policy document; missing sections take documented defaults.
/// Throws ParseError or ValidationError.
PolicyParseResult parse_policy(std::string_view document, const PolicyParseOptions& options = {});

/// Fully explicit canonical JSON form of a policy.
std::string serialize_policy(const Policy& policy);

/// Executable rule configuration: exactly the enabled rules of a policy,
/// with resolved severities and thresholds. Immutable once compiled.
class RuleSet {
 public:
  struct Rule {
    RuleId id;
    Severity severity;
    friend bool operator==(const Rule&, const Rule&) = default;
  };

  bool enabled(RuleId id) const;
  /// Severity of an enabled rule; default severity for disabled ones.
  Severity severity(RuleId id) const;
  std::size_t size() const { return rules_.size(); }
  const std::vector<Rule>& rules() const { return rules_; }
  std::vector<Rule> rules_for(ScannerKind scanner) const;

  const Thresholds& thresholds() const { return thresholds_; }
  const UrlPolicy& url_policy() const { return url_policy_; }
  const LibraryPolicy& library_policy() const { return library_policy_; }

  friend bool operator==(const RuleSet&, const RuleSet&) = default;

 private:
  friend RuleSet compile_rules(const Policy& policy);
  std::vector<Rule> rules_;  // catalog order
  Thresholds thresholds_;
  UrlPolicy url_policy_;
  LibraryPolicy library_policy_;
};

RuleSet compile_rules(const Policy& policy);

}  // namespace metascanner
