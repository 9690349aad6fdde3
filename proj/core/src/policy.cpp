#include "metascanner/policy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "json_util.hpp"
#include "metascanner/errors.hpp"

namespace metascanner {

using detail::Cursor;
using detail::DocContext;
using detail::json;

std::string_view to_string(RuleId id) {
  switch (id) {
    case RuleId::CJ_1: return "CJ-1";
    case RuleId::CJ_2: return "CJ-2";
    case RuleId::DOR_1: return "DOR-1";
    case RuleId::OITM_1: return "OITM-1";
    case RuleId::AQ_1: return "AQ-1";
    case RuleId::AQ_2: return "AQ-2";
    case RuleId::SCR_1: return "SCR-1";
    case RuleId::SCR_2: return "SCR-2";
    case RuleId::LIB_1: return "LIB-1";
    case RuleId::LIB_2: return "LIB-2";
  }
  return "?";
}

std::optional<RuleId> parse_rule_id(std::string_view text) {
  for (RuleId id : kRuleCatalog) {
    if (to_string(id) == text) return id;
  }
  return std::nullopt;
}

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::info: return "info";
    case Severity::low: return "low";
    case Severity::medium: return "medium";
    case Severity::high: return "high";
    case Severity::critical: return "critical";
  }
  return "?";
}

std::optional<Severity> parse_severity(std::string_view text) {
  for (Severity s : {Severity::info, Severity::low, Severity::medium, Severity::high,
                     Severity::critical}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

ScannerKind scanner_of(RuleId id) {
  switch (id) {
    case RuleId::CJ_1:
    case RuleId::CJ_2:
    case RuleId::DOR_1:
    case RuleId::OITM_1: return ScannerKind::object;
    case RuleId::AQ_1:
    case RuleId::AQ_2: return ScannerKind::qr;
    case RuleId::SCR_1:
    case RuleId::SCR_2: return ScannerKind::script;
    case RuleId::LIB_1:
    case RuleId::LIB_2: return ScannerKind::library;
  }
  return ScannerKind::object;
}

Severity default_severity(RuleId id) {
  switch (id) {
    case RuleId::CJ_1: return Severity::high;
    case RuleId::CJ_2: return Severity::high;
    case RuleId::DOR_1: return Severity::medium;
    case RuleId::OITM_1: return Severity::critical;
    case RuleId::AQ_1: return Severity::high;
    case RuleId::AQ_2: return Severity::medium;
    case RuleId::SCR_1: return Severity::medium;
    case RuleId::SCR_2: return Severity::high;
    case RuleId::LIB_1: return Severity::high;
    case RuleId::LIB_2: return Severity::low;
  }
  return Severity::medium;
}

Policy Policy::defaults() {
  Policy p;
  for (RuleId id : kRuleCatalog) p.rules[id] = RuleConfig{true, default_severity(id)};
  return p;
}

namespace {

std::set<std::string> parse_hosts(const Cursor& c) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < c.array().size(); ++i) {
    const Cursor e = c.element(i);
    std::string host = e.string();
    std::transform(host.begin(), host.end(), host.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (host.empty() || host.find("://") != std::string::npos ||
        host.find('/') != std::string::npos) {
      e.invalid("expected a bare hostname, got '" + e.string() + "'");
    }
    out.insert(std::move(host));
  }
  return out;
}

double fraction(const Cursor& c) {
  const double v = c.number();
  if (!(v >= 0.0 && v <= 1.0)) c.invalid("value must be a fraction in [0, 1]");
  return v;
}

Thresholds parse_thresholds(const Cursor& c) {
  c.check_keys({"alpha_invisible", "iou_colocated", "size_ratio_tolerance", "coplanar_epsilon",
                "normal_angle_max", "view_distances"});
  Thresholds t;
  if (c.has("alpha_invisible")) t.alpha_invisible = fraction(c.child("alpha_invisible"));
  if (c.has("iou_colocated")) t.iou_colocated = fraction(c.child("iou_colocated"));
  if (c.has("size_ratio_tolerance")) {
    t.size_ratio_tolerance = fraction(c.child("size_ratio_tolerance"));
  }
  if (c.has("coplanar_epsilon")) {
    const Cursor e = c.child("coplanar_epsilon");
    t.coplanar_epsilon = e.number();
    if (!(t.coplanar_epsilon >= 0.0) || !std::isfinite(t.coplanar_epsilon)) {
      e.invalid("coplanar_epsilon must be a finite distance >= 0");
    }
  }
  if (c.has("normal_angle_max")) {
    const Cursor e = c.child("normal_angle_max");
    t.normal_angle_max = e.number();
    if (!(t.normal_angle_max >= 0.0 && t.normal_angle_max <= 180.0)) {
      e.invalid("normal_angle_max must be in [0, 180] degrees");
    }
  }
  if (c.has("view_distances")) {
    const Cursor e = c.child("view_distances");
    t.view_distances = e.number_list();
    if (t.view_distances.empty()) e.invalid("view_distances must be nonempty");
    for (double d : t.view_distances) {
      if (!(d > 0.0) || !std::isfinite(d)) e.invalid("view distances must be positive");
    }
  }
  return t;
}

UrlPolicy parse_url_policy(const Cursor& c) {
  c.check_keys({"allow_domains", "block_domains", "shortener_domains", "require_https",
                "dynamic_is_suspicious"});
  UrlPolicy u;
  if (c.has("allow_domains")) u.allow_domains = parse_hosts(c.child("allow_domains"));
  if (c.has("block_domains")) u.block_domains = parse_hosts(c.child("block_domains"));
  if (c.has("shortener_domains")) u.shortener_domains = parse_hosts(c.child("shortener_domains"));
  if (c.has("require_https")) u.require_https = c.child("require_https").boolean();
  if (c.has("dynamic_is_suspicious")) {
    u.dynamic_is_suspicious = c.child("dynamic_is_suspicious").boolean();
  }
  return u;
}

bool is_lower_hex64(std::string_view s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char ch) {
           return (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f');
         });
}

LibraryPolicy parse_library_policy(const Cursor& c) {
  c.check_keys({"allowlist", "blocklist"});
  LibraryPolicy l;
  if (c.has("allowlist")) {
    const Cursor list = c.child("allowlist");
    for (std::size_t i = 0; i < list.array().size(); ++i) {
      const Cursor e = list.element(i);
      e.check_keys({"name", "version", "sha256"});
      LibraryIdentity id{e.child("name").string(), e.child("version").string(),
                         e.child("sha256").string()};
      if (!is_lower_hex64(id.sha256)) {
        e.child("sha256").invalid("sha256 must be 64 lowercase hex chars");
      }
      l.allowlist.insert(std::move(id));
    }
  }
  if (c.has("blocklist")) {
    for (auto& name : c.child("blocklist").string_list()) l.blocklist.insert(std::move(name));
  }
  return l;
}

}  // namespace

PolicyParseResult parse_policy(std::string_view document, const PolicyParseOptions& options) {
  PolicyParseResult result;
  result.policy = Policy::defaults();
  DocContext ctx{"policy", options.lenient, &result.warnings};
  const json doc = detail::parse_json_document(document, ctx.file);
  const Cursor c(doc, ctx);
  c.object();
  c.check_keys({"schema_version", "rules", "thresholds", "url_policy", "library_policy"});

  Policy& p = result.policy;
  if (c.has("schema_version")) {
    const Cursor v = c.child("schema_version");
    if (v.integer() != kPolicySchemaVersion) {
      v.invalid("unsupported schema_version " + std::to_string(v.integer()));
    }
  }
  if (c.has("rules")) {
    const Cursor rules = c.child("rules");
    for (const auto& [key, _] : rules.object().items()) {
      const auto id = parse_rule_id(key);
      if (!id) rules.invalid("unknown rule id '" + key + "'");
      const Cursor r = rules.child(key);
      r.check_keys({"enabled", "severity"});
      RuleConfig& cfg = p.rules[*id];
      if (r.has("enabled")) cfg.enabled = r.child("enabled").boolean();
      if (r.has("severity")) {
        const Cursor s = r.child("severity");
        const auto sev = parse_severity(s.string());
        if (!sev) s.invalid("unknown severity '" + s.string() + "'");
        cfg.severity = *sev;
      }
    }
  }
  if (c.has("thresholds")) p.thresholds = parse_thresholds(c.child("thresholds"));
  if (c.has("url_policy")) p.url_policy = parse_url_policy(c.child("url_policy"));
  if (c.has("library_policy")) p.library_policy = parse_library_policy(c.child("library_policy"));
  return result;
}

std::string serialize_policy(const Policy& p) {
  json rules = json::object();
  for (const auto& [id, cfg] : p.rules) {
    rules[std::string(to_string(id))] = {{"enabled", cfg.enabled},
                                         {"severity", to_string(cfg.severity)}};
  }
  const Thresholds& t = p.thresholds;
  json allow = json::array();
  for (const auto& l : p.library_policy.allowlist) {
    allow.push_back({{"name", l.name}, {"version", l.version}, {"sha256", l.sha256}});
  }
  const json doc = {
      {"schema_version", p.schema_version},
      {"rules", rules},
      {"thresholds",
       {{"alpha_invisible", t.alpha_invisible},
        {"iou_colocated", t.iou_colocated},
        {"size_ratio_tolerance", t.size_ratio_tolerance},
        {"coplanar_epsilon", t.coplanar_epsilon},
        {"normal_angle_max", t.normal_angle_max},
        {"view_distances", t.view_distances}}},
      {"url_policy",
       {{"allow_domains", p.url_policy.allow_domains},
        {"block_domains", p.url_policy.block_domains},
        {"shortener_domains", p.url_policy.shortener_domains},
        {"require_https", p.url_policy.require_https},
        {"dynamic_is_suspicious", p.url_policy.dynamic_is_suspicious}}},
      {"library_policy", {{"allowlist", allow}, {"blocklist", p.library_policy.blocklist}}},
  };
  return doc.dump(2) + "\n";
}

bool RuleSet::enabled(RuleId id) const {
  return std::any_of(rules_.begin(), rules_.end(), [id](const Rule& r) { return r.id == id; });
}

Severity RuleSet::severity(RuleId id) const {
  for (const auto& r : rules_) {
    if (r.id == id) return r.severity;
  }
  return default_severity(id);
}

std::vector<RuleSet::Rule> RuleSet::rules_for(ScannerKind scanner) const {
  std::vector<Rule> out;
  for (const auto& r : rules_) {
    if (scanner_of(r.id) == scanner) out.push_back(r);
  }
  return out;
}

RuleSet compile_rules(const Policy& policy) {
  RuleSet rs;
  for (RuleId id : kRuleCatalog) {
    auto it = policy.rules.find(id);
    const RuleConfig cfg = it != policy.rules.end() ? it->second
                                                    : RuleConfig{true, default_severity(id)};
    if (cfg.enabled) rs.rules_.push_back({id, cfg.severity});
  }
  rs.thresholds_ = policy.thresholds;
  rs.url_policy_ = policy.url_policy;
  rs.library_policy_ = policy.library_policy;
  return rs;
}

}  // namespace metascanner
