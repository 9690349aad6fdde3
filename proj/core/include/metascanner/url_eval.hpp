#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metascanner/policy.hpp"

namespace metascanner {

enum class UrlClass { Allowed, Blocked, Suspicious, Unknown };

enum class UrlReason {
  blocklisted,
  not_allowlisted,
  raw_ip,
  shortener,
  non_https,
  userinfo_present,
  non_ascii_host,
  dynamic,
};

std::string_view to_string(UrlClass c);
std::string_view to_string(UrlReason r);

struct UrlEvaluation {
  std::string url;
  UrlClass verdict = UrlClass::Unknown;
  std::vector<UrlReason> reasons;  // enum order, no duplicates

  bool has(UrlReason r) const;
  bool flagged() const { return verdict == UrlClass::Blocked || verdict == UrlClass::Suspicious; }
  friend bool operator==(const UrlEvaluation&, const UrlEvaluation&) = default;
};

struct ParsedUrl {
  std::string scheme;  // lowercased
  std::string userinfo;
  bool has_userinfo = false;
  std::string host;    // lowercased; brackets kept for IPv6 literals
  std::string port;
  std::string rest;    // path, query and fragment
};

/// Minimal scheme://[userinfo@]host[:port][/...] split. Returns nullopt for
/// strings without an authority component.
std::optional<ParsedUrl> parse_url(std::string_view url);

/// True when the text starts with an RFC 3986 scheme followed by ':'.
bool looks_like_url(std::string_view text);

/// Purely local verdict against the policy lists and heuristics.
UrlEvaluation evaluate_url(std::string_view url, const UrlPolicy& policy);

}  // namespace metascanner
