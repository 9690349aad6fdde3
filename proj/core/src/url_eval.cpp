#include "metascanner/url_eval.hpp"

#include <algorithm>
#include <cctype>

#include "metascanner/script_scanner.hpp"

namespace metascanner {

std::string_view to_string(UrlClass c) {
  switch (c) {
    case UrlClass::Allowed: return "Allowed";
    case UrlClass::Blocked: return "Blocked";
    case UrlClass::Suspicious: return "Suspicious";
    case UrlClass::Unknown: return "Unknown";
  }
  return "?";
}

std::string_view to_string(UrlReason r) {
  switch (r) {
    case UrlReason::blocklisted: return "blocklisted";
    case UrlReason::not_allowlisted: return "not_allowlisted";
    case UrlReason::raw_ip: return "raw_ip";
    case UrlReason::shortener: return "shortener";
    case UrlReason::non_https: return "non_https";
    case UrlReason::userinfo_present: return "userinfo_present";
    case UrlReason::non_ascii_host: return "non_ascii_host";
    case UrlReason::dynamic: return "dynamic";
  }
  return "?";
}

bool UrlEvaluation::has(UrlReason r) const {
  return std::find(reasons.begin(), reasons.end(), r) != reasons.end();
}

namespace {

char lower(char ch) {
  return (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : ch;
}

bool valid_scheme(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '+' || ch == '-' || ch == '.';
  });
}

bool is_ipv4(std::string_view host) {
  int parts = 0;
  std::size_t i = 0;
  while (i <= host.size()) {
    std::size_t j = host.find('.', i);
    if (j == std::string_view::npos) j = host.size();
    const std::string_view part = host.substr(i, j - i);
    if (part.empty() || part.size() > 3 ||
        !std::all_of(part.begin(), part.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
      return false;
    }
    if (std::stoi(std::string(part)) > 255) return false;
    ++parts;
    i = j + 1;
  }
  return parts == 4;
}

bool is_raw_ip(std::string_view host) {
  if (!host.empty() && host.front() == '[') return true;  // IPv6 literal
  if (is_ipv4(host)) return true;
  // Bare 32-bit integer hosts ("http://3405803783/") resolve as IPv4 too.
  return !host.empty() && host.size() <= 10 &&
         std::all_of(host.begin(), host.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
}

bool domain_match(std::string_view host, std::string_view domain) {
  if (host == domain) return true;
  return host.size() > domain.size() && host.ends_with(domain) &&
         host[host.size() - domain.size() - 1] == '.';
}

bool matches_any(std::string_view host, const std::set<std::string>& domains) {
  return std::any_of(domains.begin(), domains.end(),
                     [&](const std::string& d) { return domain_match(host, d); });
}

bool non_ascii(std::string_view host) {
  if (std::any_of(host.begin(), host.end(),
                  [](char ch) { return static_cast<unsigned char>(ch) >= 0x80; })) {
    return true;
  }
  // Punycode labels are the ASCII form of an internationalized name.
  return host.starts_with("xn--") || host.find(".xn--") != std::string_view::npos;
}

}  // namespace

bool looks_like_url(std::string_view text) {
  const auto colon = text.find(':');
  return colon != std::string_view::npos && valid_scheme(text.substr(0, colon));
}

std::optional<ParsedUrl> parse_url(std::string_view url) {
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) return std::nullopt;
  ParsedUrl out;
  const std::string_view scheme = url.substr(0, sep);
  if (!valid_scheme(scheme)) return std::nullopt;
  out.scheme.reserve(scheme.size());
  for (char ch : scheme) out.scheme.push_back(lower(ch));

  std::string_view rest = url.substr(sep + 3);
  const auto end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, end);
  out.rest = end == std::string_view::npos ? "" : std::string(rest.substr(end));

  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    out.has_userinfo = true;
    out.userinfo = std::string(authority.substr(0, at));
    authority = authority.substr(at + 1);
  }
  std::string_view host = authority;
  if (!host.empty() && host.front() == '[') {
    const auto close = host.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    if (close + 1 < host.size()) {
      if (host[close + 1] != ':') return std::nullopt;
      out.port = std::string(host.substr(close + 2));
    }
    host = host.substr(0, close + 1);
  } else if (const auto colon = host.rfind(':'); colon != std::string_view::npos) {
    out.port = std::string(host.substr(colon + 1));
    host = host.substr(0, colon);
  }
  if (!host.empty() && host.back() == '.') host.remove_suffix(1);
  if (host.empty()) return std::nullopt;
  out.host.reserve(host.size());
  for (char ch : host) out.host.push_back(lower(ch));
  return out;
}

UrlEvaluation evaluate_url(std::string_view url, const UrlPolicy& policy) {
  UrlEvaluation ev;
  ev.url = std::string(url);
  if (url == kDynamicUrl) {
    ev.verdict = policy.dynamic_is_suspicious ? UrlClass::Suspicious : UrlClass::Unknown;
    ev.reasons = {UrlReason::dynamic};
    return ev;
  }
  const auto parsed = parse_url(url);
  if (!parsed) {
    // Unparseable URLs share the non-ASCII-host bucket.
    ev.verdict = UrlClass::Suspicious;
    ev.reasons = {UrlReason::non_ascii_host};
    return ev;
  }
  const std::string& host = parsed->host;
  const bool https_ok = !policy.require_https || parsed->scheme == "https";

  std::vector<UrlReason> heuristics;
  if (is_raw_ip(host)) heuristics.push_back(UrlReason::raw_ip);
  if (matches_any(host, policy.shortener_domains)) heuristics.push_back(UrlReason::shortener);
  if (!https_ok) heuristics.push_back(UrlReason::non_https);
  if (parsed->has_userinfo) heuristics.push_back(UrlReason::userinfo_present);
  if (non_ascii(host)) heuristics.push_back(UrlReason::non_ascii_host);

  if (matches_any(host, policy.block_domains)) {
    ev.verdict = UrlClass::Blocked;
    ev.reasons.push_back(UrlReason::blocklisted);
    ev.reasons.insert(ev.reasons.end(), heuristics.begin(), heuristics.end());
  } else if (policy.allow_domains.count(host) && https_ok) {
    ev.verdict = UrlClass::Allowed;
  } else if (!heuristics.empty()) {
    ev.verdict = UrlClass::Suspicious;
    ev.reasons = std::move(heuristics);
  } else {
    ev.verdict = UrlClass::Unknown;
    ev.reasons = {UrlReason::not_allowlisted};
  }
  return ev;
}

}  // namespace metascanner
