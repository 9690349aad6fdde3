#include "metascanner/report.hpp"

#include <chrono>
#include <ctime>

#include "json_util.hpp"

namespace metascanner {

namespace {

using detail::json;

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& ch : out) {
    if (ch >= 'a' && ch <= 'z') ch = static_cast<char>(ch - 'a' + 'A');
  }
  return out;
}

std::string_view ansi_color(Severity s) {
  switch (s) {
    case Severity::critical: return "\x1b[1;35m";
    case Severity::high: return "\x1b[1;31m";
    case Severity::medium: return "\x1b[33m";
    case Severity::low: return "\x1b[36m";
    case Severity::info: return "\x1b[2m";
  }
  return "";
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json summary_of(const Report& r) {
  json by_severity = json::object();
  for (Severity s : {Severity::critical, Severity::high, Severity::medium, Severity::low,
                     Severity::info}) {
    by_severity[std::string(to_string(s))] = 0;
  }
  json by_rule = json::object();
  for (const auto& f : r.findings) {
    by_severity[std::string(to_string(f.severity))] =
        by_severity[std::string(to_string(f.severity))].get<int>() + 1;
    const std::string rule(to_string(f.rule_id));
    by_rule[rule] = by_rule.value(rule, 0) + 1;
  }
  return {{"total", r.findings.size()}, {"by_severity", by_severity}, {"by_rule", by_rule}};
}

std::string render_json(const Report& r, const RenderOptions& opts) {
  json findings = json::array();
  for (const auto& f : r.findings) {
    findings.push_back({{"rule_id", to_string(f.rule_id)},
                        {"severity", to_string(f.severity)},
                        {"subjects", f.subjects},
                        {"evidence", f.evidence},
                        {"message", f.message}});
  }
  json stats = {{"node_count", r.stats.node_count},
                {"script_count", r.stats.script_count},
                {"texture_count", r.stats.texture_count}};
  json doc = {{"schema", kReportSchema},
              {"package_id", r.package_id},
              {"policy_digest", r.policy_digest},
              {"findings", findings},
              {"stats", stats},
              {"summary", summary_of(r)},
              {"warnings", r.warnings}};
  if (opts.timestamps) {
    doc["generated_at"] = utc_now();
    doc["stats"]["timings_ms"] = {{"load", r.stats.load_ms},     {"library", r.stats.library_ms},
                                  {"script", r.stats.script_ms}, {"object", r.stats.object_ms},
                                  {"qr", r.stats.qr_ms},         {"total", r.stats.total_ms}};
  }
  return doc.dump(2) + "\n";
}

std::string render_text(const Report& r, const RenderOptions& opts) {
  std::string out;
  for (const auto& f : r.findings) {
    std::string tag = "[" + upper(to_string(f.severity)) + "]";
    if (opts.color) tag = std::string(ansi_color(f.severity)) + tag + "\x1b[0m";
    std::string subjects;
    for (const auto& s : f.subjects) subjects += (subjects.empty() ? "" : ", ") + s;
    out += tag + " " + std::string(to_string(f.rule_id)) + " " + subjects + ": " + f.message + "\n";
  }
  out += r.package_id + ": " + std::to_string(r.findings.size()) + " finding(s)";
  if (!r.findings.empty()) {
    std::string parts;
    for (Severity s : {Severity::critical, Severity::high, Severity::medium, Severity::low,
                       Severity::info}) {
      int n = 0;
      for (const auto& f : r.findings) n += f.severity == s;
      if (n) parts += (parts.empty() ? "" : ", ") + std::to_string(n) + " " + std::string(to_string(s));
    }
    out += " (" + parts + ")";
  }
  if (opts.timestamps) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " in %.1f ms", r.stats.total_ms);
    out += buf;
  }
  return out + "\n";
}

}  // namespace

std::string render_report(const Report& report, ReportFormat format, const RenderOptions& options) {
  return format == ReportFormat::json ? render_json(report, options) : render_text(report, options);
}

}  // namespace metascanner
