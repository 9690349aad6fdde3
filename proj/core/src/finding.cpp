#include "metascanner/finding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

namespace metascanner {

bool report_order_less(const Finding& a, const Finding& b) {
  const std::string empty;
  const std::string& sa = a.subjects.empty() ? empty : a.subjects.front();
  const std::string& sb = b.subjects.empty() ? empty : b.subjects.front();
  // Severity descending; the rest ascending.
  const std::string_view ra = to_string(a.rule_id);
  const std::string_view rb = to_string(b.rule_id);
  return std::tie(b.severity, ra, sa, a.subjects, a.message, a.evidence) <
         std::tie(a.severity, rb, sb, b.subjects, b.message, b.evidence);
}

void sort_findings(std::vector<Finding>& findings) {
  std::sort(findings.begin(), findings.end(), report_order_less);
}

std::string format_decimal(double value, int digits) {
  if (value == 0.0 || std::abs(value) < 0.5 * std::pow(10.0, -digits)) value = 0.0;  // no "-0.0000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

}  // namespace metascanner
