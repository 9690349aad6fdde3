#pragma once

#include <map>
#include <string>
#include <vector>

#include "metascanner/policy.hpp"

namespace metascanner {

/// One detected threat. `subjects` name nodes, scripts, libraries or
/// textures; the first subject is the primary suspect.
struct Finding {
  RuleId rule_id = RuleId::CJ_1;
  Severity severity = Severity::medium;
  std::vector<std::string> subjects;
  std::map<std::string, std::string> evidence;
  std::string message;

  friend bool operator==(const Finding&, const Finding&) = default;
};

/// Report order: severity desc, rule id asc, first subject asc, then the
/// remaining fields so the order is total.
bool report_order_less(const Finding& a, const Finding& b);

void sort_findings(std::vector<Finding>& findings);

/// Fixed-point text for evidence values, so reports stay byte-stable.
std::string format_decimal(double value, int digits = 4);

}  // namespace metascanner
