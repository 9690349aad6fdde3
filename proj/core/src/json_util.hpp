#pragma once

// Schema helpers for the strict JSON documents (package, policy, scripts).
// Type mismatches raise ParseError with a JSON pointer; unknown keys raise
// ValidationError in strict mode or are collected as warnings otherwise.

#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "metascanner/errors.hpp"

namespace metascanner::detail {

using nlohmann::json;

struct DocContext {
  std::string file;
  bool lenient = false;
  std::vector<std::string>* warnings = nullptr;
};

json parse_json_document(std::string_view text, const std::string& file);

class Cursor {
 public:
  Cursor(const json& value, const DocContext& ctx, std::string pointer = "")
      : value_(&value), ctx_(&ctx), pointer_(std::move(pointer)) {}

  const json& value() const { return *value_; }
  const std::string& pointer() const { return pointer_; }
  const DocContext& ctx() const { return *ctx_; }

  Cursor child(std::string_view key) const;
  Cursor element(std::size_t i) const;
  bool has(std::string_view key) const;

  [[noreturn]] void fail(const std::string& what) const;
  [[noreturn]] void invalid(const std::string& what) const;

  const json& object() const;
  const json& array() const;
  std::string string() const;
  double number() const;
  long long integer() const;
  bool boolean() const;
  std::vector<std::string> string_list() const;
  std::vector<double> number_list() const;

  /// Rejects (or warns about) keys outside `allowed`.
  void check_keys(std::initializer_list<std::string_view> allowed) const;

 private:
  const json* value_;
  const DocContext* ctx_;
  std::string pointer_;
};

}  // namespace metascanner::detail
