#include "json_util.hpp"

#include <algorithm>

namespace metascanner::detail {

json parse_json_document(std::string_view text, const std::string& file) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(file, "byte " + std::to_string(e.byte), e.what());
  }
}

Cursor Cursor::child(std::string_view key) const {
  const auto& obj = object();
  auto it = obj.find(std::string(key));
  if (it == obj.end()) fail("missing key '" + std::string(key) + "'");
  return Cursor(*it, *ctx_, pointer_ + "/" + std::string(key));
}

Cursor Cursor::element(std::size_t i) const {
  return Cursor(array().at(i), *ctx_, pointer_ + "/" + std::to_string(i));
}

bool Cursor::has(std::string_view key) const {
  return object().contains(std::string(key));
}

void Cursor::fail(const std::string& what) const {
  throw ParseError(ctx_->file, pointer_.empty() ? "/" : pointer_, what);
}

void Cursor::invalid(const std::string& what) const {
  throw ValidationError(ctx_->file + ": " + (pointer_.empty() ? "/" : pointer_) + ": " + what);
}

const json& Cursor::object() const {
  if (!value_->is_object()) fail("expected object");
  return *value_;
}

const json& Cursor::array() const {
  if (!value_->is_array()) fail("expected array");
  return *value_;
}

std::string Cursor::string() const {
  if (!value_->is_string()) fail("expected string");
  return value_->get<std::string>();
}

double Cursor::number() const {
  if (!value_->is_number()) fail("expected number");
  return value_->get<double>();
}

long long Cursor::integer() const {
  if (!value_->is_number_integer()) fail("expected integer");
  return value_->get<long long>();
}

bool Cursor::boolean() const {
  if (!value_->is_boolean()) fail("expected boolean");
  return value_->get<bool>();
}

std::vector<std::string> Cursor::string_list() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < array().size(); ++i) out.push_back(element(i).string());
  return out;
}

std::vector<double> Cursor::number_list() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < array().size(); ++i) out.push_back(element(i).number());
  return out;
}

void Cursor::check_keys(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [key, _] : object().items()) {
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
    const std::string where = ctx_->file + ": " + (pointer_.empty() ? "/" : pointer_);
    if (!ctx_->lenient) throw ValidationError(where + ": unknown key '" + key + "'");
    if (ctx_->warnings) ctx_->warnings->push_back(where + ": ignoring unknown key '" + key + "'");
  }
}

}  // namespace metascanner::detail
