#include "config.hpp"

#include "adamlab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace adamlab::cli {

ConfigMap::ConfigMap(YAML::Node node, std::shared_ptr<const std::string> source, std::string path)
    : node_(std::move(node)), source_(std::move(source)), path_(std::move(path)) {
  if (node_.IsDefined() && !node_.IsNull() && !node_.IsMap())
    throw ConfigError(where(node_.Mark()) + ": '" + (path_.empty() ? "<root>" : path_) +
                      "' must be a mapping");
}

ConfigMap ConfigMap::parse(const std::string& text, const std::string& source) {
  auto src = std::make_shared<const std::string>(source);
  try {
    return ConfigMap(YAML::Load(text), src, "");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
}

std::string ConfigMap::where(const YAML::Mark& mark) const {
  if (mark.is_null()) return *source_;
  return *source_ + ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
}

bool ConfigMap::has(const std::string& key) const {
  const YAML::Node& map = node_;
  return map.IsMap() && map[key].IsDefined();
}

void ConfigMap::fail(const std::string& key, const std::string& message) const {
  YAML::Mark mark = node_.Mark();
  const YAML::Node& map = node_;
  if (has(key)) mark = map[key].Mark();
  const std::string full = path_.empty() ? key : path_ + "." + key;
  throw ConfigError(where(mark) + ": '" + full + "': " + message);
}

YAML::Node ConfigMap::take(const std::string& key) {
  used_.insert(key);
  if (!node_.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
  const YAML::Node& map = node_;
  YAML::Node n = map[key];
  if (n.IsDefined() && n.IsNull()) fail(key, "value is empty");
  return n;
}

std::string ConfigMap::scalar(const YAML::Node& n, const std::string& key) const {
  if (!n.IsScalar()) fail(key, "expected a scalar value");
  return n.Scalar();
}

double ConfigMap::to_number(const YAML::Node& n, const std::string& key) const {
  const std::string s = scalar(n, key);
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(x))
    throw ConfigError(where(n.Mark()) + ": '" + (path_.empty() ? key : path_ + "." + key) +
                      "': expected a finite number, got '" + s + "'");
  return x;
}

std::uint64_t ConfigMap::to_count(const YAML::Node& n, const std::string& key) const {
  const std::string s = scalar(n, key);
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(where(n.Mark()) + ": '" + (path_.empty() ? key : path_ + "." + key) +
                      "': expected a non-negative integer, got '" + s + "'");
  return x;
}

double ConfigMap::number(const std::string& key, double fallback) {
  const YAML::Node n = take(key);
  return n.IsDefined() ? to_number(n, key) : fallback;
}

std::uint64_t ConfigMap::count(const std::string& key, std::uint64_t fallback) {
  const YAML::Node n = take(key);
  return n.IsDefined() ? to_count(n, key) : fallback;
}

std::optional<std::uint64_t> ConfigMap::optional_count(const std::string& key) {
  const YAML::Node n = take(key);
  if (!n.IsDefined()) return std::nullopt;
  return to_count(n, key);
}

bool ConfigMap::flag(const std::string& key, bool fallback) {
  const YAML::Node n = take(key);
  if (!n.IsDefined()) return fallback;
  const std::string s = scalar(n, key);
  if (s == "true") return true;
  if (s == "false") return false;
  fail(key, "expected true or false, got '" + s + "'");
}

std::string ConfigMap::text(const std::string& key, const std::string& fallback) {
  const YAML::Node n = take(key);
  return n.IsDefined() ? scalar(n, key) : fallback;
}

std::string ConfigMap::choice(const std::string& key, const std::string& fallback,
                              const std::vector<std::string>& allowed) {
  const std::string s = text(key, fallback);
  for (const auto& a : allowed)
    if (a == s) return s;
  std::string list;
  for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
  fail(key, "unknown value '" + s + "' (expected one of: " + list + ")");
}

std::vector<double> ConfigMap::numbers(const std::string& key, std::vector<double> fallback) {
  const YAML::Node n = take(key);
  if (!n.IsDefined()) return fallback;
  if (!n.IsSequence()) fail(key, "expected a list");
  std::vector<double> out;
  for (const auto& item : n) out.push_back(to_number(item, key));
  return out;
}

std::vector<std::uint64_t> ConfigMap::counts(const std::string& key,
                                             std::vector<std::uint64_t> fallback) {
  const YAML::Node n = take(key);
  if (!n.IsDefined()) return fallback;
  if (!n.IsSequence()) fail(key, "expected a list");
  std::vector<std::uint64_t> out;
  for (const auto& item : n) out.push_back(to_count(item, key));
  return out;
}

std::vector<std::string> ConfigMap::texts(const std::string& key,
                                          std::vector<std::string> fallback) {
  const YAML::Node n = take(key);
  if (!n.IsDefined()) return fallback;
  if (!n.IsSequence()) fail(key, "expected a list");
  std::vector<std::string> out;
  for (const auto& item : n) out.push_back(scalar(item, key));
  return out;
}

ConfigMap ConfigMap::map(const std::string& key) {
  const YAML::Node n = take(key);
  const std::string path = path_.empty() ? key : path_ + "." + key;
  if (n.IsDefined() && !n.IsMap()) fail(key, "expected a mapping");
  return ConfigMap(n.IsDefined() ? n : YAML::Node(YAML::NodeType::Undefined), source_, path);
}

void ConfigMap::forbid(const std::string& key, const std::string& reason) const {
  if (has(key)) fail(key, reason);
}

void ConfigMap::restrict_to(const std::vector<std::string>& keys, const std::string& context) const {
  if (!node_.IsMap()) return;
  for (const auto& kv : node_) {
    const std::string key = kv.first.Scalar();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError(where(kv.first.Mark()) + ": unknown key '" + key + "' for " + context);
  }
}

void ConfigMap::finish() const {
  if (!node_.IsMap()) return;
  for (const auto& kv : node_) {
    const std::string key = kv.first.Scalar();
    if (!used_.count(key)) {
      const std::string full = path_.empty() ? key : path_ + "." + key;
      throw ConfigError(where(kv.first.Mark()) + ": unknown key '" + full + "'");
    }
  }
}

}  // namespace adamlab::cli
