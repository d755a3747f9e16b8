#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace adamlab::cli {

// A YAML mapping read strictly: every key must be consumed by the caller
// before finish(), and every diagnostic carries file:line:column.
class ConfigMap {
 public:
  ConfigMap(YAML::Node node, std::shared_ptr<const std::string> source, std::string path);

  /// Parses `text`; an empty document yields an empty map.
  static ConfigMap parse(const std::string& text, const std::string& source);

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const;

  double number(const std::string& key, double fallback);
  std::uint64_t count(const std::string& key, std::uint64_t fallback);
  bool flag(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback);
  std::string choice(const std::string& key, const std::string& fallback,
                     const std::vector<std::string>& allowed);

  std::optional<std::uint64_t> optional_count(const std::string& key);
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback);
  std::vector<std::uint64_t> counts(const std::string& key, std::vector<std::uint64_t> fallback);
  std::vector<std::string> texts(const std::string& key, std::vector<std::string> fallback);

  /// Nested mapping; absent keys give an empty map at this map's position.
  ConfigMap map(const std::string& key);

  /// Throws ConfigError naming the first key that was never read.
  void finish() const;

  /// Rejects any key outside `keys` before anything is computed.
  void restrict_to(const std::vector<std::string>& keys, const std::string& context) const;

  /// Rejects the key if present, with `reason` in the diagnostic.
  void forbid(const std::string& key, const std::string& reason) const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  YAML::Node take(const std::string& key);
  std::string where(const YAML::Mark& mark) const;
  std::string scalar(const YAML::Node& n, const std::string& key) const;
  double to_number(const YAML::Node& n, const std::string& key) const;
  std::uint64_t to_count(const YAML::Node& n, const std::string& key) const;

  YAML::Node node_;
  std::shared_ptr<const std::string> source_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace adamlab::cli
