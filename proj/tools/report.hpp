#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace adamlab::cli {

enum class Format { Csv, Json };

using Cell = std::variant<std::monostate, double, std::int64_t, std::uint64_t, bool, std::string,
                          std::vector<double>>;

// Column-major reports are written as CSV (lists joined with ';') or as a
// JSON array of objects keyed by column name.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  Table(std::string name, std::vector<std::string> columns);
  Table& row();
  Table& operator<<(Cell c);
};

template <typename T>
Cell maybe(const std::optional<T>& x) {
  if (!x) return std::monostate{};
  return Cell(*x);
}

struct Artifact {
  std::string file;
  std::string content;
};

std::string to_csv(const Table& t);
nlohmann::ordered_json to_json(const Table& t);
nlohmann::ordered_json to_json(const Cell& c);
Artifact render(const Table& t, Format f);

/// One JSON object per line.
Artifact json_lines(const std::string& file, const std::vector<nlohmann::ordered_json>& records);

struct RunInfo {
  std::string experiment;
  std::uint64_t seed = 0;
  bool seeded = false;
  std::string config_hash;
  Format format = Format::Json;
};

/// Writes every artifact atomically under `dir`, then manifest.json.
void emit(const std::string& dir, const std::vector<Artifact>& artifacts, const RunInfo& info);

extern const char* const kVersion;

}  // namespace adamlab::cli
