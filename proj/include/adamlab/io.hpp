#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace adamlab {

/// Writes `content` to `path` via a sibling temporary file and rename(2), so
/// readers never observe a partial file. Throws IoError.
void atomic_write(const std::string& path, std::string_view content);

/// Whole-file read. Throws IoError.
std::string read_file(const std::string& path);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t x);

/// Minimal CSV table builder with fixed columns.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  CsvTable& row();
  CsvTable& add(double x);
  CsvTable& add(std::int64_t x);
  CsvTable& add(std::uint64_t x);
  CsvTable& add(int x) { return add(static_cast<std::int64_t>(x)); }
  CsvTable& add(std::string_view s);

  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace adamlab
