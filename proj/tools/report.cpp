#include "report.hpp"

#include "adamlab/errors.hpp"
#include "adamlab/io.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <stdexcept>

namespace adamlab::cli {

const char* const kVersion = ADAMLAB_VERSION;

Table::Table(std::string n, std::vector<std::string> cols) : name(std::move(n)), columns(std::move(cols)) {}

Table& Table::row() {
  rows.emplace_back();
  rows.back().reserve(columns.size());
  return *this;
}

Table& Table::operator<<(Cell c) {
  if (rows.empty() || rows.back().size() == columns.size())
    throw std::logic_error("table '" + name + "': row is full or missing");
  rows.back().push_back(std::move(c));
  return *this;
}

std::string to_csv(const Table& t) {
  CsvTable csv(t.columns);
  for (const auto& r : t.rows) {
    if (r.size() != t.columns.size()) throw std::logic_error("table '" + t.name + "': short row");
    csv.row();
    for (const auto& c : r) {
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
              csv.add(std::string_view{});
            } else if constexpr (std::is_same_v<T, bool>) {
              csv.add(std::string_view(x ? "true" : "false"));
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
              std::string s;
              for (double v : x) s += (s.empty() ? "" : ";") + format_double(v);
              csv.add(std::string_view(s));
            } else if constexpr (std::is_same_v<T, std::string>) {
              csv.add(std::string_view(x));
            } else {
              csv.add(x);
            }
          },
          c);
    }
  }
  return csv.str();
}

nlohmann::ordered_json to_json(const Cell& c) {
  return std::visit(
      [](const auto& x) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(x)) return nullptr;
          return x;
        } else {
          return x;
        }
      },
      c);
}

nlohmann::ordered_json to_json(const Table& t) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) {
    if (r.size() != t.columns.size()) throw std::logic_error("table '" + t.name + "': short row");
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < r.size(); ++k) obj[t.columns[k]] = to_json(r[k]);
    out.push_back(std::move(obj));
  }
  return out;
}

Artifact render(const Table& t, Format f) {
  if (f == Format::Csv) return {t.name + ".csv", to_csv(t)};
  return {t.name + ".json", to_json(t).dump(2) + "\n"};
}

Artifact json_lines(const std::string& file, const std::vector<nlohmann::ordered_json>& records) {
  std::string s;
  for (const auto& r : records) s += r.dump() + "\n";
  return {file, s};
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void emit(const std::string& dir, const std::vector<Artifact>& artifacts, const RunInfo& info) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());

  nlohmann::ordered_json manifest;
  manifest["tool"] = "adamlab";
  manifest["version"] = kVersion;
  manifest["experiment"] = info.experiment;
  manifest["seed"] = info.seeded ? nlohmann::ordered_json(info.seed) : nlohmann::ordered_json(nullptr);
  manifest["config_hash"] = info.config_hash;
  manifest["format"] = info.format == Format::Csv ? "csv" : "json";
  manifest["created"] = utc_timestamp();
  auto files = nlohmann::ordered_json::array();
  for (const auto& a : artifacts) {
    atomic_write((std::filesystem::path(dir) / a.file).string(), a.content);
    files.push_back({{"file", a.file}, {"bytes", a.content.size()}, {"fnv1a64", hex64(fnv1a64(a.content))}});
  }
  manifest["artifacts"] = std::move(files);
  atomic_write((std::filesystem::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace adamlab::cli
