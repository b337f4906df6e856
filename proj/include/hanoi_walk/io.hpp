#pragma once

/**
 * @file io.hpp
 * @brief File formats shared by the CLI: CSV tables, fit JSON and run manifests.
 */

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <ctime>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hanoi_walk/experiments.hpp"
#include "hanoi_walk/fitting.hpp"

namespace hanoi_walk {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "1.0.0";

/// Plain comma-separated table with a header row. No quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace detail

inline CsvTable read_csv(std::istream& is) {
  CsvTable table;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("CSV input is empty");
  detail::strip_cr(line);
  table.header = detail::split_csv_line(line);
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != table.header.size()) {
      throw std::runtime_error("CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                               " fields, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

/// Thrown when a requested CSV column is absent.
class MissingColumnError : public std::invalid_argument {
 public:
  explicit MissingColumnError(const std::string& name)
      : std::invalid_argument("CSV has no column named '" + name + "'") {}
};

struct FitInput {
  std::vector<FitPoint> points;
  int min_n = 0;
  int max_n = 0;
};

/**
 * Pulls (N, column) pairs out of a scaling table, keeping rows with n >= min_n.
 * Rows where the value is not positive are skipped; fit() needs y > 0.
 */
inline FitInput fit_points_from_table(const CsvTable& table, const std::string& column, int min_n = 0) {
  const auto value_col = table.column(column);
  if (!value_col) throw MissingColumnError(column);
  const auto N_col = table.column("N");
  if (!N_col) throw MissingColumnError("N");
  const auto n_col = table.column("n");

  FitInput input;
  bool first = true;
  for (const auto& row : table.rows) {
    const double N = std::stod(row[*N_col]);
    const int n = n_col ? std::stoi(row[*n_col]) : static_cast<int>(std::lround(std::log2(N)));
    if (n < min_n) continue;
    const double y = std::stod(row[*value_col]);
    if (!(y > 0.0)) continue;
    input.points.push_back({N, y});
    if (first) {
      input.min_n = input.max_n = n;
      first = false;
    } else {
      input.min_n = std::min(input.min_n, n);
      input.max_n = std::max(input.max_n, n);
    }
  }
  return input;
}

inline ScalingRow scaling_row_from_fields(const CsvTable& table, const std::vector<std::string>& row) {
  auto get = [&](const char* name) -> const std::string& {
    const auto idx = table.column(name);
    if (!idx) throw MissingColumnError(name);
    return row[*idx];
  };
  ScalingRow r;
  r.kind = parse_network_kind(get("kind"));
  r.mode = parse_coin_mode(get("mode"));
  r.n = std::stoi(get("n"));
  r.N = std::stoll(get("N"));
  r.l = std::stod(get("l"));
  r.t_peak = std::stoull(get("t_peak"));
  r.p_peak = std::stod(get("p_peak"));
  r.rounds = std::stoull(get("rounds"));
  r.total_steps = std::stoull(get("total_steps"));
  r.raw_scaling = std::stod(get("raw_scaling"));
  return r;
}

inline std::vector<ScalingRow> read_scaling_csv(std::istream& is) {
  const CsvTable table = read_csv(is);
  std::vector<ScalingRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& row : table.rows) rows.push_back(scaling_row_from_fields(table, row));
  return rows;
}

inline nlohmann::ordered_json fit_to_json(const FitResult& result, int min_n, int max_n) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["model"] = std::string(to_string(result.model));
  j["a"] = result.amplitude;
  j["b"] = result.exponent;
  j["r2"] = result.r_squared;
  j["n_points"] = result.point_count;
  j["min_n"] = min_n;
  j["max_n"] = max_n;
  return j;
}

/**
 * Describes how an output file was produced. `parameters` holds every flag
 * that affects the output; re-running with them reproduces the data byte for
 * byte. The timestamp is informational only and lives outside the data files.
 */
struct RunManifest {
  std::string command;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  bool deterministic = true;
  std::string version = kVersion;
  std::string timestamp;

  /// Current UTC time, or SOURCE_DATE_EPOCH when set (reproducible builds convention).
  static std::string now_utc() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
      t = static_cast<std::time_t>(std::stoll(epoch));
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    j["parameters"] = parameters;
    j["deterministic"] = deterministic;
    j["version"] = version;
    j["timestamp"] = timestamp;
    return j;
  }

  static RunManifest from_json(const nlohmann::ordered_json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.parameters = j.at("parameters");
    m.deterministic = j.value("deterministic", true);
    m.version = j.value("version", std::string{});
    m.timestamp = j.value("timestamp", std::string{});
    return m;
  }
};

}  // namespace hanoi_walk
