#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "innolab/harness/records.hpp"

namespace innolab {

inline constexpr const char* kMissing = "—";

namespace detail {

inline std::string cell(double v, int precision = 5) {
  if (!std::isfinite(v)) {
    return kMissing;
  }
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

/// Width in terminal columns, counting a UTF-8 sequence as one.
inline std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

}  // namespace detail

/// Prints the summary table of all rows.
inline void print_table(const std::vector<ResultRow>& rows, std::ostream& out) {
  const std::vector<std::string> header = {"model", "n", "H_hat", "H_se", "E_hat", "E_se", "gap", "verdict"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({r.model.empty() ? kMissing : r.model, std::isinf(r.n) ? "inf" : detail::cell(r.n),
                     detail::cell(r.h_hat), detail::cell(r.h_se, 2), detail::cell(r.e_hat), detail::cell(r.e_se, 2),
                     detail::cell(r.gap), r.verdict.empty() ? kMissing : r.verdict});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t j = 0; j < header.size(); ++j) {
    width[j] = header[j].size();
    for (const auto& row : cells) {
      width[j] = std::max(width[j], detail::display_width(row[j]));
    }
  }
  const auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      out << row[j] << std::string(width[j] - detail::display_width(row[j]) + (j + 1 < row.size() ? 2 : 0), ' ');
    }
    out << "\n";
  };
  emit(header);
  for (const auto& row : cells) {
    emit(row);
  }
}

/// Writes curve_<metric>.csv files (model, n, value) into `dir`; returns their paths.
inline std::vector<std::filesystem::path> write_curves(const std::vector<ResultRow>& rows,
                                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, double ResultRow::*>> metrics = {
      {"H_hat", &ResultRow::h_hat}, {"E_hat", &ResultRow::e_hat},         {"gap", &ResultRow::gap},
      {"ess", &ResultRow::ess},     {"norm_mean", &ResultRow::norm_mean},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, field] : metrics) {
    const auto path = dir / ("curve_" + name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw ConfigurationError("cannot write '" + path.string() + "'");
    }
    out << "model,n," << name << "\n";
    for (const auto& r : rows) {
      out << r.model << "," << detail::format_level(r.n) << "," << detail::csv_number(r.*field) << "\n";
    }
    written.push_back(path);
  }
  return written;
}

/// Every results.csv under `dir`, in path order.
[[nodiscard]] inline std::vector<std::filesystem::path> find_results(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir)) {
    throw ConfigurationError("no such directory '" + dir.string() + "'");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "results.csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Table on `out`, curves under `dir`/curves.
inline std::size_t report(const std::filesystem::path& dir, std::ostream& out) {
  std::vector<ResultRow> rows;
  for (const auto& file : find_results(dir)) {
    auto more = read_results(file);
    rows.insert(rows.end(), more.begin(), more.end());
  }
  if (rows.empty()) {
    throw UsageError("no results.csv found under '" + dir.string() + "'");
  }
  print_table(rows, out);
  write_curves(rows, dir / "curves");
  return rows.size();
}

}  // namespace innolab
