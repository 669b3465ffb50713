#pragma once

// Artifact writers: comma-separated tables, key-value summaries, SVG line
// plots, and the plain-text point-list reader.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shrinker/numerics.hpp"

namespace shrinker::lab {

/// 17 significant digits, e.g. 1.5203469010662807e+00.
std::string format_number(double value);

/// Column-oriented table; every column must have the same length.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  void add_column(std::string name, std::vector<double> values);
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

/// Throws std::runtime_error on ragged columns, non-finite values or I/O failure.
void write_csv(const std::filesystem::path& path, const Table& table);

/// Ordered key = value record.
class Summary {
 public:
  void set(std::string key, std::string value);
  void set(std::string key, double value);
  void set(std::string key, bool value);
  void set(std::string key, std::size_t value);
  void set(std::string key, int value) { set(std::move(key), static_cast<double>(value)); }
  void set(std::string key, const char* value) { set(std::move(key), std::string(value)); }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  /// Value stored under key, or an empty string.
  std::string get(std::string_view key) const;

  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Non-finite points are skipped.
void write_svg(const std::filesystem::path& path, const Plot& plot);

/// One point per line, whitespace-separated coordinates; '#' starts a comment.
std::vector<Vec2> read_point_list(const std::filesystem::path& path);

}  // namespace shrinker::lab
