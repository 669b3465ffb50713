#include "shrinker/lab/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace shrinker::lab {

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", value);
  return buf;
}

void Table::add_column(std::string name, std::vector<double> values) {
  if (!columns.empty() && values.size() != rows()) {
    throw std::runtime_error("column " + name + " has " + std::to_string(values.size()) +
                             " rows, table has " + std::to_string(rows()));
  }
  header.push_back(std::move(name));
  columns.push_back(std::move(values));
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  if (table.header.size() != table.columns.size()) {
    throw std::runtime_error("table header does not match its columns");
  }
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (table.columns[c].size() != table.rows()) {
      throw std::runtime_error("column " + table.header[c] + " has " +
                               std::to_string(table.columns[c].size()) + " rows, table has " +
                               std::to_string(table.rows()));
    }
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    out << (c ? "," : "") << table.header[c];
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const double v = table.columns[c][r];
      if (!std::isfinite(v)) {
        throw std::runtime_error("non-finite value in column " + table.header[c] + " of " +
                                 path.string());
      }
      out << (c ? "," : "") << format_number(v);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void Summary::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

void Summary::set(std::string key, double value) {
  if (std::isinf(value)) {
    set(std::move(key), std::string(value > 0 ? "inf" : "-inf"));
  } else {
    set(std::move(key), format_number(value));
  }
}

void Summary::set(std::string key, bool value) {
  set(std::move(key), std::string(value ? "true" : "false"));
}

void Summary::set(std::string key, std::size_t value) {
  set(std::move(key), std::to_string(value));
}

std::string Summary::get(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return {};
}

void Summary::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

}  // namespace

void write_svg(const std::filesystem::path& path, const Plot& plot) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape_xml(plot.title) << "</text>\n"
      << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
      << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
    svg << "<text x=\"" << px(fx) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
        << tick(fx) << "</text>\n"
        << "<text x=\"" << L - 6 << "\" y=\"" << py(fy) + 4 << "\" text-anchor=\"end\">"
        << tick(fy) << "</text>\n";
  }
  svg << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
      << escape_xml(plot.x_label) << "</text>\n"
      << "<text transform=\"translate(16," << H / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape_xml(plot.y_label) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    // Thin long series to about 2000 vertices.
    const std::size_t n = std::min(s.x.size(), s.y.size());
    const std::size_t stride = std::max<std::size_t>(1, n / 2000);
    for (std::size_t i = 0; i < n; i += stride) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    svg << "\"/>\n"
        << "<text x=\"" << W - R - 8 << "\" y=\"" << T + 16 + 16 * k
        << "\" text-anchor=\"end\" fill=\"" << color << "\">" << escape_xml(s.label)
        << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << svg.str();
}

std::vector<Vec2> read_point_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read point list " + path.string());
  std::vector<Vec2> points;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::vector<double> coords;
    double c;
    while (row >> c) coords.push_back(c);
    if (!row.eof()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": not a number");
    }
    if (coords.empty()) continue;
    if (coords.size() != 2) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 2 coordinates, got " +
                               std::to_string(coords.size()));
    }
    points.push_back({coords[0], coords[1]});
  }
  return points;
}

}  // namespace shrinker::lab
