#pragma once

// Feature dataset CSV: header `t,f01,...,f37[,label]`, one window per row.
// Values are written with 9 significant digits.

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sicn/bgp/types.hpp"
#include "sicn/error.hpp"
#include "sicn/features/feature_vector.hpp"

namespace sicn::features {

struct FeatureTable {
  std::vector<FeatureVector> rows;
  bool has_labels = false;
};

inline std::string dataset_header(bool with_labels) {
  std::string h = "t";
  for (std::size_t i = 0; i < kFeatureCount; ++i) h += ',' + column_name(i);
  if (with_labels) h += ",label";
  return h;
}

/// Shortest text for `v` at 9 significant digits.
inline std::string format_value(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return std::string(buf, ptr);
}

/// Value as it reads back after a write/read cycle.
inline double quantize_value(double v) {
  const auto text = format_value(v);
  double out = 0;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return out;
}

inline void write_dataset(std::ostream& os, std::span<const FeatureVector> rows) {
  bool labeled = !rows.empty();
  for (const auto& r : rows) labeled = labeled && r.label.has_value();
  os << dataset_header(labeled) << '\n';
  std::string line;
  for (std::size_t row = 0; row < rows.size(); ++row) {
    const auto& r = rows[row];
    line = std::to_string(r.window_start);
    for (double v : r.values) {
      if (!std::isfinite(v)) throw ValidationError("dataset", "non-finite value in row " + std::to_string(row + 1));
      line += ',';
      line += format_value(v);
    }
    if (labeled) line += ',' + std::to_string(*r.label);
    os << line << '\n';
  }
}

/// Reads a dataset; the label column is optional. Errors name the 1-based
/// data row (the header is row 0).
inline FeatureTable read_dataset(std::istream& in) {
  FeatureTable table;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(0, "dataset is empty (missing header)");
  const auto header = bgp::detail::trim(line);
  if (header == dataset_header(true)) table.has_labels = true;
  else if (header != dataset_header(false)) throw ParseError(0, "dataset header mismatch");

  const std::size_t expected = 1 + kFeatureCount + (table.has_labels ? 1 : 0);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const auto body = bgp::detail::trim(line);
    if (body.empty()) continue;
    ++row;
    auto fail = [row](const std::string& msg) {
      return ParseError(row, "dataset row " + std::to_string(row) + ": " + msg);
    };
    std::vector<std::string_view> cells;
    std::string_view rest = body;
    for (auto at = rest.find(','); at != std::string_view::npos; at = rest.find(',')) {
      cells.push_back(rest.substr(0, at));
      rest.remove_prefix(at + 1);
    }
    cells.push_back(rest);
    if (cells.size() != expected)
      throw fail("expected " + std::to_string(expected) + " fields, got " + std::to_string(cells.size()));

    FeatureVector fv;
    auto t = bgp::detail::trim(cells[0]);
    auto [tp, tec] = std::from_chars(t.data(), t.data() + t.size(), fv.window_start);
    if (tec != std::errc{} || tp != t.data() + t.size()) throw fail("invalid window start");
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      auto cell = bgp::detail::trim(cells[i + 1]);
      double v = 0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || p != cell.data() + cell.size()) throw fail("invalid value in column " + column_name(i));
      if (!std::isfinite(v)) throw fail("non-finite value in column " + column_name(i));
      fv.values[i] = v;
    }
    if (table.has_labels) {
      auto cell = bgp::detail::trim(cells.back());
      int label = 0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
      if (ec != std::errc{} || p != cell.data() + cell.size()) throw fail("invalid label");
      fv.label = label;
    }
    table.rows.push_back(fv);
  }
  return table;
}

}  // namespace sicn::features
