#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sicn/bgp/types.hpp"
#include "sicn/error.hpp"
#include "sicn/features/feature_vector.hpp"

namespace sicn::features {

/// Combined label space. The numeric value is the label used in combined
/// ("flat") datasets.
enum class IncidentClass : int {
  normal = 0,
  code_red_i = 1,
  nimda = 2,
  slammer = 3,
  outage_r1r2 = 4,
  outage_r5r6 = 5,
};

inline constexpr std::size_t kIncidentClassCount = 6;

inline constexpr std::array<std::string_view, kIncidentClassCount> kIncidentNames = {
    "normal", "CodeRedI", "Nimda", "Slammer", "outage-R1R2", "outage-R5R6"};

inline std::string_view name(IncidentClass c) { return kIncidentNames.at(static_cast<std::size_t>(c)); }

inline IncidentClass incident_from_label(int label) {
  if (label < 0 || label >= static_cast<int>(kIncidentClassCount))
    throw ValidationError("class", "unknown class identifier " + std::to_string(label));
  return static_cast<IncidentClass>(label);
}

/// Accepts a class name ("Slammer") or its numeric label ("3").
inline IncidentClass parse_incident(std::string_view text) {
  for (std::size_t i = 0; i < kIncidentNames.size(); ++i)
    if (kIncidentNames[i] == text) return static_cast<IncidentClass>(i);
  int label = -1;
  if (bgp::detail::parse_unsigned(text, label)) return incident_from_label(label);
  throw ValidationError("class", "unknown class identifier '" + std::string(text) + "'");
}

inline bool is_intrusion(IncidentClass c) {
  return c == IncidentClass::code_red_i || c == IncidentClass::nimda || c == IncidentClass::slammer;
}
inline bool is_outage(IncidentClass c) {
  return c == IncidentClass::outage_r1r2 || c == IncidentClass::outage_r5r6;
}

/// Step 1 label: 0 Other, 1 CodeRedI, 2 Nimda, 3 Slammer.
inline int step1_label(IncidentClass c) { return is_intrusion(c) ? static_cast<int>(c) : 0; }

/// Step 2 label: 0 normal, 1 outage R1-R2, 2 outage R5-R6.
inline int step2_label(IncidentClass c) {
  if (c == IncidentClass::outage_r1r2) return 1;
  if (c == IncidentClass::outage_r5r6) return 2;
  return 0;
}

inline IncidentClass incident_from_step1(int label) {
  if (label < 0 || label > 3) throw ValidationError("label", "Step 1 label out of range: " + std::to_string(label));
  return static_cast<IncidentClass>(label);
}

inline IncidentClass incident_from_step2(int label) {
  switch (label) {
    case 0: return IncidentClass::normal;
    case 1: return IncidentClass::outage_r1r2;
    case 2: return IncidentClass::outage_r5r6;
  }
  throw ValidationError("label", "Step 2 label out of range: " + std::to_string(label));
}

/// A labeled event interval [start, end) in epoch seconds.
struct GroundTruthInterval {
  IncidentClass incident = IncidentClass::normal;
  double start = 0;
  double end = 0;

  friend bool operator==(const GroundTruthInterval&, const GroundTruthInterval&) = default;
};

namespace detail {

inline int tier(IncidentClass c) { return is_intrusion(c) ? 2 : is_outage(c) ? 1 : 0; }

}  // namespace detail

/// Assigns each window the class of the interval containing its midpoint.
/// Intrusion intervals take precedence over outage intervals; windows covered
/// by neither are normal. Intervals of the same tier must not overlap.
inline void label_windows(std::span<FeatureVector> windows, std::span<const GroundTruthInterval> truth,
                          std::int64_t window_seconds) {
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& a = truth[i];
    if (!(a.start < a.end)) throw ValidationError("ground_truth", "interval " + std::to_string(i) + " has start >= end");
    for (std::size_t j = i + 1; j < truth.size(); ++j) {
      const auto& b = truth[j];
      if (detail::tier(a.incident) == detail::tier(b.incident) && a.start < b.end && b.start < a.end)
        throw ValidationError("ground_truth", "intervals " + std::to_string(i) + " and " + std::to_string(j) +
                                                  " overlap within the same tier");
    }
  }
  for (auto& w : windows) {
    const double mid = static_cast<double>(w.window_start) + static_cast<double>(window_seconds) / 2.0;
    IncidentClass best = IncidentClass::normal;
    for (const auto& t : truth)
      if (t.start <= mid && mid < t.end && detail::tier(t.incident) > detail::tier(best)) best = t.incident;
    w.label = static_cast<int>(best);
  }
}

/// Ground truth CSV: header `class,start,end`, class given by name.
inline void write_ground_truth(std::ostream& os, std::span<const GroundTruthInterval> truth) {
  os << "class,start,end\n";
  char buf[64];
  for (const auto& t : truth) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", t.start, t.end);
    os << name(t.incident) << buf;
  }
}

inline std::vector<GroundTruthInterval> read_ground_truth(std::istream& in) {
  std::vector<GroundTruthInterval> out;
  std::string line;
  std::size_t line_no = 0;
  auto number = [&line_no](std::string_view s) {
    s = bgp::detail::trim(s);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw ParseError(line_no, "ground truth row " + std::to_string(line_no) + ": invalid number");
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = bgp::detail::trim(line);
    if (body.empty()) continue;
    if (line_no == 1) {
      if (body != "class,start,end") throw ParseError(1, "ground truth header must be 'class,start,end'");
      continue;
    }
    std::vector<std::string_view> cells;
    std::string_view rest = body;
    for (auto at = rest.find(','); at != std::string_view::npos; at = rest.find(',')) {
      cells.push_back(rest.substr(0, at));
      rest.remove_prefix(at + 1);
    }
    cells.push_back(rest);
    if (cells.size() != 3) throw ParseError(line_no, "ground truth row " + std::to_string(line_no) + ": expected 3 fields");
    GroundTruthInterval t;
    try {
      t.incident = parse_incident(bgp::detail::trim(cells[0]));
    } catch (const ValidationError& e) {
      throw ParseError(line_no, "ground truth row " + std::to_string(line_no) + ": " + e.what());
    }
    t.start = number(cells[1]);
    t.end = number(cells[2]);
    out.push_back(t);
  }
  return out;
}

}  // namespace sicn::features
