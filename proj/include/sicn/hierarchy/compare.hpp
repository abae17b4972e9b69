#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sicn/error.hpp"

namespace sicn::hierarchy {

struct SideResult {
  double accuracy = 0;
  double macro_f1 = 0;
  double training_seconds = 0;
};

struct ComparisonRow {
  std::string algorithm;
  SideResult hier;
  SideResult flat;
  std::optional<double> accuracy_pct;
  std::optional<double> f1_pct;
  std::optional<double> time_efficiency_pct;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;

  const ComparisonRow* find(const std::string& algorithm) const {
    for (const auto& r : rows)
      if (r.algorithm == algorithm) return &r;
    return nullptr;
  }
};

/// 100 * num / den rounded to one decimal; undefined when den is 0.
inline std::optional<double> percent(double num, double den) {
  if (den == 0 || !std::isfinite(num) || !std::isfinite(den)) return std::nullopt;
  return std::round(1000.0 * num / den) / 10.0;
}

/// Pairs hierarchical and flat results per algorithm; rows follow `hier`.
inline ComparisonReport compare(const std::vector<std::pair<std::string, SideResult>>& hier,
                                const std::vector<std::pair<std::string, SideResult>>& flat) {
  if (hier.size() != flat.size()) throw ValidationError("compare", "algorithm lists differ in length");
  ComparisonReport report;
  for (const auto& [name, h] : hier) {
    const SideResult* f = nullptr;
    for (const auto& [fname, fr] : flat)
      if (fname == name) f = &fr;
    if (!f) throw ValidationError("compare", "algorithm '" + name + "' has no flat result");
    report.rows.push_back({name, h, *f, percent(h.accuracy, f->accuracy), percent(h.macro_f1, f->macro_f1),
                           percent(f->training_seconds, h.training_seconds)});
  }
  return report;
}

inline std::string format_percent(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", *v);
  return buf;
}

inline std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

/// CSV table; `with_time` false drops the wall-clock column.
inline void write_comparison_csv(std::ostream& os, const ComparisonReport& r, bool with_time = true) {
  os << "algorithm,hier_acc,flat_acc,acc_pct,hier_f1,flat_f1,f1_pct" << (with_time ? ",time_pct" : "") << '\n';
  for (const auto& row : r.rows) {
    os << row.algorithm << ',' << format_metric(row.hier.accuracy) << ',' << format_metric(row.flat.accuracy) << ','
       << format_percent(row.accuracy_pct) << ',' << format_metric(row.hier.macro_f1) << ','
       << format_metric(row.flat.macro_f1) << ',' << format_percent(row.f1_pct);
    if (with_time) os << ',' << format_percent(row.time_efficiency_pct);
    os << '\n';
  }
}

inline nlohmann::json to_json(const ComparisonReport& r, bool with_time = true) {
  auto pct = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json h{{"accuracy", row.hier.accuracy}, {"macro_f1", row.hier.macro_f1}};
    nlohmann::json f{{"accuracy", row.flat.accuracy}, {"macro_f1", row.flat.macro_f1}};
    nlohmann::json ratios{{"accuracy_pct", pct(row.accuracy_pct)}, {"f1_pct", pct(row.f1_pct)}};
    if (with_time) {
      h["training_seconds"] = row.hier.training_seconds;
      f["training_seconds"] = row.flat.training_seconds;
      ratios["time_efficiency_pct"] = pct(row.time_efficiency_pct);
    }
    rows.push_back({{"algorithm", row.algorithm}, {"hierarchical", h}, {"flat", f}, {"ratios", ratios}});
  }
  return {{"comparison", rows}};
}

inline ComparisonReport comparison_from_json(const nlohmann::json& j) {
  try {
    ComparisonReport r;
    auto opt = [](const nlohmann::json& v, const char* key) -> std::optional<double> {
      if (!v.contains(key) || v[key].is_null()) return std::nullopt;
      return v[key].get<double>();
    };
    for (const auto& row : j.at("comparison")) {
      ComparisonRow c;
      c.algorithm = row.at("algorithm").get<std::string>();
      const auto& h = row.at("hierarchical");
      const auto& f = row.at("flat");
      c.hier = {h.at("accuracy").get<double>(), h.at("macro_f1").get<double>(), h.value("training_seconds", 0.0)};
      c.flat = {f.at("accuracy").get<double>(), f.at("macro_f1").get<double>(), f.value("training_seconds", 0.0)};
      const auto& ratios = row.at("ratios");
      c.accuracy_pct = opt(ratios, "accuracy_pct");
      c.f1_pct = opt(ratios, "f1_pct");
      c.time_efficiency_pct = opt(ratios, "time_efficiency_pct");
      r.rows.push_back(std::move(c));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("comparison", e.what());
  }
}

}  // namespace sicn::hierarchy
