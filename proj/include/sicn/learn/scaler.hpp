#pragma once

#include <cmath>
#include <span>
#include <tuple>
#include <vector>

#include "sicn/error.hpp"
#include "sicn/learn/dataset.hpp"

namespace sicn::learn {

/// Per-feature z-score with population standard deviation. Features with zero
/// variance map to 0.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Scaler fit(const Dataset& train) {
    if (train.empty()) throw ValidationError("train", "cannot standardize an empty dataset");
    const std::size_t d = train.feature_count();
    const double n = static_cast<double>(train.size());
    Scaler s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (std::size_t i = 0; i < train.size(); ++i) {
      auto r = train.row(i);
      for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
    }
    for (auto& m : s.mean) m /= n;
    for (std::size_t i = 0; i < train.size(); ++i) {
      auto r = train.row(i);
      for (std::size_t j = 0; j < d; ++j) s.stddev[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
    }
    for (auto& v : s.stddev) v = std::sqrt(v / n);
    return s;
  }

  double apply(std::size_t feature, double value) const {
    const double sd = stddev[feature];
    return sd > 0.0 ? (value - mean[feature]) / sd : 0.0;
  }

  std::vector<double> transform(std::span<const double> row) const {
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = apply(j, row[j]);
    return out;
  }

  Dataset transform(const Dataset& data) const {
    return data.transformed([this](std::size_t j, double v) { return apply(j, v); });
  }
};

/// Fits a scaler on `train` and applies it to `train` and every other set.
template <class... Sets>
auto standardize(const Dataset& train, const Sets&... others) {
  const Scaler scaler = Scaler::fit(train);
  return std::tuple{scaler, scaler.transform(train), scaler.transform(others)...};
}

}  // namespace sicn::learn
