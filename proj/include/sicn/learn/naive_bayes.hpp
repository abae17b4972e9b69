#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "sicn/error.hpp"
#include "sicn/learn/dataset.hpp"

namespace sicn::learn {

/// Gaussian naive Bayes. Per-class variances are population variances with a
/// floor so that constant features stay finite.
struct GaussianNb {
  std::vector<int> classes;
  std::size_t features = 0;
  std::vector<double> log_prior;  // K
  std::vector<double> mean;       // K x d
  std::vector<double> variance;   // K x d

  /// Unnormalized log posterior of every class.
  std::vector<double> joint_log_likelihood(std::span<const double> x) const {
    std::vector<double> out(classes.size());
    for (std::size_t k = 0; k < classes.size(); ++k) {
      double s = log_prior[k];
      for (std::size_t j = 0; j < features; ++j) {
        const double var = variance[k * features + j];
        const double diff = x[j] - mean[k * features + j];
        s += -0.5 * std::log(2.0 * std::numbers::pi * var) - diff * diff / (2.0 * var);
      }
      out[k] = s;
    }
    return out;
  }

  int predict(std::span<const double> x) const { return classes[argmax_first(joint_log_likelihood(x))]; }
};

inline GaussianNb fit_gaussian_nb(const Dataset& train, double variance_floor = 1e-9) {
  if (train.empty()) throw ValidationError("train", "Gaussian NB needs at least one row");
  GaussianNb m;
  m.classes = train.class_set();
  m.features = train.feature_count();
  const std::size_t K = m.classes.size(), d = m.features;
  std::vector<double> count(K, 0.0);
  m.mean.assign(K * d, 0.0);
  m.variance.assign(K * d, 0.0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto k = train.class_index(train.label(i));
    count[k] += 1;
    auto r = train.row(i);
    for (std::size_t j = 0; j < d; ++j) m.mean[k * d + j] += r[j];
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (count[k] == 0)
      throw ValidationError("train", "class " + std::to_string(m.classes[k]) + " has no rows");
    for (std::size_t j = 0; j < d; ++j) m.mean[k * d + j] /= count[k];
  }
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto k = train.class_index(train.label(i));
    auto r = train.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = r[j] - m.mean[k * d + j];
      m.variance[k * d + j] += diff * diff;
    }
  }
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < d; ++j)
      m.variance[k * d + j] = std::max(m.variance[k * d + j] / count[k], variance_floor);
  const double n = static_cast<double>(train.size());
  for (std::size_t k = 0; k < K; ++k) m.log_prior.push_back(std::log(count[k] / n));
  return m;
}

}  // namespace sicn::learn
