#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sicn/error.hpp"
#include "sicn/learn/dataset.hpp"

namespace sicn::learn {

/// Numerically stable softmax.
inline std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> p(scores.begin(), scores.end());
  const double hi = *std::max_element(p.begin(), p.end());
  double sum = 0;
  for (auto& v : p) sum += (v = std::exp(v - hi));
  for (auto& v : p) v /= sum;
  return p;
}

/// Multinomial logistic regression: K x d weights plus K biases.
struct LogisticModel {
  std::vector<int> classes;
  std::size_t features = 0;
  std::vector<double> weights;  // K x d, row-major
  std::vector<double> bias;     // K

  std::vector<double> scores(std::span<const double> x) const {
    std::vector<double> s(bias);
    for (std::size_t k = 0; k < classes.size(); ++k)
      for (std::size_t j = 0; j < features; ++j) s[k] += weights[k * features + j] * x[j];
    return s;
  }

  std::vector<double> probabilities(std::span<const double> x) const { return softmax(scores(x)); }

  int predict(std::span<const double> x) const { return classes[argmax_first(scores(x))]; }
};

struct LogisticOptions {
  double learning_rate = 0.1;
  std::size_t iterations = 500;
  double l2 = 1e-4;
};

/// Mean cross-entropy plus (l2/2)|W|^2. Fills the gradients when non-null.
inline double logistic_loss(const LogisticModel& m, const Dataset& data, double l2,
                            std::vector<double>* grad_w = nullptr, std::vector<double>* grad_b = nullptr) {
  const std::size_t K = m.classes.size(), d = m.features;
  const double n = static_cast<double>(data.size());
  if (grad_w) grad_w->assign(K * d, 0.0);
  if (grad_b) grad_b->assign(K, 0.0);
  double loss = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto x = data.row(i);
    const auto y = data.class_index(data.label(i));
    const auto s = m.scores(x);
    const double hi = *std::max_element(s.begin(), s.end());
    double z = 0;
    for (double v : s) z += std::exp(v - hi);
    const double log_z = hi + std::log(z);
    loss += log_z - s[y];
    if (grad_w || grad_b) {
      for (std::size_t k = 0; k < K; ++k) {
        const double r = (std::exp(s[k] - log_z) - (k == y ? 1.0 : 0.0)) / n;
        if (grad_b) (*grad_b)[k] += r;
        if (grad_w)
          for (std::size_t j = 0; j < d; ++j) (*grad_w)[k * d + j] += r * x[j];
      }
    }
  }
  loss /= n;
  double sq = 0;
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    sq += m.weights[i] * m.weights[i];
    if (grad_w) (*grad_w)[i] += l2 * m.weights[i];
  }
  return loss + 0.5 * l2 * sq;
}

/// Full-batch gradient descent from zero weights. Expects standardized input.
inline LogisticModel fit_logistic(const Dataset& train, const LogisticOptions& opt = {}) {
  if (train.empty()) throw ValidationError("train", "logistic regression needs at least one row");
  LogisticModel m;
  m.classes = train.class_set();
  m.features = train.feature_count();
  m.weights.assign(m.classes.size() * m.features, 0.0);
  m.bias.assign(m.classes.size(), 0.0);
  std::vector<double> gw, gb;
  for (std::size_t it = 0; it < opt.iterations; ++it) {
    const double loss = logistic_loss(m, train, opt.l2, &gw, &gb);
    if (!std::isfinite(loss))
      throw TrainingError("logistic regression: non-finite loss at iteration " + std::to_string(it));
    for (std::size_t i = 0; i < gw.size(); ++i) m.weights[i] -= opt.learning_rate * gw[i];
    for (std::size_t k = 0; k < gb.size(); ++k) m.bias[k] -= opt.learning_rate * gb[k];
  }
  if (!std::isfinite(logistic_loss(m, train, opt.l2)))
    throw TrainingError("logistic regression: non-finite loss after training");
  return m;
}

}  // namespace sicn::learn
