#pragma once

// Multiclass gradient-boosted trees on the softmax loss.
//
// Every round fits one regression tree per class to the second-order
// expansion of the loss (gradient p - y, hessian p(1 - p)), XGBoost style:
// split gain GL^2/(HL+l2) + GR^2/(HR+l2) - G^2/(H+l2), leaf value -G/(H+l2),
// and each child must keep a hessian sum of at least min_child_weight.
// Scores start from the log class priors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "sicn/error.hpp"
#include "sicn/learn/dataset.hpp"
#include "sicn/learn/logistic.hpp"
#include "sicn/learn/tree.hpp"

namespace sicn::learn {

struct RegressionTree {
  struct Node {
    std::int32_t feature = -1;
    double threshold = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0;
  };
  std::vector<Node> nodes;

  double predict(std::span<const double> x) const {
    std::size_t at = 0;
    while (nodes[at].feature >= 0)
      at = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[at].feature)] <= nodes[at].threshold ? nodes[at].left
                                                                                                            : nodes[at].right);
    return nodes[at].value;
  }
};

struct BoostOptions {
  std::size_t n_rounds = 100;
  double learning_rate = 0.3;
  std::size_t max_depth = 3;
  double min_child_weight = 1.0;
  double l2 = 1.0;
};

/// Sum over rows of -log softmax(scores_i)[y_i]; `scores` is n x K row-major.
inline double multinomial_log_loss(std::span<const double> scores, std::span<const std::uint32_t> y, std::size_t K) {
  double loss = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto s = scores.subspan(i * K, K);
    const double hi = *std::max_element(s.begin(), s.end());
    double z = 0;
    for (double v : s) z += std::exp(v - hi);
    loss += hi + std::log(z) - s[y[i]];
  }
  return loss;
}

/// Gradient and diagonal hessian of multinomial_log_loss w.r.t. the scores.
inline void softmax_gradients(std::span<const double> scores, std::span<const std::uint32_t> y, std::size_t K,
                              std::vector<double>& grad, std::vector<double>& hess) {
  grad.resize(scores.size());
  hess.resize(scores.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto p = softmax(scores.subspan(i * K, K));
    for (std::size_t k = 0; k < K; ++k) {
      grad[i * K + k] = p[k] - (k == y[i] ? 1.0 : 0.0);
      hess[i * K + k] = std::max(p[k] * (1.0 - p[k]), 1e-16);
    }
  }
}

/// Grows one depth-limited regression tree over presorted columns.
/// `grad` and `hess` are strided: entry i is at [i * stride + offset].
inline RegressionTree build_regression_tree(const Dataset& data, const PresortedColumns& columns,
                                            std::span<const double> grad, std::span<const double> hess,
                                            std::size_t stride, std::size_t offset, const BoostOptions& opt) {
  const std::size_t n = data.size(), d = data.feature_count();
  const auto& values = data.values();
  RegressionTree tree;
  std::vector<double> g_sum, h_sum;
  auto add_node = [&] {
    tree.nodes.emplace_back();
    g_sum.push_back(0);
    h_sum.push_back(0);
    return static_cast<std::int32_t>(tree.nodes.size() - 1);
  };
  add_node();
  std::vector<std::int32_t> node_of(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    g_sum[0] += grad[i * stride + offset];
    h_sum[0] += hess[i * stride + offset];
  }

  std::vector<std::int32_t> frontier{0};
  for (std::size_t depth = 0; depth < opt.max_depth && !frontier.empty(); ++depth) {
    std::vector<std::int32_t> slot(tree.nodes.size(), -1);
    std::vector<std::int32_t> active;
    for (auto id : frontier)
      if (h_sum[static_cast<std::size_t>(id)] >= 2 * opt.min_child_weight) {
        slot[static_cast<std::size_t>(id)] = static_cast<std::int32_t>(active.size());
        active.push_back(id);
      }
    if (active.empty()) break;
    const std::size_t A = active.size();
    struct Best {
      double gain = 0;
      std::int32_t feature = -1;
      double threshold = 0;
    };
    std::vector<Best> best(A);
    std::vector<double> gl(A), hl(A), last(A);
    std::vector<std::uint8_t> seen(A);
    for (std::size_t f = 0; f < d; ++f) {
      std::fill(gl.begin(), gl.end(), 0.0);
      std::fill(hl.begin(), hl.end(), 0.0);
      std::fill(seen.begin(), seen.end(), 0);
      for (auto i : columns.order(f)) {
        const auto node = node_of[i];
        if (node < 0) continue;
        const std::int32_t s = slot[static_cast<std::size_t>(node)];
        if (s < 0) continue;
        const auto a = static_cast<std::size_t>(s);
        const double x = values[i * d + f];
        if (seen[a] && x > last[a]) {
          const auto id = static_cast<std::size_t>(active[a]);
          const double gr = g_sum[id] - gl[a], hr = h_sum[id] - hl[a];
          if (hl[a] >= opt.min_child_weight && hr >= opt.min_child_weight) {
            const double gain = gl[a] * gl[a] / (hl[a] + opt.l2) + gr * gr / (hr + opt.l2) -
                                g_sum[id] * g_sum[id] / (h_sum[id] + opt.l2);
            if (gain > best[a].gain) best[a] = {gain, static_cast<std::int32_t>(f), detail::midpoint(last[a], x)};
          }
        }
        gl[a] += grad[i * stride + offset];
        hl[a] += hess[i * stride + offset];
        last[a] = x;
        seen[a] = 1;
      }
    }
    std::vector<std::int32_t> next;
    for (std::size_t a = 0; a < A; ++a) {
      if (best[a].feature < 0) continue;
      const auto l = add_node();
      const auto r = add_node();
      auto& node = tree.nodes[static_cast<std::size_t>(active[a])];
      node.feature = best[a].feature;
      node.threshold = best[a].threshold;
      node.left = l;
      node.right = r;
      next.push_back(l);
      next.push_back(r);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto id = node_of[i];
      if (id < 0) continue;
      const auto& node = tree.nodes[static_cast<std::size_t>(id)];
      if (node.feature < 0) {
        node_of[i] = -1;
        continue;
      }
      const auto child = values[i * d + static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
      node_of[i] = child;
      g_sum[static_cast<std::size_t>(child)] += grad[i * stride + offset];
      h_sum[static_cast<std::size_t>(child)] += hess[i * stride + offset];
    }
    frontier = std::move(next);
  }
  for (std::size_t id = 0; id < tree.nodes.size(); ++id)
    if (tree.nodes[id].feature < 0) tree.nodes[id].value = -g_sum[id] / (h_sum[id] + opt.l2);
  return tree;
}

struct BoostedModel {
  std::vector<int> classes;
  std::vector<double> base_scores;    // K
  double learning_rate = 0;
  std::vector<RegressionTree> trees;  // round-major, K per round
  std::vector<double> loss_trace;     // mean training loss before each round and after the last

  std::vector<double> scores(std::span<const double> x) const {
    std::vector<double> s(base_scores);
    const std::size_t K = classes.size();
    for (std::size_t t = 0; t < trees.size(); ++t) s[t % K] += learning_rate * trees[t].predict(x);
    return s;
  }

  int predict(std::span<const double> x) const { return classes[argmax_first(scores(x))]; }
};

inline BoostedModel fit_gradient_boost(const Dataset& train, const BoostOptions& opt = {}) {
  if (opt.n_rounds < 1) throw ValidationError("n_rounds", "must be at least 1");
  if (train.empty()) throw ValidationError("train", "gradient boosting needs at least one row");
  const std::size_t n = train.size(), K = train.class_set().size();
  BoostedModel m;
  m.classes = train.class_set();
  m.learning_rate = opt.learning_rate;

  std::vector<std::uint32_t> y(n);
  std::vector<double> prior(K, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<std::uint32_t>(train.class_index(train.label(i)));
    prior[y[i]] += 1;
  }
  for (auto& p : prior) m.base_scores.push_back(std::log(std::max(p / static_cast<double>(n), 1e-12)));

  const PresortedColumns columns(train);
  std::vector<double> scores(n * K);
  for (std::size_t i = 0; i < n; ++i) std::copy(m.base_scores.begin(), m.base_scores.end(), scores.begin() + static_cast<std::ptrdiff_t>(i * K));
  std::vector<double> grad, hess;
  m.loss_trace.push_back(multinomial_log_loss(scores, y, K) / static_cast<double>(n));
  for (std::size_t round = 0; round < opt.n_rounds; ++round) {
    softmax_gradients(scores, y, K, grad, hess);
    const std::size_t first = m.trees.size();
    for (std::size_t k = 0; k < K; ++k) m.trees.push_back(build_regression_tree(train, columns, grad, hess, K, k, opt));
    for (std::size_t i = 0; i < n; ++i) {
      auto x = train.row(i);
      for (std::size_t k = 0; k < K; ++k) scores[i * K + k] += opt.learning_rate * m.trees[first + k].predict(x);
    }
    const double loss = multinomial_log_loss(scores, y, K) / static_cast<double>(n);
    if (!std::isfinite(loss)) throw TrainingError("gradient boosting: non-finite loss in round " + std::to_string(round));
    m.loss_trace.push_back(loss);
  }
  return m;
}

}  // namespace sicn::learn
