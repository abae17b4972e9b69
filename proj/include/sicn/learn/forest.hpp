#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include "sicn/error.hpp"
#include "sicn/learn/dataset.hpp"
#include "sicn/learn/tree.hpp"
#include "sicn/rng.hpp"

namespace sicn::learn {

struct ForestOptions {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  std::size_t features_per_split = 0;  // 0: ceil(sqrt(d))
  std::size_t max_depth = 0;
  std::size_t min_samples_split = 2;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: hardware concurrency
};

/// Bagged CART trees, majority vote with ties to the lowest class index.
struct ForestModel {
  std::vector<int> classes;
  std::vector<ClassTree> trees;

  int predict(std::span<const double> x) const {
    std::vector<std::size_t> votes(classes.size(), 0);
    for (const auto& t : trees) ++votes[t.predict_index(x)];
    return classes[argmax_first(votes)];
  }
};

inline ForestModel fit_random_forest(const Dataset& train, const ForestOptions& opt = {}) {
  if (opt.n_trees < 1) throw ValidationError("n_trees", "must be at least 1");
  if (train.empty()) throw ValidationError("train", "random forest needs at least one row");
  const std::size_t d = train.feature_count(), n = train.size();
  TreeOptions tree_opt;
  tree_opt.max_depth = opt.max_depth;
  tree_opt.min_samples_split = opt.min_samples_split;
  tree_opt.features_per_split =
      opt.features_per_split == 0 ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))))
                                  : opt.features_per_split;

  const PresortedColumns columns(train);
  ForestModel model;
  model.classes = train.class_set();
  model.trees.resize(opt.n_trees);

  // Each tree draws from its own seed, so the schedule cannot change results.
  auto grow = [&](std::size_t t) {
    Rng rng(derive_seed(opt.seed, t));
    std::vector<std::uint32_t> weights(n, 1);
    if (opt.bootstrap) {
      std::fill(weights.begin(), weights.end(), 0);
      for (std::size_t i = 0; i < n; ++i) ++weights[rng.below(n)];
    }
    model.trees[t] = build_class_tree(train, columns, weights, tree_opt, &rng);
  };
  std::size_t workers = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, opt.n_trees);
  if (workers <= 1) {
    for (std::size_t t = 0; t < opt.n_trees; ++t) grow(t);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < opt.n_trees; t += workers) grow(t);
      });
  }
  return model;
}

}  // namespace sicn::learn
