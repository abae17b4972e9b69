#pragma once

// Classification trees (CART, Gini impurity).
//
// Trees grow level by level over columns sorted once per dataset, so one
// presort serves every tree of a forest. Candidate thresholds are midpoints
// between consecutive distinct values. Split quality is compared exactly in
// integer arithmetic: with integer row weights, minimizing the weighted Gini
// impurity of a split is the same as maximizing
//
//     sum_k L_k^2 / nL + sum_k R_k^2 / nR
//
// (L_k, R_k class weights on each side), and two such fractions compare
// exactly after cross-multiplying. Ties keep the first candidate found, i.e.
// the lowest feature index and then the lowest threshold.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "sicn/learn/dataset.hpp"
#include "sicn/rng.hpp"

namespace sicn::learn {

/// Row indices of a dataset sorted by each feature (ties by row index).
class PresortedColumns {
 public:
  explicit PresortedColumns(const Dataset& data) : order_(data.feature_count()) {
    const std::size_t n = data.size(), d = data.feature_count();
    const auto& v = data.values();
    for (std::size_t f = 0; f < d; ++f) {
      auto& o = order_[f];
      o.resize(n);
      std::iota(o.begin(), o.end(), std::uint32_t{0});
      std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return v[a * d + f] < v[b * d + f]; });
    }
  }

  std::size_t features() const { return order_.size(); }
  const std::vector<std::uint32_t>& order(std::size_t f) const { return order_[f]; }

 private:
  std::vector<std::vector<std::uint32_t>> order_;
};

/// Binary tree; internal nodes send x[feature] <= threshold to the left.
struct ClassTree {
  struct Node {
    std::int32_t feature = -1;  // -1 for leaves
    double threshold = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t class_index = 0;  // leaf prediction
  };

  std::vector<Node> nodes;

  std::uint32_t predict_index(std::span<const double> x) const {
    std::size_t at = 0;
    while (nodes[at].feature >= 0)
      at = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[at].feature)] <= nodes[at].threshold ? nodes[at].left
                                                                                                            : nodes[at].right);
    return nodes[at].class_index;
  }

  std::size_t depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      best = std::max(best, d[i]);
      if (nodes[i].feature >= 0) {
        d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
        d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
      }
    }
    return best;
  }
};

struct TreeOptions {
  std::size_t max_depth = 0;          // 0: unlimited
  std::size_t min_samples_split = 2;  // in weighted rows
  std::size_t features_per_split = 0; // 0: all features
};

namespace detail {

using u128 = unsigned __int128;

/// Split score as an exact fraction num/den (see header comment).
struct GiniScore {
  u128 num = 0;
  u128 den = 1;

  bool better_than(const GiniScore& o) const { return num * o.den > o.num * den; }
};

inline GiniScore gini_score(std::span<const std::uint64_t> left, std::span<const std::uint64_t> total,
                            std::uint64_t n_left, std::uint64_t n_total) {
  u128 a = 0, b = 0;
  for (std::size_t k = 0; k < left.size(); ++k) {
    a += u128{left[k]} * left[k];
    const std::uint64_t r = total[k] - left[k];
    b += u128{r} * r;
  }
  const std::uint64_t n_right = n_total - n_left;
  return {a * n_right + b * n_left, u128{n_left} * n_right};
}

/// Midpoint strictly below `hi`, so rows at `lo` go left and rows at `hi` go right.
inline double midpoint(double lo, double hi) {
  const double t = lo + (hi - lo) / 2.0;
  return t < hi ? t : lo;
}

}  // namespace detail

/// Grows one tree. `weights[i]` is the multiplicity of row i (0 excludes it);
/// `rng` is only consulted when features_per_split is below the feature count.
inline ClassTree build_class_tree(const Dataset& data, const PresortedColumns& columns,
                                  std::span<const std::uint32_t> weights, const TreeOptions& opt, Rng* rng) {
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  const std::size_t n = data.size(), d = data.feature_count(), K = data.class_set().size();
  const auto& values = data.values();
  const std::size_t per_split = (opt.features_per_split == 0 || opt.features_per_split >= d) ? d : opt.features_per_split;

  std::vector<std::uint32_t> cls(n);
  for (std::size_t i = 0; i < n; ++i) cls[i] = static_cast<std::uint32_t>(data.class_index(data.label(i)));

  ClassTree tree;
  std::vector<std::uint64_t> counts;  // K per node
  std::vector<std::uint64_t> totals;
  std::vector<std::size_t> depths;
  auto add_node = [&](std::size_t depth) {
    tree.nodes.emplace_back();
    counts.resize(counts.size() + K, 0);
    totals.push_back(0);
    depths.push_back(depth);
    return static_cast<std::uint32_t>(tree.nodes.size() - 1);
  };
  add_node(0);

  std::vector<std::uint32_t> node_of(n, kNone);
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] == 0) continue;
    node_of[i] = 0;
    counts[cls[i]] += weights[i];
    totals[0] += weights[i];
  }
  if (totals[0] == 0) return tree;

  // Sorted rows still in play, compacted after every level.
  std::vector<std::vector<std::uint32_t>> sorted(d);
  for (std::size_t f = 0; f < d; ++f)
    for (auto i : columns.order(f))
      if (weights[i] != 0) sorted[f].push_back(i);

  std::vector<std::uint32_t> frontier{0};
  std::vector<std::int32_t> slot;  // node id -> index among active nodes
  std::vector<std::uint32_t> subset;
  while (!frontier.empty()) {
    std::vector<std::uint32_t> active;
    for (auto id : frontier) {
      auto c = std::span<const std::uint64_t>(counts).subspan(id * K, K);
      const bool pure = std::count_if(c.begin(), c.end(), [](auto v) { return v > 0; }) <= 1;
      const bool deep = opt.max_depth != 0 && depths[id] >= opt.max_depth;
      tree.nodes[id].class_index = static_cast<std::uint32_t>(argmax_first(c));
      if (!pure && !deep && totals[id] >= opt.min_samples_split) active.push_back(id);
    }
    if (active.empty()) break;

    const std::size_t A = active.size();
    slot.assign(tree.nodes.size(), -1);
    for (std::size_t a = 0; a < A; ++a) slot[active[a]] = static_cast<std::int32_t>(a);
    std::vector<std::uint8_t> allowed(A * d, per_split == d ? 1 : 0);
    if (per_split < d) {
      subset.resize(d);
      for (std::size_t a = 0; a < A; ++a) {
        std::iota(subset.begin(), subset.end(), std::uint32_t{0});
        for (std::size_t j = 0; j < per_split; ++j) {
          const auto pick = j + rng->below(d - j);
          std::swap(subset[j], subset[pick]);
          allowed[a * d + subset[j]] = 1;
        }
      }
    }

    struct Best {
      bool found = false;
      std::int32_t feature = -1;
      double threshold = 0;
      detail::GiniScore score;
    };
    std::vector<Best> best(A);
    std::vector<std::uint64_t> left(A * K);
    std::vector<std::uint64_t> left_total(A);
    std::vector<double> last(A);
    std::vector<std::uint8_t> seen(A);

    for (std::size_t f = 0; f < d; ++f) {
      std::fill(left.begin(), left.end(), 0);
      std::fill(left_total.begin(), left_total.end(), 0);
      std::fill(seen.begin(), seen.end(), 0);
      for (auto i : sorted[f]) {
        const std::int32_t s = slot[node_of[i]];
        if (s < 0) continue;
        const auto a = static_cast<std::size_t>(s);
        if (!allowed[a * d + f]) continue;
        const double x = values[i * d + f];
        if (seen[a] && x > last[a]) {
          const auto id = active[a];
          auto score = detail::gini_score(std::span<const std::uint64_t>(left).subspan(a * K, K),
                                          std::span<const std::uint64_t>(counts).subspan(id * K, K), left_total[a],
                                          totals[id]);
          if (!best[a].found || score.better_than(best[a].score))
            best[a] = {true, static_cast<std::int32_t>(f), detail::midpoint(last[a], x), score};
        }
        left[a * K + cls[i]] += weights[i];
        left_total[a] += weights[i];
        last[a] = x;
        seen[a] = 1;
      }
    }

    std::vector<std::uint32_t> next;
    for (std::size_t a = 0; a < A; ++a) {
      if (!best[a].found) continue;
      const auto id = active[a];
      const auto l = add_node(depths[id] + 1);
      const auto r = add_node(depths[id] + 1);
      auto& node = tree.nodes[id];
      node.feature = best[a].feature;
      node.threshold = best[a].threshold;
      node.left = static_cast<std::int32_t>(l);
      node.right = static_cast<std::int32_t>(r);
      next.push_back(l);
      next.push_back(r);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto id = node_of[i];
      if (id == kNone) continue;
      const auto& node = tree.nodes[id];
      if (node.feature < 0) {
        node_of[i] = kNone;
        continue;
      }
      const auto child = static_cast<std::uint32_t>(
          values[i * d + static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
      node_of[i] = child;
      counts[child * K + cls[i]] += weights[i];
      totals[child] += weights[i];
    }
    for (auto& s : sorted)
      s.erase(std::remove_if(s.begin(), s.end(), [&](std::uint32_t i) { return node_of[i] == kNone; }), s.end());
    frontier = std::move(next);
  }
  for (auto id : frontier) {
    auto c = std::span<const std::uint64_t>(counts).subspan(id * K, K);
    tree.nodes[id].class_index = static_cast<std::uint32_t>(argmax_first(c));
  }
  return tree;
}

/// A single CART tree with the dataset's class set.
struct CartModel {
  std::vector<int> classes;
  ClassTree tree;

  int predict(std::span<const double> x) const { return classes[tree.predict_index(x)]; }
};

inline CartModel fit_cart(const Dataset& train, const TreeOptions& opt = {}) {
  PresortedColumns columns(train);
  std::vector<std::uint32_t> weights(train.size(), 1);
  TreeOptions all = opt;
  all.features_per_split = 0;
  return {train.class_set(), build_class_tree(train, columns, weights, all, nullptr)};
}

}  // namespace sicn::learn
