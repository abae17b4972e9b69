#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sicn/error.hpp"
#include "sicn/learn/dataset.hpp"

namespace sicn::learn {

/// k-nearest neighbours under Euclidean distance. Equal distances rank the
/// lower training row first; vote ties go to the lowest class index.
struct KnnModel {
  std::size_t k = 1;
  Dataset train;

  int predict(std::span<const double> x) const {
    std::vector<std::pair<double, std::size_t>> dist(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      auto r = train.row(i);
      double s = 0;
      for (std::size_t j = 0; j < r.size(); ++j) s += (r[j] - x[j]) * (r[j] - x[j]);
      dist[i] = {s, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> votes(train.class_set().size(), 0);
    for (std::size_t n = 0; n < k; ++n) ++votes[train.class_index(train.label(dist[n].second))];
    return train.class_set()[argmax_first(votes)];
  }
};

inline KnnModel fit_knn(const Dataset& train, std::size_t k) {
  if (k < 1) throw ValidationError("k", "must be at least 1");
  if (k > train.size())
    throw ValidationError("k", "k=" + std::to_string(k) + " exceeds the " + std::to_string(train.size()) +
                                   " training rows");
  return {k, train};
}

}  // namespace sicn::learn
