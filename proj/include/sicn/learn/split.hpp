#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sicn/error.hpp"
#include "sicn/learn/dataset.hpp"
#include "sicn/rng.hpp"

namespace sicn::learn {

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::vector<std::string> warnings;
};

/// Per-class shuffled split. Each class with n rows contributes
/// round(train_fraction * n) rows to train, clamped so that both sides get at
/// least one row when 0 < train_fraction < 1. Classes with a single row go
/// entirely to train (reported in `warnings`). Both sides keep the original
/// row order and the full class set.
inline SplitResult stratified_split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw ValidationError("train_fraction", "must lie in (0, 1]");
  SplitResult out;
  Rng rng(seed);
  std::vector<bool> in_train(data.size(), false);
  for (int cls : data.class_set()) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data.label(i) == cls) members.push_back(i);
    std::size_t take = members.size();
    if (train_fraction < 1.0) {
      if (members.size() < 2) {
        if (!members.empty())
          out.warnings.push_back("class " + std::to_string(cls) + " has fewer than 2 rows; placed in train");
      } else {
        const auto ideal = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(members.size())));
        take = std::clamp<std::size_t>(ideal, 1, members.size() - 1);
      }
    }
    rng.shuffle(members.begin(), members.end());
    for (std::size_t j = 0; j < take; ++j) in_train[members[j]] = true;
  }
  for (std::size_t i = 0; i < data.size(); ++i) (in_train[i] ? out.train_indices : out.test_indices).push_back(i);
  out.train = data.subset(out.train_indices);
  out.test = data.subset(out.test_indices);
  return out;
}

}  // namespace sicn::learn
