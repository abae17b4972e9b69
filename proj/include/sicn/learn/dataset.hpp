#pragma once

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "sicn/error.hpp"

namespace sicn::learn {

/// Dense labeled rows with an ordered class set.
///
/// The class set defaults to the sorted distinct labels; a class's index in
/// that set is what all tie-break rules ("lowest class index") refer to.
/// Each row may carry an integer key (the window start for featurized data,
/// -1 when absent).
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::size_t feature_count) : features_(feature_count) {}

  void add(std::span<const double> values, int label, std::int64_t key = -1) {
    if (values.size() != features_)
      throw ValidationError("dataset", "row arity " + std::to_string(values.size()) + " differs from " +
                                           std::to_string(features_));
    values_.insert(values_.end(), values.begin(), values.end());
    labels_.push_back(label);
    keys_.push_back(key);
    auto it = std::lower_bound(classes_.begin(), classes_.end(), label);
    if (it == classes_.end() || *it != label) classes_.insert(it, label);
  }

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  std::size_t feature_count() const { return features_; }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * features_, features_}; }
  int label(std::size_t i) const { return labels_[i]; }
  std::int64_t key(std::size_t i) const { return keys_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<double>& values() const { return values_; }

  const std::vector<int>& class_set() const { return classes_; }

  /// Replaces the class set; every row label must belong to it.
  void set_class_set(std::vector<int> classes) {
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    for (int l : labels_)
      if (!std::binary_search(classes.begin(), classes.end(), l))
        throw ValidationError("class_set", "row label " + std::to_string(l) + " is not in the class set");
    classes_ = std::move(classes);
  }

  std::size_t class_index(int label) const {
    auto it = std::lower_bound(classes_.begin(), classes_.end(), label);
    if (it == classes_.end() || *it != label)
      throw ValidationError("label", "label " + std::to_string(label) + " is not in the class set");
    return static_cast<std::size_t>(it - classes_.begin());
  }

  /// Rows at `indices`, in that order; keeps this dataset's class set.
  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out(features_);
    out.values_.reserve(indices.size() * features_);
    for (auto i : indices) {
      auto r = row(i);
      out.values_.insert(out.values_.end(), r.begin(), r.end());
      out.labels_.push_back(labels_[i]);
      out.keys_.push_back(keys_[i]);
    }
    out.classes_ = classes_;
    return out;
  }

  /// Copy with every feature value replaced by f(feature_index, value).
  template <class F>
  Dataset transformed(F&& f) const {
    Dataset out = *this;
    for (std::size_t i = 0; i < out.values_.size(); ++i) out.values_[i] = f(i % features_, out.values_[i]);
    return out;
  }

 private:
  std::size_t features_ = 0;
  std::vector<double> values_;
  std::vector<int> labels_;
  std::vector<std::int64_t> keys_;
  std::vector<int> classes_;
};

/// Index of the largest element; ties resolve to the lowest index.
template <class Range>
std::size_t argmax_first(const Range& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < std::size(values); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

}  // namespace sicn::learn
