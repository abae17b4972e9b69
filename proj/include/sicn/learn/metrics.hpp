#pragma once

#include <span>
#include <string>
#include <vector>

#include "sicn/error.hpp"
#include "sicn/learn/dataset.hpp"

namespace sicn::learn {

struct ClassScores {
  int label = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;
};

struct EvalMetrics {
  double accuracy = 0;
  double macro_f1 = 0;
  std::vector<int> classes;
  std::vector<ClassScores> per_class;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  double training_seconds = 0;

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& row : confusion)
      for (auto c : row) t += c;
    return t;
  }
};

/// Scores predictions against truth over `class_set`. Precision, recall and
/// F1 are 0 whenever their denominator is 0; macro-F1 averages over the whole
/// class set, including classes absent from both sides.
inline EvalMetrics score_predictions(const std::vector<int>& class_set, std::span<const int> truth,
                                     std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw ValidationError("predicted", "length differs from truth");
  if (truth.empty()) throw ValidationError("test", "cannot evaluate on an empty set");
  Dataset index_of(0);
  index_of.set_class_set(class_set);
  const std::size_t K = index_of.class_set().size();
  EvalMetrics m;
  m.classes = index_of.class_set();
  m.confusion.assign(K, std::vector<std::size_t>(K, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) ++m.confusion[index_of.class_index(truth[i])][index_of.class_index(predicted[i])];

  std::size_t correct = 0;
  double f1_sum = 0;
  for (std::size_t k = 0; k < K; ++k) {
    correct += m.confusion[k][k];
    std::size_t row = 0, col = 0;
    for (std::size_t j = 0; j < K; ++j) {
      row += m.confusion[k][j];
      col += m.confusion[j][k];
    }
    ClassScores s;
    s.label = m.classes[k];
    s.support = row;
    const double tp = static_cast<double>(m.confusion[k][k]);
    s.precision = col ? tp / static_cast<double>(col) : 0.0;
    s.recall = row ? tp / static_cast<double>(row) : 0.0;
    s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    f1_sum += s.f1;
    m.per_class.push_back(s);
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  m.macro_f1 = f1_sum / static_cast<double>(K);
  return m;
}

}  // namespace sicn::learn
