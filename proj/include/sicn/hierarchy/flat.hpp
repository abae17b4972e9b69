#pragma once

// Label-space plumbing between the two-step view (Step 1 / Step 2 datasets)
// and the combined six-class ("flat") view, plus the flat baseline and the
// end-to-end scoring of a pipeline on flat data.

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "sicn/error.hpp"
#include "sicn/features/feature_vector.hpp"
#include "sicn/features/labels.hpp"
#include "sicn/hierarchy/pipeline.hpp"
#include "sicn/learn/dataset.hpp"
#include "sicn/learn/metrics.hpp"
#include "sicn/learn/model.hpp"
#include "sicn/learn/split.hpp"

namespace sicn::hierarchy {

/// Flat label of a Step 1 label (0 maps to normal).
inline int flat_from_step1(int label) { return static_cast<int>(features::incident_from_step1(label)); }
/// Flat label of a Step 2 label.
inline int flat_from_step2(int label) { return static_cast<int>(features::incident_from_step2(label)); }

/// Every row relabeled to its Step 1 label.
inline learn::Dataset project_step1(const learn::Dataset& flat) {
  learn::Dataset out(flat.feature_count());
  for (std::size_t i = 0; i < flat.size(); ++i)
    out.add(flat.row(i), features::step1_label(features::incident_from_label(flat.label(i))), flat.key(i));
  return out;
}

/// Non-intrusion rows relabeled to their Step 2 label.
inline learn::Dataset project_step2(const learn::Dataset& flat) {
  learn::Dataset out(flat.feature_count());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const auto c = features::incident_from_label(flat.label(i));
    if (!features::is_intrusion(c)) out.add(flat.row(i), features::step2_label(c), flat.key(i));
  }
  return out;
}

/// Source bits of a combined row.
inline constexpr std::uint8_t kFromStep1 = 1;
inline constexpr std::uint8_t kFromStep2 = 2;

/// Six-class dataset plus, per row, the source dataset(s) it came from.
struct CombinedDataset {
  learn::Dataset flat;
  std::vector<std::uint8_t> source;
};

/// Merges a Step 1 and a Step 2 dataset into the six-class space. NI labels
/// 1..3 keep their value, NA labels 1/2 become 4/5 and label 0 on either side
/// becomes normal. Disjoint inputs are simply concatenated (NI rows first).
/// Rows sharing a non-negative key are merged into one row: an intrusion
/// label wins, else the Step 2 label applies.
inline CombinedDataset combine_sources(const learn::Dataset& ni, const learn::Dataset& na) {
  if (ni.feature_count() != na.feature_count())
    throw ValidationError("flat", "Step 1 and Step 2 datasets differ in feature count");
  for (int l : ni.class_set())
    if (l < 0 || l > kStep1MaxLabel) throw ValidationError("step1", "label " + std::to_string(l) + " outside 0..3");
  for (int l : na.class_set())
    if (l < 0 || l > kStep2MaxLabel) throw ValidationError("step2", "label " + std::to_string(l) + " outside 0..2");

  std::map<std::int64_t, std::size_t> na_by_key;
  for (std::size_t i = 0; i < na.size(); ++i)
    if (na.key(i) >= 0) na_by_key.emplace(na.key(i), i);
  std::vector<bool> merged(na.size(), false);
  CombinedDataset out{learn::Dataset(ni.feature_count()), {}};
  for (std::size_t i = 0; i < ni.size(); ++i) {
    int label = flat_from_step1(ni.label(i));
    std::uint8_t source = kFromStep1;
    if (auto it = ni.key(i) >= 0 ? na_by_key.find(ni.key(i)) : na_by_key.end(); it != na_by_key.end()) {
      merged[it->second] = true;
      source |= kFromStep2;
      if (label == 0) label = flat_from_step2(na.label(it->second));
    }
    out.flat.add(ni.row(i), label, ni.key(i));
    out.source.push_back(source);
  }
  for (std::size_t i = 0; i < na.size(); ++i)
    if (!merged[i]) {
      out.flat.add(na.row(i), flat_from_step2(na.label(i)), na.key(i));
      out.source.push_back(kFromStep2);
    }
  return out;
}

inline learn::Dataset combine_flat(const learn::Dataset& ni, const learn::Dataset& na) {
  return combine_sources(ni, na).flat;
}

/// Rows of `flat` whose source includes `bit`, projected to that step.
inline learn::Dataset source_rows(const learn::Dataset& flat, std::span<const std::uint8_t> source, std::uint8_t bit) {
  if (source.size() != flat.size()) throw ValidationError("source", "one source entry per row is required");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < flat.size(); ++i)
    if (source[i] & bit) idx.push_back(i);
  const auto rows = flat.subset(idx);
  return bit == kFromStep1 ? project_step1(rows) : project_step2(rows);
}

/// Splits one labeled window sequence into the two source datasets.
/// Intrusion windows go to Step 1 only. Fault windows go to both, as Other
/// (0) for Step 1 and as their fault class for Step 2. Normal windows
/// alternate between the two, starting with Step 1.
inline std::pair<learn::Dataset, learn::Dataset> partition_sources(const learn::Dataset& flat) {
  learn::Dataset ni(flat.feature_count()), na(flat.feature_count());
  std::size_t normals = 0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const auto c = features::incident_from_label(flat.label(i));
    const bool fault = features::is_outage(c);
    const bool to_ni = fault || features::is_intrusion(c) || normals % 2 == 0;
    const bool to_na = fault || (!features::is_intrusion(c) && normals % 2 == 1);
    if (!fault && !features::is_intrusion(c)) ++normals;
    if (to_ni) ni.add(flat.row(i), features::step1_label(c), flat.key(i));
    if (to_na) na.add(flat.row(i), features::step2_label(c), flat.key(i));
  }
  return {std::move(ni), std::move(na)};
}

/// Flat label predicted by the pipeline, without timing or localization.
inline int predict_flat(const PipelineModel& m, std::span<const double> x) {
  const int first = m.step1.predict(x);
  if (first != 0) return flat_from_step1(first);
  return flat_from_step2(m.step2.predict(x));
}

/// Pipeline scores on a flat test set: end-to-end six-class metrics, and
/// per-step metrics on the Step 1 and Step 2 projections.
struct PipelineEvaluation {
  learn::EvalMetrics end_to_end;
  learn::EvalMetrics step1;
  learn::EvalMetrics step2;
  double training_seconds = 0;
};

/// With `source` given, per-step scores use only the test rows of that
/// step's source dataset; otherwise every row is projected to both steps.
inline PipelineEvaluation evaluate_pipeline(const PipelineModel& m, const learn::Dataset& flat_test,
                                            const std::vector<int>& flat_classes,
                                            std::span<const std::uint8_t> source = {}) {
  if (flat_test.empty()) throw ValidationError("test", "test set is empty");
  PipelineEvaluation ev;
  std::vector<int> predicted(flat_test.size());
  for (std::size_t i = 0; i < flat_test.size(); ++i) predicted[i] = predict_flat(m, flat_test.row(i));
  ev.end_to_end = learn::score_predictions(flat_classes, flat_test.labels(), predicted);
  ev.training_seconds = m.training_seconds();
  ev.end_to_end.training_seconds = ev.training_seconds;

  auto ni = source.empty() ? project_step1(flat_test) : source_rows(flat_test, source, kFromStep1);
  auto na = source.empty() ? project_step2(flat_test) : source_rows(flat_test, source, kFromStep2);
  auto classes_with = [](std::vector<int> classes, const learn::Dataset& d) {
    classes.insert(classes.end(), d.class_set().begin(), d.class_set().end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    return classes;
  };
  if (!ni.empty()) {
    ev.step1 = learn::score_predictions(classes_with(m.step1.classes(), ni), ni.labels(), m.step1.predict_all(ni));
    ev.step1.training_seconds = m.step1.training_seconds;
  }
  if (!na.empty()) {
    ev.step2 = learn::score_predictions(classes_with(m.step2.classes(), na), na.labels(), m.step2.predict_all(na));
    ev.step2.training_seconds = m.step2.training_seconds;
  }
  return ev;
}

struct FlatResult {
  learn::TrainedModel model;
  learn::EvalMetrics metrics;
};

/// Flat baseline on an existing split of the combined data.
inline FlatResult run_flat_on_split(const learn::ModelSpec& spec, const learn::Dataset& train,
                                    const learn::Dataset& test) {
  FlatResult r;
  r.model = learn::fit(spec, train);
  r.metrics = learn::evaluate(r.model, test);
  return r;
}

/// Flat baseline: combine, split with the standard fraction and seed, train
/// one model, score it on the held-out part.
inline learn::EvalMetrics run_flat(const learn::ModelSpec& spec, const learn::Dataset& ni, const learn::Dataset& na,
                                   double train_fraction = 0.6, std::uint64_t split_seed = 0) {
  const auto combined = combine_flat(ni, na);
  const auto split = learn::stratified_split(combined, train_fraction, split_seed);
  if (split.test.empty()) throw ValidationError("train_fraction", "flat baseline needs a non-empty test split");
  return run_flat_on_split(spec, split.train, split.test).metrics;
}

}  // namespace sicn::hierarchy
