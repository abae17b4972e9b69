#pragma once

// Two-step identification: Step 1 separates the three worm incidents from
// everything else (label 0); only windows labeled 0 go on to Step 2, which
// separates normal traffic from the two link faults.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sicn/error.hpp"
#include "sicn/features/feature_vector.hpp"
#include "sicn/features/labels.hpp"
#include "sicn/hierarchy/localize.hpp"
#include "sicn/learn/dataset.hpp"
#include "sicn/learn/model.hpp"
#include "sicn/rng.hpp"
#include "sicn/sim/topology.hpp"

namespace sicn::hierarchy {

using learn::Algorithm;
using Hyperparameters = std::map<std::string, double>;

inline constexpr int kStep1MaxLabel = 3;
inline constexpr int kStep2MaxLabel = 2;

/// Per-step defaults: KNN k 6/3, RF 200/60 trees, boosting 100 rounds with
/// depth 3/1 and min child weight 1/3. Other learners share their global
/// defaults across both steps.
inline Hyperparameters default_hyperparameters(Algorithm a, int step) {
  const bool first = step == 1;
  switch (a) {
    case Algorithm::knn: return {{"k", first ? 6 : 3}};
    case Algorithm::random_forest: return {{"n_trees", first ? 200 : 60}};
    case Algorithm::gradient_boost:
      return {{"n_rounds", 100}, {"max_depth", first ? 3 : 1}, {"min_child_weight", first ? 1 : 3}};
    default: return {};
  }
}

/// One algorithm family with per-step hyperparameters. Entries given here
/// override the per-step defaults.
struct PipelineSpec {
  Algorithm algorithm = Algorithm::random_forest;
  Hyperparameters step1;
  Hyperparameters step2;
  std::uint64_t seed = 0;

  learn::ModelSpec step_spec(int step) const {
    auto params = default_hyperparameters(algorithm, step);
    for (const auto& [k, v] : step == 1 ? step1 : step2) params[k] = v;
    return learn::ModelSpec(algorithm, params, derive_seed(seed, step == 1 ? "step1" : "step2"));
  }
};

struct PipelineModel {
  learn::TrainedModel step1;
  learn::TrainedModel step2;

  double training_seconds() const { return step1.training_seconds + step2.training_seconds; }
};

namespace detail {

inline void check_labels(const learn::Dataset& d, int max_label, const char* step) {
  if (d.empty()) throw ValidationError(step, "training set is empty");
  if (d.feature_count() != features::kFeatureCount)
    throw ValidationError(step, "expected " + std::to_string(features::kFeatureCount) + " features, got " +
                                    std::to_string(d.feature_count()));
  for (int l : d.class_set())
    if (l < 0 || l > max_label)
      throw ValidationError(step, "label " + std::to_string(l) + " outside 0.." + std::to_string(max_label));
}

}  // namespace detail

/// Trains both steps independently. Each model's class set is the labels
/// present in its training set, which must lie in the step's label domain.
inline PipelineModel train_pipeline(const learn::Dataset& ni_train, const learn::Dataset& na_train,
                                    const PipelineSpec& spec) {
  detail::check_labels(ni_train, kStep1MaxLabel, "step1");
  detail::check_labels(na_train, kStep2MaxLabel, "step2");
  PipelineModel m;
  m.step1 = learn::fit(spec.step_spec(1), ni_train);
  m.step2 = learn::fit(spec.step_spec(2), na_train);
  return m;
}

enum class Verdict { normal, intrusion, fault };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::normal: return "normal";
    case Verdict::intrusion: return "intrusion";
    case Verdict::fault: return "fault";
  }
  return "?";
}

struct Diagnosis {
  std::int64_t window_start = 0;
  Verdict verdict = Verdict::normal;
  features::IncidentClass incident = features::IncidentClass::normal;
  std::optional<RootCause> root_cause;  // present iff verdict is fault
  bool step2_invoked = false;
  bool weather_suspected = false;       // set by external link monitoring
  double identification_latency = 0;    // seconds, whole decision path
  double step1_seconds = 0;
  double step2_seconds = 0;

  /// Step 2 label for fault verdicts (1 or 2), else 0.
  int fault_class() const { return features::step2_label(incident); }
};

/// Counts model evaluations; lets callers observe the Step 2 short-circuit.
struct InvocationCounter {
  std::atomic<std::uint64_t> step1{0};
  std::atomic<std::uint64_t> step2{0};
};

inline Diagnosis diagnose(const PipelineModel& pipeline, const features::FeatureVector& fv,
                          const sim::Topology& topology, InvocationCounter* counter = nullptr) {
  using clock = std::chrono::steady_clock;
  Diagnosis d;
  d.window_start = fv.window_start;
  const std::span<const double> x(fv.values);
  const auto t0 = clock::now();
  if (counter) ++counter->step1;
  const int first = pipeline.step1.predict(x);
  const auto t1 = clock::now();
  d.step1_seconds = std::chrono::duration<double>(t1 - t0).count();
  if (first != 0) {
    d.verdict = Verdict::intrusion;
    d.incident = features::incident_from_step1(first);
  } else {
    d.step2_invoked = true;
    if (counter) ++counter->step2;
    const int second = pipeline.step2.predict(x);
    d.step2_seconds = std::chrono::duration<double>(clock::now() - t1).count();
    d.incident = features::incident_from_step2(second);
    if (second != 0) {
      d.verdict = Verdict::fault;
      d.root_cause = localize(second, topology);
    }
  }
  d.identification_latency = std::chrono::duration<double>(clock::now() - t0).count();
  return d;
}

/// Flat label implied by a diagnosis.
inline int flat_label(const Diagnosis& d) { return static_cast<int>(d.incident); }

/// Diagnosis as JSON; latency fields only when `with_timing` is set.
inline nlohmann::json to_json(const Diagnosis& d, bool with_timing = true) {
  nlohmann::json j{{"window_start", d.window_start},
                   {"verdict", to_string(d.verdict)},
                   {"class", features::name(d.incident)},
                   {"step2_invoked", d.step2_invoked},
                   {"weather_suspected", d.weather_suspected}};
  j["root_cause"] = d.root_cause ? to_json(*d.root_cause) : nlohmann::json(nullptr);
  if (with_timing) {
    j["identification_latency"] = d.identification_latency;
    j["step1_seconds"] = d.step1_seconds;
    j["step2_seconds"] = d.step2_seconds;
  }
  return j;
}

inline Diagnosis diagnosis_from_json(const nlohmann::json& j) {
  try {
    Diagnosis d;
    d.window_start = j.value("window_start", std::int64_t{0});
    const auto verdict = j.at("verdict").get<std::string>();
    if (verdict == "normal") d.verdict = Verdict::normal;
    else if (verdict == "intrusion") d.verdict = Verdict::intrusion;
    else if (verdict == "fault") d.verdict = Verdict::fault;
    else throw ValidationError("verdict", "unknown verdict '" + verdict + "'");
    d.incident = features::parse_incident(j.at("class").get<std::string>());
    if (j.contains("root_cause") && !j["root_cause"].is_null()) d.root_cause = root_cause_from_json(j["root_cause"]);
    d.step2_invoked = j.value("step2_invoked", false);
    d.weather_suspected = j.value("weather_suspected", false);
    d.identification_latency = j.value("identification_latency", 0.0);
    d.step1_seconds = j.value("step1_seconds", 0.0);
    d.step2_seconds = j.value("step2_seconds", 0.0);
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("diagnosis", e.what());
  }
}

// ---------------------------------------------------------------------------
// Pipeline documents

inline nlohmann::json to_json(const PipelineModel& m) {
  return {{"format", "sicn-pipeline"}, {"version", 1}, {"step1", learn::to_json(m.step1)}, {"step2", learn::to_json(m.step2)}};
}

inline PipelineModel pipeline_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "sicn-pipeline") throw ValidationError("format", "not a pipeline document");
    if (j.at("version").get<int>() != 1) throw ValidationError("version", "unsupported pipeline format version");
    PipelineModel m{learn::model_from_json(j.at("step1")), learn::model_from_json(j.at("step2"))};
    for (int l : m.step1.classes())
      if (l < 0 || l > kStep1MaxLabel) throw ValidationError("step1", "class outside 0..3");
    for (int l : m.step2.classes())
      if (l < 0 || l > kStep2MaxLabel) throw ValidationError("step2", "class outside 0..2");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("pipeline", e.what());
  }
}

}  // namespace sicn::hierarchy
