#pragma once

// Experiment stages. Each stage reads its inputs from, and writes its
// outputs to, the experiment's output directory, so the CLI subcommands and
// run_experiment share one implementation:
//
//   simulate   stream.mrt / stream.txt, ground_truth.csv
//   featurize  features.csv (six-class labels), ni.csv (Step 1), na.csv (Step 2)
//   train      models/<alg>_pipeline.json, models/<alg>_flat.json, timing.json
//   evaluate   metrics.csv, metrics.json
//   compare    comparison.csv, comparison.json
//   pipeline   diagnoses.jsonl (held-out windows), latency.json
//   mitigate   mitigations.jsonl (plans for every non-normal diagnosis)
//
// Wall-clock measurements only appear in timing.json, latency.json and the
// time columns of the comparison report.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sicn/bgp/mrt.hpp"
#include "sicn/bgp/text_format.hpp"
#include "sicn/error.hpp"
#include "sicn/experiment/config.hpp"
#include "sicn/features/dataset_csv.hpp"
#include "sicn/features/extract.hpp"
#include "sicn/features/labels.hpp"
#include "sicn/hierarchy/compare.hpp"
#include "sicn/hierarchy/flat.hpp"
#include "sicn/hierarchy/pipeline.hpp"
#include "sicn/learn/model.hpp"
#include "sicn/learn/split.hpp"
#include "sicn/mitigate/plan.hpp"
#include "sicn/sim/generator.hpp"
#include "sicn/sim/topology.hpp"

namespace sicn::experiment {

/// A failure inside a named stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("stage '" + stage + "': " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct OutputPaths {
  std::filesystem::path dir;

  std::filesystem::path stream_mrt() const { return dir / "stream.mrt"; }
  std::filesystem::path stream_text() const { return dir / "stream.txt"; }
  std::filesystem::path ground_truth() const { return dir / "ground_truth.csv"; }
  std::filesystem::path features() const { return dir / "features.csv"; }
  std::filesystem::path ni() const { return dir / "ni.csv"; }
  std::filesystem::path na() const { return dir / "na.csv"; }
  std::filesystem::path models() const { return dir / "models"; }
  std::filesystem::path pipeline_model(const std::string& alg) const { return models() / (alg + "_pipeline.json"); }
  std::filesystem::path flat_model(const std::string& alg) const { return models() / (alg + "_flat.json"); }
  std::filesystem::path timing() const { return dir / "timing.json"; }
  std::filesystem::path metrics_csv() const { return dir / "metrics.csv"; }
  std::filesystem::path metrics_json() const { return dir / "metrics.json"; }
  std::filesystem::path comparison_csv() const { return dir / "comparison.csv"; }
  std::filesystem::path comparison_json() const { return dir / "comparison.json"; }
  std::filesystem::path diagnoses() const { return dir / "diagnoses.jsonl"; }
  std::filesystem::path latency() const { return dir / "latency.json"; }
  std::filesystem::path mitigations() const { return dir / "mitigations.jsonl"; }
};

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p, bool binary = false) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  return out;
}

inline std::ifstream open_in(const std::filesystem::path& p, bool binary = false) {
  std::ifstream in(p, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error("cannot read '" + p.string() + "' (run the earlier stage first)");
  return in;
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  auto out = open_out(p);
  out << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::filesystem::path& p) {
  auto in = open_in(p);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("'" + p.string() + "' is not valid JSON: " + e.what());
  }
}

template <class F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Datasets

inline learn::Dataset to_dataset(std::span<const features::FeatureVector> rows) {
  learn::Dataset d(features::kFeatureCount);
  for (const auto& r : rows) {
    if (!r.label) throw ValidationError("dataset", "row at t=" + std::to_string(r.window_start) + " has no label");
    d.add(r.values, *r.label, r.window_start);
  }
  return d;
}

inline std::vector<features::FeatureVector> to_rows(const learn::Dataset& d) {
  std::vector<features::FeatureVector> rows(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    rows[i].window_start = d.key(i);
    std::copy(d.row(i).begin(), d.row(i).end(), rows[i].values.begin());
    rows[i].label = d.label(i);
  }
  return rows;
}

inline void write_dataset_file(const std::filesystem::path& p, std::span<const features::FeatureVector> rows) {
  auto out = detail::open_out(p);
  features::write_dataset(out, rows);
}

inline learn::Dataset read_dataset_file(const std::filesystem::path& p) {
  auto in = detail::open_in(p);
  try {
    auto table = features::read_dataset(in);
    if (!table.has_labels) throw ValidationError("dataset", "'" + p.string() + "' has no label column");
    return to_dataset(table.rows);
  } catch (const ParseError& e) {
    throw Error("'" + p.string() + "': " + e.what());
  }
}

/// The held-out split shared by every algorithm: the combined six-class data
/// rebuilt from ni.csv and na.csv, split with the config's split seed. Step 1
/// trains on the training rows from ni.csv, Step 2 on those from na.csv.
struct ExperimentSplit {
  learn::Dataset flat;
  learn::SplitResult split;
  std::vector<std::uint8_t> train_source;
  std::vector<std::uint8_t> test_source;

  learn::Dataset step1_train() const { return hierarchy::source_rows(split.train, train_source, hierarchy::kFromStep1); }
  learn::Dataset step2_train() const { return hierarchy::source_rows(split.train, train_source, hierarchy::kFromStep2); }
};

inline ExperimentSplit load_split(const ExperimentConfig& cfg) {
  const OutputPaths out{cfg.output};
  ExperimentSplit s;
  auto combined = hierarchy::combine_sources(read_dataset_file(out.ni()), read_dataset_file(out.na()));
  s.flat = std::move(combined.flat);
  s.split = learn::stratified_split(s.flat, cfg.train_fraction, cfg.split_seed());
  if (s.split.test.empty()) throw ValidationError("train_fraction", "test split is empty");
  for (auto i : s.split.train_indices) s.train_source.push_back(combined.source[i]);
  for (auto i : s.split.test_indices) s.test_source.push_back(combined.source[i]);
  return s;
}

// ---------------------------------------------------------------------------
// simulate + featurize

using RecordSink = std::function<void(bgp::BgpUpdateRecord&&)>;

/// Generates the scenario stream, writes the configured stream files and the
/// ground truth, and forwards every record to `also` when given.
inline std::vector<features::GroundTruthInterval> simulate(const ExperimentConfig& cfg, const sim::Topology& topology,
                                                           const RecordSink& also = nullptr) {
  return detail::in_stage("simulate", [&] {
    const OutputPaths out{cfg.output};
    std::filesystem::create_directories(out.dir);
    auto scenario = cfg.scenario;
    scenario.gen.seed = cfg.simulation_seed();
    std::optional<std::ofstream> mrt, text;
    if (cfg.write_mrt) mrt.emplace(detail::open_out(out.stream_mrt(), true));
    if (cfg.write_text) text.emplace(detail::open_out(out.stream_text()));
    std::vector<std::uint8_t> buffer;
    auto truth = sim::generate_stream(topology, scenario, [&](bgp::BgpUpdateRecord&& r) {
      if (mrt) {
        buffer.clear();
        bgp::append_mrt(buffer, r);
        mrt->write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
      }
      if (text) bgp::write_update_lines(*text, r);
      if (also) also(std::move(r));
    });
    auto gt = detail::open_out(out.ground_truth());
    features::write_ground_truth(gt, truth);
    return truth;
  });
}

/// Labels and quantizes extracted windows, then writes features.csv and the
/// two row-disjoint source datasets ni.csv and na.csv. Returned rows hold
/// exactly the values written.
inline std::vector<features::FeatureVector> write_feature_sets(const ExperimentConfig& cfg,
                                                               std::vector<features::FeatureVector> windows,
                                                               std::span<const features::GroundTruthInterval> truth) {
  const OutputPaths out{cfg.output};
  features::label_windows(windows, truth, cfg.window_seconds);
  for (auto& w : windows)
    for (auto& v : w.values) v = features::quantize_value(v);
  write_dataset_file(out.features(), windows);
  const auto [ni, na] = hierarchy::partition_sources(to_dataset(windows));
  write_dataset_file(out.ni(), to_rows(ni));
  write_dataset_file(out.na(), to_rows(na));
  return windows;
}

/// Featurizes the stream files written by `simulate` (MRT preferred).
inline std::vector<features::FeatureVector> featurize(const ExperimentConfig& cfg) {
  return detail::in_stage("featurize", [&] {
    const OutputPaths out{cfg.output};
    std::vector<features::FeatureVector> windows;
    features::FeatureExtractor extractor(cfg.window_seconds, cfg.start_time(),
                                         [&](features::FeatureVector&& fv) { windows.push_back(std::move(fv)); });
    if (std::filesystem::exists(out.stream_mrt())) {
      auto in = detail::open_in(out.stream_mrt(), true);
      bgp::MrtReader reader(bgp::StreamSource{&in});
      while (auto r = reader.next()) extractor.push(std::move(*r));
      if (reader.error()) throw ParseError(reader.error()->offset, reader.error()->message);
    } else if (std::filesystem::exists(out.stream_text())) {
      auto in = detail::open_in(out.stream_text());
      bgp::read_update_lines(in, [&](bgp::BgpUpdateRecord&& r) { extractor.push(std::move(r)); });
    } else {
      throw Error("no stream file in '" + out.dir.string() + "' (enable stream_formats and run simulate)");
    }
    extractor.finish();
    auto gt = detail::open_in(out.ground_truth());
    const auto truth = features::read_ground_truth(gt);
    return write_feature_sets(cfg, std::move(windows), truth);
  });
}

/// simulate and featurize in one pass over the generated stream.
inline std::vector<features::FeatureVector> simulate_and_featurize(const ExperimentConfig& cfg,
                                                                   const sim::Topology& topology) {
  std::vector<features::FeatureVector> windows;
  features::FeatureExtractor extractor(cfg.window_seconds, cfg.start_time(),
                                       [&](features::FeatureVector&& fv) { windows.push_back(std::move(fv)); });
  const auto truth = simulate(cfg, topology, [&](bgp::BgpUpdateRecord&& r) { extractor.push(std::move(r)); });
  return detail::in_stage("featurize", [&] {
    extractor.finish();
    return write_feature_sets(cfg, std::move(windows), truth);
  });
}

// ---------------------------------------------------------------------------
// train

struct TrainingTimes {
  std::string algorithm;
  double step1_seconds = 0;
  double step2_seconds = 0;
  double flat_seconds = 0;
};

inline std::vector<TrainingTimes> train(const ExperimentConfig& cfg) {
  return detail::in_stage("train", [&] {
    const OutputPaths out{cfg.output};
    const auto s = load_split(cfg);
    const auto ni_train = s.step1_train();
    const auto na_train = s.step2_train();
    std::vector<TrainingTimes> times;
    nlohmann::json timing = nlohmann::json::object();
    for (const auto& a : cfg.algorithms) {
      const auto pipeline = hierarchy::train_pipeline(ni_train, na_train, cfg.pipeline_spec(a));
      const auto flat = learn::fit(cfg.flat_spec(a), s.split.train);
      detail::write_json(out.pipeline_model(a.name()), hierarchy::to_json(pipeline));
      detail::write_json(out.flat_model(a.name()), learn::to_json(flat));
      times.push_back({a.name(), pipeline.step1.training_seconds, pipeline.step2.training_seconds, flat.training_seconds});
      timing[a.name()] = {{"step1_seconds", pipeline.step1.training_seconds},
                          {"step2_seconds", pipeline.step2.training_seconds},
                          {"hier_seconds", pipeline.training_seconds()},
                          {"flat_seconds", flat.training_seconds}};
    }
    detail::write_json(out.timing(), {{"training", timing}});
    return times;
  });
}

// ---------------------------------------------------------------------------
// evaluate

inline nlohmann::json to_json(const learn::EvalMetrics& m) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& c : m.per_class)
    per_class.push_back({{"label", c.label},
                         {"precision", c.precision},
                         {"recall", c.recall},
                         {"f1", c.f1},
                         {"support", c.support}});
  return {{"accuracy", m.accuracy}, {"macro_f1", m.macro_f1}, {"classes", m.classes},
          {"per_class", per_class}, {"confusion", m.confusion}};
}

struct AlgorithmMetrics {
  std::string algorithm;
  hierarchy::PipelineEvaluation hier;
  learn::EvalMetrics flat;
};

inline std::vector<AlgorithmMetrics> evaluate(const ExperimentConfig& cfg) {
  return detail::in_stage("evaluate", [&] {
    const OutputPaths out{cfg.output};
    const auto s = load_split(cfg);
    std::vector<AlgorithmMetrics> all;
    nlohmann::json doc = nlohmann::json::array();
    auto csv = detail::open_out(out.metrics_csv());
    csv << "algorithm,step1_accuracy,step1_f1,step2_accuracy,step2_f1,hier_accuracy,hier_f1,flat_accuracy,flat_f1\n";
    for (const auto& a : cfg.algorithms) {
      AlgorithmMetrics m;
      m.algorithm = a.name();
      const auto pipeline = hierarchy::pipeline_from_json(detail::read_json(out.pipeline_model(a.name())));
      const auto flat = learn::model_from_json(detail::read_json(out.flat_model(a.name())));
      m.hier = hierarchy::evaluate_pipeline(pipeline, s.split.test, s.flat.class_set(), s.test_source);
      m.flat = learn::score_predictions(s.flat.class_set(), s.split.test.labels(), flat.predict_all(s.split.test));
      using hierarchy::format_metric;
      csv << m.algorithm << ',' << format_metric(m.hier.step1.accuracy) << ',' << format_metric(m.hier.step1.macro_f1)
          << ',' << format_metric(m.hier.step2.accuracy) << ',' << format_metric(m.hier.step2.macro_f1) << ','
          << format_metric(m.hier.end_to_end.accuracy) << ',' << format_metric(m.hier.end_to_end.macro_f1) << ','
          << format_metric(m.flat.accuracy) << ',' << format_metric(m.flat.macro_f1) << '\n';
      doc.push_back({{"algorithm", m.algorithm},
                     {"step1", to_json(m.hier.step1)},
                     {"step2", to_json(m.hier.step2)},
                     {"hierarchical", to_json(m.hier.end_to_end)},
                     {"flat", to_json(m.flat)}});
      all.push_back(std::move(m));
    }
    detail::write_json(out.metrics_json(),
                       {{"test_windows", s.split.test.size()}, {"train_windows", s.split.train.size()}, {"metrics", doc}});
    return all;
  });
}

// ---------------------------------------------------------------------------
// compare

inline hierarchy::ComparisonReport compare(const ExperimentConfig& cfg) {
  return detail::in_stage("compare", [&] {
    const OutputPaths out{cfg.output};
    const auto metrics = detail::read_json(out.metrics_json()).at("metrics");
    const auto timing = detail::read_json(out.timing()).at("training");
    std::vector<std::pair<std::string, hierarchy::SideResult>> hier, flat;
    for (const auto& m : metrics) {
      const auto name = m.at("algorithm").get<std::string>();
      const auto& t = timing.at(name);
      hier.push_back({name,
                      {m.at("hierarchical").at("accuracy").get<double>(), m.at("hierarchical").at("macro_f1").get<double>(),
                       t.at("hier_seconds").get<double>()}});
      flat.push_back({name,
                      {m.at("flat").at("accuracy").get<double>(), m.at("flat").at("macro_f1").get<double>(),
                       t.at("flat_seconds").get<double>()}});
    }
    auto report = hierarchy::compare(hier, flat);
    auto csv = detail::open_out(out.comparison_csv());
    hierarchy::write_comparison_csv(csv, report);
    detail::write_json(out.comparison_json(), hierarchy::to_json(report));
    return report;
  });
}

// ---------------------------------------------------------------------------
// pipeline (diagnosis of held-out windows)

struct DiagnosisRun {
  std::vector<hierarchy::Diagnosis> diagnoses;
  std::vector<int> truth;  // flat labels
  std::uint64_t step2_invocations = 0;
};

inline DiagnosisRun diagnose_test_windows(const ExperimentConfig& cfg, const sim::Topology& topology) {
  return detail::in_stage("pipeline", [&] {
    const OutputPaths out{cfg.output};
    const auto s = load_split(cfg);
    const auto name = std::string(learn::algorithm_name(cfg.diagnose_algorithm));
    const auto pipeline = hierarchy::pipeline_from_json(detail::read_json(out.pipeline_model(name)));
    hierarchy::InvocationCounter counter;
    DiagnosisRun run;
    auto log = detail::open_out(out.diagnoses());
    double latency_sum = 0, latency_max = 0;
    for (std::size_t i = 0; i < s.split.test.size(); ++i) {
      features::FeatureVector fv;
      fv.window_start = s.split.test.key(i);
      std::copy(s.split.test.row(i).begin(), s.split.test.row(i).end(), fv.values.begin());
      auto d = hierarchy::diagnose(pipeline, fv, topology, &counter);
      auto j = hierarchy::to_json(d, false);
      j["truth"] = features::name(features::incident_from_label(s.split.test.label(i)));
      log << j.dump() << '\n';
      latency_sum += d.identification_latency;
      latency_max = std::max(latency_max, d.identification_latency);
      run.truth.push_back(s.split.test.label(i));
      run.diagnoses.push_back(std::move(d));
    }
    run.step2_invocations = counter.step2;
    const double n = static_cast<double>(run.diagnoses.size());
    detail::write_json(out.latency(), {{"algorithm", name},
                                       {"windows", run.diagnoses.size()},
                                       {"step2_invocations", run.step2_invocations},
                                       {"mean_identification_latency", n > 0 ? latency_sum / n : 0.0},
                                       {"max_identification_latency", latency_max}});
    return run;
  });
}

// ---------------------------------------------------------------------------
// mitigate

inline std::vector<mitigate::MitigationPlan> mitigate_diagnoses(const ExperimentConfig& cfg,
                                                                const sim::Topology& topology) {
  return detail::in_stage("mitigate", [&] {
    const OutputPaths out{cfg.output};
    auto in = detail::open_in(out.diagnoses());
    auto log = detail::open_out(out.mitigations());
    std::vector<mitigate::MitigationPlan> plans;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line_no, "diagnoses line " + std::to_string(line_no) + ": " + e.what());
      }
      const auto d = hierarchy::diagnosis_from_json(j);
      if (d.verdict == hierarchy::Verdict::normal) continue;
      auto p = mitigate::plan(d, topology);
      log << mitigate::to_json(p).dump() << '\n';
      plans.push_back(std::move(p));
    }
    return plans;
  });
}

// ---------------------------------------------------------------------------
// run

/// Loads the topology and checks the scenario against it.
inline sim::Topology prepare(const ExperimentConfig& cfg) {
  return detail::in_stage("config", [&] {
    cfg.validate();
    auto topology = sim::load_topology(cfg.topology);
    sim::validate(cfg.scenario, topology);
    return topology;
  });
}

struct ExperimentResult {
  std::size_t windows = 0;
  std::vector<AlgorithmMetrics> metrics;
  hierarchy::ComparisonReport comparison;
  DiagnosisRun diagnoses;
  std::vector<mitigate::MitigationPlan> plans;
};

/// Every stage in order; outputs land in cfg.output.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* progress = nullptr) {
  const auto topology = prepare(cfg);
  auto note = [&](const std::string& s) {
    if (progress) *progress << s << std::endl;
  };
  ExperimentResult r;
  note("simulate + featurize");
  r.windows = simulate_and_featurize(cfg, topology).size();
  note("train (" + std::to_string(r.windows) + " windows)");
  train(cfg);
  note("evaluate");
  r.metrics = evaluate(cfg);
  note("compare");
  r.comparison = compare(cfg);
  note("pipeline");
  r.diagnoses = diagnose_test_windows(cfg, topology);
  note("mitigate");
  r.plans = mitigate_diagnoses(cfg, topology);
  return r;
}

}  // namespace sicn::experiment
