#pragma once

// Experiment configuration (JSON).
//
//   {
//     "topology": "default",                  // or a path
//     "scenario": "scenarios/small.json",     // path or inline scenario object
//     "window_seconds": 60,
//     "t0": 0,                                // optional, defaults to the scenario start
//     "seed": 42,
//     "train_fraction": 0.6,
//     "algorithms": ["gaussian_nb", {"name": "random_forest", "step1": {...}, "step2": {...}, "flat": {...}}],
//     "diagnose_algorithm": "random_forest",
//     "stream_formats": ["mrt"],              // any of "mrt", "text"; [] keeps the stream in memory
//     "output": "out"
//   }
//
// Relative paths resolve against the config file's directory. Every random
// stream derives from `seed`:
//   simulation       derive_seed(seed, "simulate")
//   train/test split derive_seed(seed, "split")
//   pipeline <alg>   derive_seed(seed, "pipeline/<alg>"), then "step1" / "step2"
//   flat <alg>       derive_seed(seed, "flat/<alg>")

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sicn/error.hpp"
#include "sicn/hierarchy/pipeline.hpp"
#include "sicn/learn/model.hpp"
#include "sicn/rng.hpp"
#include "sicn/sim/scenario.hpp"
#include "sicn/sim/topology.hpp"

namespace sicn::experiment {

struct AlgorithmConfig {
  learn::Algorithm algorithm = learn::Algorithm::random_forest;
  hierarchy::Hyperparameters step1;  // overrides of the per-step defaults
  hierarchy::Hyperparameters step2;
  hierarchy::Hyperparameters flat;   // overrides applied on top of the Step 1 set

  std::string name() const { return std::string(learn::algorithm_name(algorithm)); }
};

struct ExperimentConfig {
  std::string topology = "default";
  sim::Scenario scenario;
  std::int64_t window_seconds = 60;
  std::optional<std::int64_t> t0;
  std::uint64_t seed = 0;
  double train_fraction = 0.6;
  std::vector<AlgorithmConfig> algorithms;
  learn::Algorithm diagnose_algorithm = learn::Algorithm::random_forest;
  bool write_mrt = true;
  bool write_text = false;
  std::filesystem::path output = "out";

  std::int64_t start_time() const { return t0.value_or(scenario.start); }
  std::uint64_t simulation_seed() const { return derive_seed(seed, "simulate"); }
  std::uint64_t split_seed() const { return derive_seed(seed, "split"); }

  hierarchy::PipelineSpec pipeline_spec(const AlgorithmConfig& a) const {
    return {a.algorithm, a.step1, a.step2, derive_seed(seed, "pipeline/" + a.name())};
  }

  /// The flat baseline uses the Step 1 hyperparameters plus `flat` overrides.
  learn::ModelSpec flat_spec(const AlgorithmConfig& a) const {
    auto params = hierarchy::default_hyperparameters(a.algorithm, 1);
    for (const auto& [k, v] : a.step1) params[k] = v;
    for (const auto& [k, v] : a.flat) params[k] = v;
    return learn::ModelSpec(a.algorithm, params, derive_seed(seed, "flat/" + a.name()));
  }

  const AlgorithmConfig* find(learn::Algorithm a) const {
    for (const auto& x : algorithms)
      if (x.algorithm == a) return &x;
    return nullptr;
  }

  /// Fail-fast checks run before any stage.
  void validate() const {
    if (window_seconds <= 0) throw ValidationError("window_seconds", "must be positive");
    if (!(train_fraction > 0 && train_fraction < 1)) throw ValidationError("train_fraction", "must lie in (0, 1)");
    if (algorithms.empty()) throw ValidationError("algorithms", "at least one algorithm is required");
    for (std::size_t i = 0; i < algorithms.size(); ++i)
      for (std::size_t j = i + 1; j < algorithms.size(); ++j)
        if (algorithms[i].algorithm == algorithms[j].algorithm)
          throw ValidationError("algorithms", "'" + algorithms[i].name() + "' listed twice");
    for (const auto& a : algorithms) {
      (void)pipeline_spec(a).step_spec(1);
      (void)pipeline_spec(a).step_spec(2);
      (void)flat_spec(a);
    }
    if (!find(diagnose_algorithm))
      throw ValidationError("diagnose_algorithm",
                            "'" + std::string(learn::algorithm_name(diagnose_algorithm)) + "' is not in algorithms");
    if (start_time() > scenario.start) throw ValidationError("t0", "must not be after the scenario start");
  }
};

namespace detail {

inline hierarchy::Hyperparameters read_hyperparameters(const nlohmann::json& j, const std::string& field) {
  hierarchy::Hyperparameters out;
  if (j.is_null()) return out;
  if (!j.is_object()) throw ValidationError(field, "must be an object of name -> number");
  for (const auto& [key, value] : j.items()) {
    if (value.is_boolean()) out[key] = value.get<bool>() ? 1.0 : 0.0;
    else if (value.is_number()) out[key] = value.get<double>();
    else throw ValidationError(field + "." + key, "must be a number or boolean");
  }
  return out;
}

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p == "default") return p;
  std::filesystem::path path(p);
  return path.is_absolute() ? path.string() : (base / path).lexically_normal().string();
}

}  // namespace detail

/// Parses a config document; `base` anchors relative paths.
inline ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base = ".") {
  ExperimentConfig c;
  std::string where = "config";
  try {
    for (const auto& [key, value] : doc.items()) {
      static const char* known[] = {"topology", "scenario", "window_seconds", "t0", "seed", "train_fraction",
                                    "algorithms", "diagnose_algorithm", "stream_formats", "output"};
      if (std::find(std::begin(known), std::end(known), key) == std::end(known))
        throw ValidationError(key, "unknown config key");
    }
    where = "topology";
    c.topology = detail::resolve(base, doc.value("topology", std::string("default")));
    where = "scenario";
    const auto& sc = doc.at("scenario");
    if (sc.is_string()) {
      c.scenario = sim::load_scenario(detail::resolve(base, sc.get<std::string>()));
    } else {
      c.scenario = sim::scenario_from_json(sc);
    }
    where = "window_seconds";
    c.window_seconds = doc.value("window_seconds", std::int64_t{60});
    where = "t0";
    if (doc.contains("t0") && !doc["t0"].is_null()) c.t0 = doc["t0"].get<std::int64_t>();
    where = "seed";
    c.seed = doc.value("seed", std::uint64_t{0});
    where = "train_fraction";
    c.train_fraction = doc.value("train_fraction", 0.6);
    where = "algorithms";
    for (const auto& a : doc.at("algorithms")) {
      AlgorithmConfig ac;
      if (a.is_string()) {
        ac.algorithm = learn::parse_algorithm(a.get<std::string>());
      } else {
        ac.algorithm = learn::parse_algorithm(a.at("name").get<std::string>());
        for (const auto& [key, value] : a.items())
          if (key != "name" && key != "step1" && key != "step2" && key != "flat")
            throw ValidationError("algorithms." + ac.name(), "unknown key '" + key + "'");
        ac.step1 = detail::read_hyperparameters(a.value("step1", nlohmann::json()), "algorithms." + ac.name() + ".step1");
        ac.step2 = detail::read_hyperparameters(a.value("step2", nlohmann::json()), "algorithms." + ac.name() + ".step2");
        ac.flat = detail::read_hyperparameters(a.value("flat", nlohmann::json()), "algorithms." + ac.name() + ".flat");
      }
      c.algorithms.push_back(std::move(ac));
    }
    where = "diagnose_algorithm";
    c.diagnose_algorithm = learn::parse_algorithm(doc.value("diagnose_algorithm", std::string("random_forest")));
    where = "stream_formats";
    if (doc.contains("stream_formats")) {
      c.write_mrt = c.write_text = false;
      for (const auto& f : doc["stream_formats"]) {
        const auto s = f.get<std::string>();
        if (s == "mrt") c.write_mrt = true;
        else if (s == "text") c.write_text = true;
        else throw ValidationError("stream_formats", "unknown format '" + s + "'");
      }
    }
    where = "output";
    c.output = detail::resolve(base, doc.value("output", std::string("out")));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(where, e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

}  // namespace sicn::experiment
