// sicn: simulate, featurize, train, evaluate, compare, diagnose and plan
// mitigations for BGP incident experiments.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "sicn/sicn.hpp"

namespace {

using namespace sicn;

struct CommonFlags {
  std::string config = std::string(SICN_CONFIG_DIR) + "/default_experiment.json";
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> window_seconds;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "override the config seed");
  cmd->add_option("--window-seconds", f.window_seconds, "override the window length");
  cmd->add_option("--out", f.out, "override the output directory");
}

experiment::ExperimentConfig load(const CommonFlags& f) {
  auto cfg = experiment::load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.window_seconds) cfg.window_seconds = *f.window_seconds;
  if (f.out) cfg.output = *f.out;
  cfg.validate();
  return cfg;
}

int evaluate_single(const std::string& model_path, const std::string& data_path) {
  std::ifstream in(model_path);
  if (!in) throw Error("cannot read '" + model_path + "'");
  const auto doc = nlohmann::json::parse(in);
  const auto data = experiment::read_dataset_file(data_path);
  learn::EvalMetrics m;
  if (doc.value("format", std::string()) == "sicn-pipeline") {
    const auto pipeline = hierarchy::pipeline_from_json(doc);
    std::vector<int> predicted(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) predicted[i] = hierarchy::predict_flat(pipeline, data.row(i));
    m = learn::score_predictions(data.class_set(), data.labels(), predicted);
  } else {
    const auto model = learn::model_from_json(doc);
    auto classes = model.classes();
    for (int c : data.class_set())
      if (std::find(classes.begin(), classes.end(), c) == classes.end()) classes.push_back(c);
    std::sort(classes.begin(), classes.end());
    m = learn::score_predictions(classes, data.labels(), model.predict_all(data));
  }
  std::cout << experiment::to_json(m).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical BGP incident identification experiments"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* run = app.add_subcommand("run", "every stage, in order");
  auto* simulate = app.add_subcommand("simulate", "generate the BGP stream and ground truth");
  auto* featurize = app.add_subcommand("featurize", "window the stream into labeled feature tables");
  auto* train = app.add_subcommand("train", "train hierarchical and flat models");
  auto* evaluate = app.add_subcommand("evaluate", "score the trained models on the held-out split");
  auto* compare = app.add_subcommand("compare", "hierarchical vs flat comparison report");
  auto* pipeline = app.add_subcommand("pipeline", "diagnose the held-out windows");
  auto* mitigate = app.add_subcommand("mitigate", "plan mitigations for every diagnosed incident");
  for (auto* c : {run, simulate, featurize, train, evaluate, compare, pipeline, mitigate}) add_common(c, flags);

  std::string model_path, data_path;
  auto* model_opt = evaluate->add_option("--model", model_path, "score one model or pipeline JSON ...");
  auto* data_opt = evaluate->add_option("--data", data_path, "... on one labeled feature CSV");
  model_opt->needs(data_opt);
  data_opt->needs(model_opt);

  CLI11_PARSE(app, argc, argv);

  std::string stage = "config";
  try {
    if (evaluate->parsed() && !model_path.empty()) {
      stage = "evaluate";
      return evaluate_single(model_path, data_path);
    }
    const auto cfg = load(flags);
    const auto topology = experiment::prepare(cfg);
    if (run->parsed()) {
      const auto r = experiment::run_experiment(cfg, &std::cerr);
      hierarchy::write_comparison_csv(std::cout, r.comparison);
      std::cerr << "outputs in " << cfg.output.string() << '\n';
    } else if (simulate->parsed()) {
      stage = "simulate";
      const auto truth = experiment::simulate(cfg, topology);
      std::cerr << truth.size() << " ground-truth intervals\n";
    } else if (featurize->parsed()) {
      stage = "featurize";
      std::cerr << experiment::featurize(cfg).size() << " windows\n";
    } else if (train->parsed()) {
      stage = "train";
      experiment::train(cfg);
    } else if (evaluate->parsed()) {
      stage = "evaluate";
      experiment::evaluate(cfg);
      std::ifstream in(experiment::OutputPaths{cfg.output}.metrics_csv());
      std::cout << in.rdbuf();
    } else if (compare->parsed()) {
      stage = "compare";
      hierarchy::write_comparison_csv(std::cout, experiment::compare(cfg));
    } else if (pipeline->parsed()) {
      stage = "pipeline";
      const auto d = experiment::diagnose_test_windows(cfg, topology);
      std::cerr << d.diagnoses.size() << " windows diagnosed, Step 2 ran " << d.step2_invocations << " times\n";
    } else if (mitigate->parsed()) {
      stage = "mitigate";
      std::cerr << experiment::mitigate_diagnoses(cfg, topology).size() << " plans\n";
    }
  } catch (const experiment::StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: stage '" << stage << "': " << e.what() << '\n';
    return 2;
  }
  return 0;
}
