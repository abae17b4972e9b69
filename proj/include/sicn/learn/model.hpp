#pragma once

// Algorithm-neutral model handle: spec -> fit -> predict/evaluate, plus a
// versioned JSON form.

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sicn/error.hpp"
#include "sicn/learn/boosting.hpp"
#include "sicn/learn/dataset.hpp"
#include "sicn/learn/forest.hpp"
#include "sicn/learn/knn.hpp"
#include "sicn/learn/logistic.hpp"
#include "sicn/learn/metrics.hpp"
#include "sicn/learn/naive_bayes.hpp"
#include "sicn/learn/scaler.hpp"
#include "sicn/learn/tree.hpp"

namespace sicn::learn {

enum class Algorithm { gaussian_nb, logistic, cart, random_forest, knn, gradient_boost };

inline constexpr std::array<Algorithm, 6> kAllAlgorithms = {Algorithm::gaussian_nb,   Algorithm::logistic,
                                                            Algorithm::cart,          Algorithm::random_forest,
                                                            Algorithm::knn,           Algorithm::gradient_boost};

inline std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::gaussian_nb: return "gaussian_nb";
    case Algorithm::logistic: return "logistic";
    case Algorithm::cart: return "cart";
    case Algorithm::random_forest: return "random_forest";
    case Algorithm::knn: return "knn";
    case Algorithm::gradient_boost: return "gradient_boost";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view name) {
  for (auto a : kAllAlgorithms)
    if (algorithm_name(a) == name) return a;
  throw ValidationError("algorithm", "unsupported algorithm '" + std::string(name) + "'");
}

/// Hyperparameter names accepted by each algorithm.
inline std::vector<std::string_view> hyperparameter_names(Algorithm a) {
  switch (a) {
    case Algorithm::gaussian_nb: return {"var_floor"};
    case Algorithm::logistic: return {"learning_rate", "iterations", "l2"};
    case Algorithm::cart: return {"max_depth", "min_samples_split"};
    case Algorithm::random_forest:
      return {"n_trees", "features_per_split", "bootstrap", "max_depth", "min_samples_split"};
    case Algorithm::knn: return {"k"};
    case Algorithm::gradient_boost: return {"n_rounds", "learning_rate", "max_depth", "min_child_weight", "l2"};
  }
  return {};
}

/// Algorithm choice, hyperparameters by name, and the seed for randomized
/// learners. Integer hyperparameters are stored as doubles and must be whole.
class ModelSpec {
 public:
  ModelSpec() = default;
  ModelSpec(Algorithm algorithm, std::map<std::string, double> hyperparameters = {}, std::uint64_t seed = 0)
      : algorithm_(algorithm), params_(std::move(hyperparameters)), seed_(seed) {
    const auto names = hyperparameter_names(algorithm_);
    for (const auto& [key, value] : params_) {
      if (std::find(names.begin(), names.end(), key) == names.end())
        throw ValidationError(key, "unknown hyperparameter for " + std::string(algorithm_name(algorithm_)));
      if (!std::isfinite(value)) throw ValidationError(key, "must be finite");
    }
  }

  Algorithm algorithm() const { return algorithm_; }
  std::uint64_t seed() const { return seed_; }
  const std::map<std::string, double>& hyperparameters() const { return params_; }

  double real(const std::string& name, double fallback) const {
    auto it = params_.find(name);
    return it == params_.end() ? fallback : it->second;
  }

  std::size_t count(const std::string& name, std::size_t fallback) const {
    auto it = params_.find(name);
    if (it == params_.end()) return fallback;
    if (it->second < 0 || it->second != std::floor(it->second))
      throw ValidationError(name, "must be a non-negative integer");
    return static_cast<std::size_t>(it->second);
  }

  bool flag(const std::string& name, bool fallback) const {
    auto it = params_.find(name);
    return it == params_.end() ? fallback : it->second != 0.0;
  }

 private:
  Algorithm algorithm_ = Algorithm::gaussian_nb;
  std::map<std::string, double> params_;
  std::uint64_t seed_ = 0;
};

/// Whether inputs are z-scored before fitting and prediction.
inline bool uses_standardization(Algorithm a) { return a == Algorithm::logistic || a == Algorithm::knn; }

using ModelParams = std::variant<GaussianNb, LogisticModel, CartModel, ForestModel, KnnModel, BoostedModel>;

struct TrainedModel {
  Algorithm algorithm = Algorithm::gaussian_nb;
  ModelParams params;
  std::optional<Scaler> scaler;
  double training_seconds = 0;

  const std::vector<int>& classes() const {
    return std::visit(
        [](const auto& m) -> const std::vector<int>& {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, KnnModel>)
            return m.train.class_set();
          else
            return m.classes;
        },
        params);
  }

  int predict(std::span<const double> x) const {
    if (scaler) {
      const auto z = scaler->transform(x);
      return std::visit([&](const auto& m) { return m.predict(z); }, params);
    }
    return std::visit([&](const auto& m) { return m.predict(x); }, params);
  }

  std::vector<int> predict_all(const Dataset& data) const {
    std::vector<int> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = predict(data.row(i));
    return out;
  }
};

/// Fits `spec` on `train`. The wall-clock time covers standardization and
/// fitting only.
inline TrainedModel fit(const ModelSpec& spec, const Dataset& train) {
  if (train.empty()) throw ValidationError("train", "training set is empty");
  const auto started = std::chrono::steady_clock::now();
  TrainedModel out;
  out.algorithm = spec.algorithm();
  const Dataset* data = &train;
  Dataset scaled;
  if (uses_standardization(spec.algorithm())) {
    out.scaler = Scaler::fit(train);
    scaled = out.scaler->transform(train);
    data = &scaled;
  }
  switch (spec.algorithm()) {
    case Algorithm::gaussian_nb: out.params = fit_gaussian_nb(*data, spec.real("var_floor", 1e-9)); break;
    case Algorithm::logistic: {
      LogisticOptions o;
      o.learning_rate = spec.real("learning_rate", o.learning_rate);
      o.iterations = spec.count("iterations", o.iterations);
      o.l2 = spec.real("l2", o.l2);
      out.params = fit_logistic(*data, o);
      break;
    }
    case Algorithm::cart: {
      TreeOptions o;
      o.max_depth = spec.count("max_depth", o.max_depth);
      o.min_samples_split = spec.count("min_samples_split", o.min_samples_split);
      out.params = fit_cart(*data, o);
      break;
    }
    case Algorithm::random_forest: {
      ForestOptions o;
      o.n_trees = spec.count("n_trees", o.n_trees);
      o.features_per_split = spec.count("features_per_split", o.features_per_split);
      o.bootstrap = spec.flag("bootstrap", o.bootstrap);
      o.max_depth = spec.count("max_depth", o.max_depth);
      o.min_samples_split = spec.count("min_samples_split", o.min_samples_split);
      o.seed = spec.seed();
      out.params = fit_random_forest(*data, o);
      break;
    }
    case Algorithm::knn: out.params = fit_knn(*data, spec.count("k", 5)); break;
    case Algorithm::gradient_boost: {
      BoostOptions o;
      o.n_rounds = spec.count("n_rounds", o.n_rounds);
      o.learning_rate = spec.real("learning_rate", o.learning_rate);
      o.max_depth = spec.count("max_depth", o.max_depth);
      o.min_child_weight = spec.real("min_child_weight", o.min_child_weight);
      o.l2 = spec.real("l2", o.l2);
      out.params = fit_gradient_boost(*data, o);
      break;
    }
  }
  out.training_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

/// Scores `model` on `test` over the model's class set.
inline EvalMetrics evaluate(const TrainedModel& model, const Dataset& test) {
  if (test.empty()) throw ValidationError("test", "test set is empty");
  auto m = score_predictions(model.classes(), test.labels(), model.predict_all(test));
  m.training_seconds = model.training_seconds;
  return m;
}

// ---------------------------------------------------------------------------
// JSON

inline constexpr std::string_view kModelFormat = "sicn-model";
inline constexpr int kModelFormatVersion = 1;

namespace detail {

using nlohmann::json;

inline json class_tree_json(const ClassTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.class_index});
  return nodes;
}

inline ClassTree class_tree_from(const json& j) {
  ClassTree t;
  for (const auto& n : j)
    t.nodes.push_back({n.at(0).get<std::int32_t>(), n.at(1).get<double>(), n.at(2).get<std::int32_t>(),
                       n.at(3).get<std::int32_t>(), n.at(4).get<std::uint32_t>()});
  return t;
}

inline json regression_tree_json(const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  return nodes;
}

inline RegressionTree regression_tree_from(const json& j) {
  RegressionTree t;
  for (const auto& n : j)
    t.nodes.push_back({n.at(0).get<std::int32_t>(), n.at(1).get<double>(), n.at(2).get<std::int32_t>(),
                       n.at(3).get<std::int32_t>(), n.at(4).get<double>()});
  return t;
}

/// Checks that every tree node index is in range and children follow parents.
template <class Tree>
void check_tree(const Tree& t, std::size_t features, std::size_t classes) {
  if (t.nodes.empty()) throw ValidationError("model", "tree without nodes");
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const auto& n = t.nodes[i];
    if (n.feature < 0) {
      if constexpr (std::is_same_v<Tree, ClassTree>)
        if (n.class_index >= classes) throw ValidationError("model", "leaf class index out of range");
      continue;
    }
    const auto size = static_cast<std::int64_t>(t.nodes.size());
    if (static_cast<std::size_t>(n.feature) >= features || n.left <= static_cast<std::int64_t>(i) ||
        n.right <= static_cast<std::int64_t>(i) || n.left >= size || n.right >= size)
      throw ValidationError("model", "malformed tree node " + std::to_string(i));
  }
}

}  // namespace detail

inline nlohmann::json to_json(const TrainedModel& model) {
  using nlohmann::json;
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelFormatVersion;
  j["algorithm"] = algorithm_name(model.algorithm);
  j["classes"] = model.classes();
  if (model.scaler)
    j["scaler"] = {{"mean", model.scaler->mean}, {"stddev", model.scaler->stddev}};
  else
    j["scaler"] = nullptr;
  json p;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, GaussianNb>) {
          p = {{"features", m.features}, {"log_prior", m.log_prior}, {"mean", m.mean}, {"variance", m.variance}};
        } else if constexpr (std::is_same_v<M, LogisticModel>) {
          p = {{"features", m.features}, {"weights", m.weights}, {"bias", m.bias}};
        } else if constexpr (std::is_same_v<M, CartModel>) {
          p = {{"tree", detail::class_tree_json(m.tree)}};
        } else if constexpr (std::is_same_v<M, ForestModel>) {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(detail::class_tree_json(t));
          p = {{"trees", std::move(trees)}};
        } else if constexpr (std::is_same_v<M, KnnModel>) {
          p = {{"k", m.k}, {"features", m.train.feature_count()}, {"labels", m.train.labels()}, {"rows", m.train.values()}};
        } else {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(detail::regression_tree_json(t));
          p = {{"base_scores", m.base_scores}, {"learning_rate", m.learning_rate}, {"trees", std::move(trees)}};
        }
      },
      model.params);
  j["params"] = std::move(p);
  return j;
}

/// Inverse of to_json. Rejects unknown formats, versions and inconsistent
/// shapes with a ValidationError.
inline TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw ValidationError("format", "not a model document");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw ValidationError("version", "unsupported model format version " + j.at("version").dump());
    TrainedModel out;
    out.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    const auto classes = j.at("classes").get<std::vector<int>>();
    if (classes.empty() || !std::is_sorted(classes.begin(), classes.end()) ||
        std::adjacent_find(classes.begin(), classes.end()) != classes.end())
      throw ValidationError("classes", "must be sorted, distinct and non-empty");
    const std::size_t K = classes.size();
    if (!j.at("scaler").is_null())
      out.scaler = Scaler{j["scaler"].at("mean").get<std::vector<double>>(), j["scaler"].at("stddev").get<std::vector<double>>()};
    if (out.scaler.has_value() != uses_standardization(out.algorithm))
      throw ValidationError("scaler", "presence does not match the algorithm");
    const auto& p = j.at("params");
    auto need = [](bool ok, const char* field) {
      if (!ok) throw ValidationError(field, "inconsistent shape");
    };
    std::size_t features = 0;
    switch (out.algorithm) {
      case Algorithm::gaussian_nb: {
        GaussianNb m{classes, p.at("features").get<std::size_t>(), p.at("log_prior").get<std::vector<double>>(),
                     p.at("mean").get<std::vector<double>>(), p.at("variance").get<std::vector<double>>()};
        need(m.log_prior.size() == K && m.mean.size() == K * m.features && m.variance.size() == K * m.features, "params");
        features = m.features;
        out.params = std::move(m);
        break;
      }
      case Algorithm::logistic: {
        LogisticModel m{classes, p.at("features").get<std::size_t>(), p.at("weights").get<std::vector<double>>(),
                        p.at("bias").get<std::vector<double>>()};
        need(m.weights.size() == K * m.features && m.bias.size() == K, "params");
        features = m.features;
        out.params = std::move(m);
        break;
      }
      case Algorithm::cart: {
        CartModel m{classes, detail::class_tree_from(p.at("tree"))};
        detail::check_tree(m.tree, SIZE_MAX, K);
        out.params = std::move(m);
        break;
      }
      case Algorithm::random_forest: {
        ForestModel m{classes, {}};
        for (const auto& t : p.at("trees")) m.trees.push_back(detail::class_tree_from(t));
        need(!m.trees.empty(), "trees");
        for (const auto& t : m.trees) detail::check_tree(t, SIZE_MAX, K);
        out.params = std::move(m);
        break;
      }
      case Algorithm::knn: {
        features = p.at("features").get<std::size_t>();
        const auto labels = p.at("labels").get<std::vector<int>>();
        const auto rows = p.at("rows").get<std::vector<double>>();
        need(rows.size() == labels.size() * features, "rows");
        Dataset train(features);
        for (std::size_t i = 0; i < labels.size(); ++i)
          train.add(std::span<const double>(rows).subspan(i * features, features), labels[i]);
        train.set_class_set(classes);
        const auto k = p.at("k").get<std::size_t>();
        need(k >= 1 && k <= train.size(), "k");
        out.params = KnnModel{k, std::move(train)};
        break;
      }
      case Algorithm::gradient_boost: {
        BoostedModel m;
        m.classes = classes;
        m.base_scores = p.at("base_scores").get<std::vector<double>>();
        m.learning_rate = p.at("learning_rate").get<double>();
        for (const auto& t : p.at("trees")) m.trees.push_back(detail::regression_tree_from(t));
        need(m.base_scores.size() == K && m.trees.size() % K == 0, "params");
        for (const auto& t : m.trees) detail::check_tree(t, SIZE_MAX, K);
        out.params = std::move(m);
        break;
      }
    }
    if (out.scaler)
      need(out.scaler->mean.size() == out.scaler->stddev.size() && (features == 0 || out.scaler->mean.size() == features),
           "scaler");
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("model", std::string("malformed model document: ") + e.what());
  }
}

}  // namespace sicn::learn
