#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>

#include "sicn/learn/boosting.hpp"
#include "sicn/learn/forest.hpp"
#include "sicn/learn/knn.hpp"
#include "sicn/learn/logistic.hpp"
#include "sicn/learn/metrics.hpp"
#include "sicn/learn/model.hpp"
#include "sicn/learn/naive_bayes.hpp"
#include "sicn/learn/scaler.hpp"
#include "sicn/learn/split.hpp"
#include "sicn/learn/tree.hpp"
#include "sicn/rng.hpp"
#include "oracles.hpp"

namespace {

using namespace sicn;
using namespace sicn::learn;
using namespace sicn::test;

constexpr int A = 0;
constexpr int B = 1;

Dataset one_d(std::initializer_list<std::pair<double, int>> rows) {
  Dataset d(1);
  for (auto [x, y] : rows) d.add(std::vector<double>{x}, y);
  return d;
}

TEST(Split, ProportionalPerClass) {
  Dataset d(1);
  for (int i = 0; i < 10; ++i) d.add(std::vector<double>{double(i)}, i < 5 ? A : B);
  const auto s = stratified_split(d, 0.6, 7);
  EXPECT_EQ(s.train.size(), 6u);
  EXPECT_EQ(std::count(s.train.labels().begin(), s.train.labels().end(), A), 3);
  EXPECT_EQ(std::count(s.train.labels().begin(), s.train.labels().end(), B), 3);
  EXPECT_EQ(s.test.size(), 4u);

  const auto again = stratified_split(d, 0.6, 7);
  EXPECT_EQ(s.train_indices, again.train_indices);
  EXPECT_EQ(s.test_indices, again.test_indices);

  std::vector<std::size_t> all = s.train_indices;
  all.insert(all.end(), s.test_indices.begin(), s.test_indices.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
}

TEST(Split, FullFractionAndSingletons) {
  Dataset d(1);
  for (int i = 0; i < 6; ++i) d.add(std::vector<double>{double(i)}, i == 5 ? 2 : i % 2);
  EXPECT_TRUE(stratified_split(d, 1.0, 1).test.empty());
  const auto s = stratified_split(d, 0.5, 1);
  ASSERT_EQ(s.warnings.size(), 1u);
  EXPECT_EQ(std::count(s.train.labels().begin(), s.train.labels().end(), 2), 1);
  EXPECT_EQ(s.test.class_set(), d.class_set());
  EXPECT_THROW(stratified_split(d, 0.0, 1), ValidationError);
}

TEST(Split, ProportionsWithinOneRow) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = random_dataset(rng, 20 + rng.below(80), 1, 4, 10);
    const double f = rng.uniform(0.1, 0.9);
    const auto s = stratified_split(d, f, rng.next());
    EXPECT_EQ(s.train.size() + s.test.size(), d.size());
    for (int c : d.class_set()) {
      const auto n = std::count(d.labels().begin(), d.labels().end(), c);
      const auto t = std::count(s.train.labels().begin(), s.train.labels().end(), c);
      if (n >= 2) {
        EXPECT_LE(std::abs(double(t) - f * double(n)), 1.0);
      }
    }
  }
}

TEST(Scaler, ZScores) {
  const auto train = one_d({{0, A}, {10, B}});
  auto [scaler, z] = standardize(train);
  EXPECT_DOUBLE_EQ(z.row(0)[0], -1.0);
  EXPECT_DOUBLE_EQ(z.row(1)[0], 1.0);
  EXPECT_DOUBLE_EQ(scaler.apply(0, 5.0), 0.0);

  const auto flat = one_d({{3, A}, {3, B}, {3, A}});
  const auto s = Scaler::fit(flat);
  EXPECT_EQ(s.apply(0, 3.0), 0.0);
  EXPECT_EQ(s.apply(0, 100.0), 0.0);
}

TEST(NaiveBayes, SymmetricPosteriorsTieToLowestClass) {
  const auto m = fit_gaussian_nb(one_d({{-1, A}, {1, A}, {9, B}, {11, B}}));
  EXPECT_DOUBLE_EQ(m.mean[0], 0.0);
  EXPECT_DOUBLE_EQ(m.variance[0], 1.0);
  EXPECT_DOUBLE_EQ(m.mean[1], 10.0);
  EXPECT_EQ(m.predict(std::vector<double>{2}), A);
  EXPECT_EQ(m.predict(std::vector<double>{8}), B);
  const auto j = m.joint_log_likelihood(std::vector<double>{5});
  EXPECT_EQ(j[0], j[1]);
  EXPECT_EQ(m.predict(std::vector<double>{5}), A);
}

TEST(NaiveBayes, ClosedFormLogPosterior) {
  const auto m = fit_gaussian_nb(one_d({{-1, A}, {1, A}, {9, B}, {11, B}, {10, B}}));
  // Class B: prior 3/5, mean 10, population variance 2/3.
  const double x = 7.5, var = 2.0 / 3.0;
  const double expect = std::log(0.6) - 0.5 * std::log(2 * M_PI * var) - (x - 10) * (x - 10) / (2 * var);
  EXPECT_NEAR(m.joint_log_likelihood(std::vector<double>{x})[1], expect, 1e-12);
}

TEST(NaiveBayes, VarianceFloor) {
  const auto m = fit_gaussian_nb(one_d({{4, A}, {4, A}, {9, B}, {11, B}}));
  EXPECT_DOUBLE_EQ(m.variance[0], 1e-9);
  const auto j = m.joint_log_likelihood(std::vector<double>{4.5});
  EXPECT_TRUE(std::isfinite(j[0]));
  EXPECT_EQ(m.predict(std::vector<double>{4}), A);
  EXPECT_THROW(fit_gaussian_nb(Dataset(1)), ValidationError);
}

TEST(Logistic, SeparableOneD) {
  auto [scaler, z] = standardize(one_d({{0, A}, {10, B}}));
  const auto m = fit_logistic(z);
  EXPECT_EQ(m.predict(scaler.transform(std::vector<double>{0})), A);
  EXPECT_EQ(m.predict(scaler.transform(std::vector<double>{10})), B);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Dataset d(3);
    for (int i = 0; i < 12; ++i)
      d.add(std::vector<double>{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)}, int(rng.below(3)));
    d.set_class_set({0, 1, 2});
    LogisticModel m{{0, 1, 2}, 3, std::vector<double>(9, 0.0), std::vector<double>(3, 0.0)};
    if (trial > 0) {
      for (auto& w : m.weights) w = rng.uniform(-1, 1);
      for (auto& b : m.bias) b = rng.uniform(-1, 1);
    }
    const double l2 = 0.05;
    std::vector<double> gw, gb;
    logistic_loss(m, d, l2, &gw, &gb);
    const double h = 1e-5;
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
      auto p = m, q = m;
      p.weights[i] += h;
      q.weights[i] -= h;
      const double fd = (logistic_loss(p, d, l2) - logistic_loss(q, d, l2)) / (2 * h);
      EXPECT_TRUE(close_rel(gw[i], fd, 1e-4)) << gw[i] << " vs " << fd;
    }
    for (std::size_t k = 0; k < m.bias.size(); ++k) {
      auto p = m, q = m;
      p.bias[k] += h;
      q.bias[k] -= h;
      const double fd = (logistic_loss(p, d, l2) - logistic_loss(q, d, l2)) / (2 * h);
      EXPECT_TRUE(close_rel(gb[k], fd, 1e-4)) << gb[k] << " vs " << fd;
    }
  }
}

TEST(Logistic, ProbabilitiesSumToOne) {
  Rng rng(9);
  const auto d = random_dataset(rng, 30, 2, 4, 6);
  auto [scaler, z] = standardize(d);
  const auto m = fit_logistic(z, {0.5, 50, 1e-4});
  for (int i = 0; i < 100; ++i) {
    const auto p = m.probabilities(std::vector<double>{rng.uniform(-50, 50), rng.uniform(-50, 50)});
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(Logistic, DivergenceAborts) {
  const auto d = one_d({{0, A}, {1e200, B}});
  EXPECT_THROW(fit_logistic(d, {1.0, 5, 0.0}), TrainingError);
}

TEST(Cart, ThresholdBetweenClasses) {
  const auto m = fit_cart(one_d({{-2, A}, {-1, A}, {1, B}, {2, B}}));
  EXPECT_EQ(m.tree.depth(), 1u);
  const auto& root = m.tree.nodes[0];
  EXPECT_EQ(root.feature, 0);
  EXPECT_GT(root.threshold, -1.0);
  EXPECT_LT(root.threshold, 1.0);
}

TEST(Cart, SingleClassIsLeaf) {
  const auto m = fit_cart(one_d({{1, B}, {2, B}, {3, B}}));
  ASSERT_EQ(m.tree.nodes.size(), 1u);
  EXPECT_EQ(m.predict(std::vector<double>{-100}), B);
}

TEST(Cart, MatchesBruteForceOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t features = 1 + rng.below(2);
    const auto d = random_dataset(rng, 1 + rng.below(8), features, 3, 5);
    std::vector<std::size_t> rows(d.size());
    std::iota(rows.begin(), rows.end(), 0);
    const auto oracle = oracle_cart(d, rows);
    const auto m = fit_cart(d);
    for (const auto& q : query_grid(features)) ASSERT_EQ(m.predict(q), oracle->predict(q)) << "trial " << trial;
  }
}

TEST(Cart, DepthLimit) {
  Rng rng(3);
  const auto d = random_dataset(rng, 200, 2, 4, 50);
  EXPECT_LE(fit_cart(d, {2, 2, 0}).tree.depth(), 2u);
  EXPECT_GT(fit_cart(d).tree.depth(), 2u);
}

TEST(Forest, SingleUnbaggedTreeEqualsCart) {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = random_dataset(rng, 40, 3, 3, 6);
    ForestOptions o;
    o.n_trees = 1;
    o.bootstrap = false;
    o.features_per_split = 3;
    const auto f = fit_random_forest(d, o);
    const auto c = fit_cart(d);
    for (int q = 0; q < 50; ++q) {
      std::vector<double> x{rng.uniform(-1, 6), rng.uniform(-1, 6), rng.uniform(-1, 6)};
      ASSERT_EQ(f.predict(x), c.predict(x));
    }
  }
}

TEST(Forest, ScheduleIndependent) {
  Rng rng(8);
  const auto d = random_dataset(rng, 150, 5, 3, 20);
  ForestOptions o;
  o.n_trees = 25;
  o.seed = 99;
  o.threads = 1;
  const auto serial = fit_random_forest(d, o);
  o.threads = 4;
  const auto parallel = fit_random_forest(d, o);
  ASSERT_EQ(serial.trees.size(), parallel.trees.size());
  for (std::size_t t = 0; t < serial.trees.size(); ++t) {
    ASSERT_EQ(serial.trees[t].nodes.size(), parallel.trees[t].nodes.size());
    for (std::size_t n = 0; n < serial.trees[t].nodes.size(); ++n) {
      EXPECT_EQ(serial.trees[t].nodes[n].feature, parallel.trees[t].nodes[n].feature);
      EXPECT_EQ(serial.trees[t].nodes[n].threshold, parallel.trees[t].nodes[n].threshold);
      EXPECT_EQ(serial.trees[t].nodes[n].class_index, parallel.trees[t].nodes[n].class_index);
    }
  }
}

Dataset wide_margin(Rng& rng, std::size_t per_class, double offset) {
  Dataset d(4);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> x(4);
      for (auto& v : x) v = rng.uniform(0, 1) + offset * c;
      d.add(x, c);
    }
  return d;
}

TEST(Forest, WideMarginSeparable) {
  Rng rng(12);
  const auto train = wide_margin(rng, 40, 10);
  const auto test = wide_margin(rng, 40, 10);
  ForestOptions o;
  o.n_trees = 200;
  o.seed = 1;
  const auto f = fit_random_forest(train, o);
  for (std::size_t i = 0; i < test.size(); ++i) EXPECT_EQ(f.predict(test.row(i)), test.label(i));
}

TEST(Knn, HandExamples) {
  // Points at 0 (A), 1 (A), 3 (B), 10 (B).
  const auto d = one_d({{0, A}, {1, A}, {3, B}, {10, B}});
  EXPECT_EQ(fit_knn(d, 1).predict(std::vector<double>{2.9}), B);
  EXPECT_EQ(fit_knn(d, 1).predict(std::vector<double>{0.2}), A);
  EXPECT_EQ(fit_knn(d, 3).predict(std::vector<double>{2.5}), A);  // distances 0.5, 1.5, 2.5
  EXPECT_EQ(fit_knn(d, 2).predict(std::vector<double>{2.1}), A);  // neighbors 3 (B) and 1 (A)
  EXPECT_THROW(fit_knn(d, 5), ValidationError);
  EXPECT_THROW(fit_knn(d, 0), ValidationError);
}

TEST(Knn, DistanceTiesPreferLowerRow) {
  const auto d = one_d({{2, B}, {0, A}});
  EXPECT_EQ(fit_knn(d, 1).predict(std::vector<double>{1}), B);
}

TEST(Knn, MatchesBruteForceOracle) {
  Rng rng(31337);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t features = 1 + rng.below(2);
    const auto d = random_dataset(rng, 1 + rng.below(8), features, 3, 4);
    const std::size_t k = 1 + rng.below(d.size());
    const auto m = fit_knn(d, k);
    for (const auto& q : query_grid(features)) ASSERT_EQ(m.predict(q), oracle_knn(d, k, q)) << "trial " << trial;
  }
}

TEST(Boosting, GradientsMatchFiniteDifferences) {
  Rng rng(4);
  const std::size_t K = 4, n = 6;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(n * K);
    for (auto& v : s) v = rng.uniform(-3, 3);
    std::vector<std::uint32_t> y(n);
    for (auto& v : y) v = static_cast<std::uint32_t>(rng.below(K));
    std::vector<double> g, h;
    softmax_gradients(s, y, K, g, h);
    const double eps = 1e-5;
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto p = s, q = s;
      p[i] += eps;
      q[i] -= eps;
      const double fd = (multinomial_log_loss(p, y, K) - multinomial_log_loss(q, y, K)) / (2 * eps);
      EXPECT_TRUE(close_rel(g[i], fd, 1e-4)) << g[i] << " vs " << fd;
      std::vector<double> gp, gq, hh;
      softmax_gradients(p, y, K, gp, hh);
      softmax_gradients(q, y, K, gq, hh);
      EXPECT_TRUE(close_rel(h[i], (gp[i] - gq[i]) / (2 * eps), 1e-4));
    }
  }
}

TEST(Boosting, ZeroLearningRatePredictsPrior) {
  Rng rng(6);
  Dataset d(2);
  for (int i = 0; i < 30; ++i) d.add(std::vector<double>{rng.uniform(0, 1), rng.uniform(0, 1)}, i < 5 ? 0 : (i < 20 ? 2 : 1));
  BoostOptions o;
  o.learning_rate = 0;
  o.n_rounds = 5;
  const auto m = fit_gradient_boost(d, o);
  for (int q = 0; q < 50; ++q) EXPECT_EQ(m.predict(std::vector<double>{rng.uniform(-5, 5), rng.uniform(-5, 5)}), 2);
}

TEST(Boosting, SeparableDepthOne) {
  Dataset d(1);
  for (int i = 0; i < 10; ++i) d.add(std::vector<double>{double(i)}, i < 5 ? A : B);
  BoostOptions o;
  o.max_depth = 1;
  o.n_rounds = 10;
  const auto m = fit_gradient_boost(d, o);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(m.predict(d.row(i)), d.label(i));
}

TEST(Boosting, LossNonIncreasing) {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto d = random_dataset(rng, 120, 3, 4, 12);
    BoostOptions o;
    o.n_rounds = 30;
    o.min_child_weight = trial % 2 ? 3.0 : 1.0;
    const auto m = fit_gradient_boost(d, o);
    ASSERT_EQ(m.loss_trace.size(), o.n_rounds + 1);
    for (std::size_t r = 1; r < m.loss_trace.size(); ++r) EXPECT_LE(m.loss_trace[r], m.loss_trace[r - 1] + 1e-12);
  }
}

TEST(Boosting, MinChildWeightRespected) {
  Dataset d(1);
  for (int i = 0; i < 8; ++i) d.add(std::vector<double>{double(i)}, i == 7 ? B : A);
  BoostOptions o;
  o.max_depth = 1;
  o.n_rounds = 1;
  o.min_child_weight = 100;
  const auto m = fit_gradient_boost(d, o);
  for (const auto& t : m.trees) EXPECT_EQ(t.nodes.size(), 1u);
}

TEST(Metrics, HandExample) {
  const std::vector<int> truth{A, A, B, B}, pred{A, B, B, B};
  const auto m = score_predictions({A, B}, truth, pred);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  EXPECT_NEAR(m.macro_f1, (2.0 / 3.0 + 4.0 / 5.0) / 2.0, 1e-12);
  EXPECT_EQ(m.confusion[0][1], 1u);
  EXPECT_EQ(m.total(), 4u);
}

TEST(Metrics, PerfectAndAbsentClass) {
  const std::vector<int> y{0, 1, 1};
  EXPECT_DOUBLE_EQ(score_predictions({0, 1}, y, y).macro_f1, 1.0);
  const auto m = score_predictions({0, 1, 2}, y, y);
  EXPECT_DOUBLE_EQ(m.per_class[2].f1, 0.0);
  EXPECT_NEAR(m.macro_f1, 2.0 / 3.0, 1e-12);
  const std::vector<int> bad{0, 1, 5};
  EXPECT_THROW(score_predictions({0, 1}, y, bad), ValidationError);
}

TEST(Metrics, IdentitiesAndRelabeling) {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const int K = 2 + int(rng.below(5));
    const std::size_t n = 1 + rng.below(60);
    std::vector<int> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = int(rng.below(K));
      pred[i] = rng.bernoulli(0.6) ? truth[i] : int(rng.below(K));
    }
    std::vector<int> classes(K), perm(K);
    std::iota(classes.begin(), classes.end(), 0);
    std::iota(perm.begin(), perm.end(), 10);
    rng.shuffle(perm.begin(), perm.end());
    const auto m = score_predictions(classes, truth, pred);
    std::size_t trace = 0;
    for (int k = 0; k < K; ++k) trace += m.confusion[k][k];
    EXPECT_EQ(m.total(), n);
    EXPECT_DOUBLE_EQ(m.accuracy, double(trace) / double(n));

    std::vector<int> t2(n), p2(n);
    for (std::size_t i = 0; i < n; ++i) t2[i] = perm[truth[i]], p2[i] = perm[pred[i]];
    const auto r = score_predictions(perm, t2, p2);
    EXPECT_NEAR(r.macro_f1, m.macro_f1, 1e-12);
    EXPECT_DOUBLE_EQ(r.accuracy, m.accuracy);
  }
}

TEST(Model, UnknownHyperparameterRejected) {
  try {
    ModelSpec(Algorithm::knn, {{"n_trees", 3}});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "n_trees");
  }
  EXPECT_THROW(parse_algorithm("svm"), ValidationError);
  EXPECT_THROW(fit(ModelSpec(Algorithm::knn, {{"k", 2.5}}), one_d({{0, A}, {1, B}, {2, B}})), ValidationError);
}

TEST(Model, JsonRoundTripPreservesPredictions) {
  Rng rng(1);
  const auto d = random_dataset(rng, 80, 3, 3, 10);
  for (auto a : kAllAlgorithms) {
    std::map<std::string, double> params;
    if (a == Algorithm::random_forest) params["n_trees"] = 15;
    if (a == Algorithm::gradient_boost) params["n_rounds"] = 10;
    if (a == Algorithm::logistic) params["iterations"] = 50;
    const auto model = fit(ModelSpec(a, params, 5), d);
    const auto back = model_from_json(nlohmann::json::parse(to_json(model).dump()));
    EXPECT_EQ(back.classes(), model.classes());
    for (int q = 0; q < 100; ++q) {
      std::vector<double> x{rng.uniform(-2, 12), rng.uniform(-2, 12), rng.uniform(-2, 12)};
      ASSERT_EQ(back.predict(x), model.predict(x)) << algorithm_name(a);
    }
  }
}

TEST(Model, DeterministicRefit) {
  Rng rng(2);
  const auto d = random_dataset(rng, 60, 4, 3, 8);
  for (auto a : kAllAlgorithms) {
    std::map<std::string, double> params;
    if (a == Algorithm::random_forest) params["n_trees"] = 10;
    if (a == Algorithm::gradient_boost) params["n_rounds"] = 5;
    const ModelSpec spec(a, params, 17);
    EXPECT_EQ(to_json(fit(spec, d)).dump(), to_json(fit(spec, d)).dump()) << algorithm_name(a);
  }
}

TEST(Model, EvaluateRecordsTrainingTime) {
  const auto d = one_d({{0, A}, {1, A}, {5, B}, {6, B}});
  const auto model = fit(ModelSpec(Algorithm::cart), d);
  const auto m = evaluate(model, d);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  EXPECT_GE(m.training_seconds, 0.0);
  EXPECT_THROW(evaluate(model, Dataset(1)), ValidationError);
}

}  // namespace
