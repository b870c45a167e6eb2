// Copyright 2026 The forumip Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include "forumip/ablation.hpp"
#include "forumip/classify.hpp"
#include "oracles.hpp"

namespace forumip {
namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(v.size(), 1);
  std::size_t i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

/// Two Gaussian blobs, `n` per class, centered `gap` apart on every axis.
std::pair<Matrix, std::vector<int>> blobs(std::size_t n, std::size_t d, double gap,
                                          std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(2 * n, d);
  std::vector<int> y(2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i) {
    y[i] = i % 2;
    for (std::size_t j = 0; j < d; ++j) x(i, j) = g(gen) + (y[i] ? gap : 0.0);
  }
  return {x, y};
}

TEST(ClassifierKind, ParsesNamesAndAliases) {
  EXPECT_EQ(parse_classifier_kind("lr"), ClassifierKind::kLogisticRegression);
  EXPECT_EQ(parse_classifier_kind("3nn"), ClassifierKind::kKnn);
  EXPECT_EQ(parse_classifier_kind("naive_bayes"), ClassifierKind::kNaiveBayes);
  EXPECT_THROW(parse_classifier_kind("svm"), UsageError);
}

TEST(Train, NeedsTwoInstancesPerClass) {
  EXPECT_THROW(train(ClassifierKind::kNaiveBayes, column({1, 2, 3}), {0, 0, 1}), PreconditionError);
  EXPECT_THROW(train(ClassifierKind::kNaiveBayes, column({1, 2, 3, 4}), {0, 0, 1, 2}),
               PreconditionError);
  EXPECT_THROW(train(ClassifierKind::kKnn, column({1, 2, 3, 4}), {0, 0, 1, 1}, Hyperparams{.k = 2}),
               PreconditionError);
}

// ---------------------------------------------------------------------------

TEST(NaiveBayes, BoundaryBetweenEqualVarianceMeans) {
  auto m = train(ClassifierKind::kNaiveBayes, column({0, 1, 2, 4, 5, 6}), {0, 0, 0, 1, 1, 1});
  std::vector<double> at = {3.0}, lo = {2.9}, hi = {3.1};
  EXPECT_DOUBLE_EQ(predict(m, at).score, 0.5);
  EXPECT_EQ(predict(m, lo).label, kBenign);
  EXPECT_EQ(predict(m, hi).label, kMalicious);
}

TEST(NaiveBayes, PosteriorMatchesDensityOracle) {
  std::vector<std::vector<double>> rows = {{1.0, 0.2}, {1.5, 0.1}, {0.7, 0.4},
                                           {3.0, 1.0}, {2.2, 1.6}, {2.9, 0.9}};
  std::vector<int> y = {0, 0, 0, 1, 1, 1};
  auto m = train(ClassifierKind::kNaiveBayes, from_rows(rows), y);
  for (std::vector<double> probe : {std::vector<double>{2.0, 0.5}, {1.2, 0.3}, {2.5, 1.1}}) {
    double expected = oracle::gaussian_nb_posterior(rows, y, probe);
    EXPECT_NEAR(predict(m, probe).score, expected, 1e-12 * std::max(1.0, expected));
  }
}

TEST(NaiveBayes, ConstantFeatureUsesVarianceFloor) {
  auto m = train(ClassifierKind::kNaiveBayes, from_rows({{1, 0}, {2, 0}, {5, 0}, {6, 0}}),
                 {0, 0, 1, 1});
  std::vector<double> probe = {5.5, 0.0};
  auto p = predict(m, probe);
  EXPECT_TRUE(std::isfinite(p.score));
  EXPECT_EQ(p.label, kMalicious);
}

// ---------------------------------------------------------------------------

TEST(Logistic, ObjectiveMatchesOracle) {
  std::vector<std::vector<double>> rows = {{0.5, 1.0}, {1.5, -0.2}, {-1.0, 0.3}, {2.0, 2.0}};
  std::vector<int> y = {0, 1, 0, 1};
  std::vector<double> theta = {0.3, -0.7, 0.1};
  EXPECT_NEAR(logistic_objective(from_rows(rows), y, theta, 0.05),
              oracle::log_loss(rows, y, {0.3, -0.7}, 0.1, 0.05), 1e-12);
  std::vector<double> zero(3, 0.0);
  EXPECT_NEAR(logistic_objective(from_rows(rows), y, zero, 0.05), std::log(2.0), 1e-15);
}

TEST(Logistic, GradientMatchesCentralDifferences) {
  auto [x, y] = blobs(20, 3, 1.0, 4);
  std::mt19937_64 gen(8);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> theta(4);
    for (auto& v : theta) v = g(gen);
    auto grad = logistic_gradient(x, y, theta, 0.01);
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double h = 1e-6;
      auto up = theta, down = theta;
      up[k] += h;
      down[k] -= h;
      double fd = (logistic_objective(x, y, up, 0.01) - logistic_objective(x, y, down, 0.01)) / (2 * h);
      EXPECT_NEAR(grad[k], fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Logistic, ZeroWeightsScoreOneHalf) {
  ClassifierModel m;
  m.kind = ClassifierKind::kLogisticRegression;
  m.feature_names = {"a", "b"};
  m.params = LogisticParams{{0.0, 0.0}, 0.0, 0, 0.0, true};
  std::vector<double> row = {3.0, -2.0};
  EXPECT_EQ(predict(m, row).score, 0.5);
}

TEST(Logistic, SeparableDataIsLearnedPerfectly) {
  auto [x, y] = blobs(100, 2, 10.0, 5);
  auto m = train(ClassifierKind::kLogisticRegression, x, y);
  const auto& p = std::get<LogisticParams>(m.params);
  EXPECT_TRUE(p.converged);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) correct += predict(m, x.row(i)).label == y[i];
  EXPECT_EQ(correct, x.rows());
  auto grad = logistic_gradient(x, y, [&] {
    auto t = p.weights;
    t.push_back(p.bias);
    return t;
  }(), 1e-4);
  double norm = 0;
  for (double v : grad) norm += v * v;
  EXPECT_LT(std::sqrt(norm), 1e-6);
}

// ---------------------------------------------------------------------------

TEST(Knn, HandDistanceTable) {
  auto m = train(ClassifierKind::kKnn, column({0, 1, 2, 10, 11}), {0, 0, 1, 1, 1});
  // From 1.4 the three nearest are 1 (0.4), 2 (0.6), 0 (1.4): one malicious vote.
  std::vector<double> a = {1.4}, b = {9.0}, c = {1.9};
  EXPECT_DOUBLE_EQ(predict(m, a).score, 1.0 / 3.0);
  EXPECT_EQ(predict(m, a).label, kBenign);
  EXPECT_EQ(predict(m, b).score, 1.0);
  // From 1.9: 2 (0.1), 1 (0.9), 0 (1.9).
  EXPECT_DOUBLE_EQ(predict(m, c).score, 1.0 / 3.0);
}

TEST(Knn, DuplicateProbeTiesPreferBenign) {
  auto m = train(ClassifierKind::kKnn, column({5, 5, 5, 5, 9}), {1, 0, 1, 0, 1});
  std::vector<double> probe = {5.0};
  auto p = predict(m, probe);
  EXPECT_DOUBLE_EQ(p.score, 1.0 / 3.0);
  EXPECT_EQ(p.label, kBenign);
}

TEST(Predict, WidthMismatchIsSchemaError) {
  auto m = train(ClassifierKind::kNaiveBayes, column({0, 1, 4, 5}), {0, 0, 1, 1});
  std::vector<double> wide = {1.0, 2.0};
  EXPECT_THROW(predict(m, wide), SchemaError);
}

TEST(ClassifierModel, JsonRoundTripPredictsIdentically) {
  auto [x, y] = blobs(15, 3, 2.0, 6);
  for (auto kind : {ClassifierKind::kNaiveBayes, ClassifierKind::kKnn,
                    ClassifierKind::kLogisticRegression}) {
    auto m = train(kind, x, y);
    auto back = classifier_from_json(nlohmann::json::parse(to_json(m).dump()));
    for (std::size_t i = 0; i < x.rows(); ++i) {
      EXPECT_EQ(predict(back, x.row(i)).score, predict(m, x.row(i)).score);
    }
    auto j = to_json(m);
    j["feature_names"][0] = "renamed";
    EXPECT_THROW(classifier_from_json(j), SchemaError);
  }
}

// ---------------------------------------------------------------------------

TEST(Balance, EqualClassesFromCandidates) {
  std::vector<std::string> pos, neg;
  for (int i = 0; i < 10; ++i) pos.push_back("m" + std::to_string(i));
  for (int i = 0; i < 25; ++i) neg.push_back("b" + std::to_string(i));
  auto d = balance_dataset(pos, neg, 7);
  ASSERT_EQ(d.size(), 20u);
  EXPECT_TRUE(std::equal(pos.begin(), pos.end(), d.begin()));
  std::set<std::string> chosen(d.begin() + 10, d.end());
  EXPECT_EQ(chosen.size(), 10u);
  for (const auto& s : chosen) EXPECT_EQ(s[0], 'b');
  EXPECT_EQ(balance_dataset(pos, neg, 7), d);
  EXPECT_NE(balance_dataset(pos, neg, 8), d);
}

TEST(Balance, TooFewNegativesRejected) {
  std::vector<int> pos = {1, 2, 3, 4, 5}, neg = {6, 7, 8};
  EXPECT_THROW(balance_dataset(pos, neg, 1), PreconditionError);
}

TEST(Folds, StratifiedCountsOnFortyInstances) {
  std::vector<int> y(40, kBenign);
  for (int i = 0; i < 14; ++i) y[static_cast<std::size_t>(i * 2)] = kMalicious;
  auto f = stratified_folds(y, 10, 3);
  for (std::size_t k = 0; k < 10; ++k) {
    std::size_t n = 0, mal = 0;
    for (std::size_t i = 0; i < 40; ++i) {
      if (f[i] == k) {
        ++n;
        mal += y[i];
      }
    }
    EXPECT_EQ(n, 4u);
    EXPECT_TRUE(mal == 1 || mal == 2) << mal;
  }
  EXPECT_EQ(stratified_folds(y, 10, 3), f);
  EXPECT_THROW(stratified_folds(y, 1, 3), PreconditionError);
  EXPECT_THROW(stratified_folds(y, 41, 3), PreconditionError);
}

TEST(Folds, PropertiesOnRandomLabels) {
  std::mt19937_64 gen(21);
  for (int t = 0; t < 100; ++t) {
    std::size_t n = 10 + gen() % 60, k = 2 + gen() % 9;
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(gen() % 2);
    auto f = stratified_folds(y, k, gen());
    std::size_t n_mal = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    std::vector<std::size_t> size(k), mal(k);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_LT(f[i], k);
      ++size[f[i]];
      mal[f[i]] += y[i];
    }
    auto [lo, hi] = std::minmax_element(size.begin(), size.end());
    EXPECT_LE(*hi - *lo, 1u);
    for (std::size_t j = 0; j < k; ++j) {
      EXPECT_GE(mal[j], n_mal / k);
      EXPECT_LE(mal[j], (n_mal + k - 1) / k);
      EXPECT_GE(size[j] - mal[j], (n - n_mal) / k);
      EXPECT_LE(size[j] - mal[j], (n - n_mal + k - 1) / k);
    }
  }
}

// ---------------------------------------------------------------------------

TEST(Metrics, RocAreaByHand) {
  EXPECT_DOUBLE_EQ(roc_area({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}), 0.75);
  EXPECT_DOUBLE_EQ(roc_area({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(roc_area({0.1, 0.2}, {1, 1}), 0.5);
}

TEST(Metrics, ConfusionCounts) {
  std::vector<Prediction> p = {{1, .9}, {1, .8}, {0, .3}, {0, .2}, {1, .6}};
  auto m = compute_metrics({1, 0, 1, 0, 1}, p);
  EXPECT_EQ(m.confusion, (Confusion{2, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(m.accuracy, 0.6);
  EXPECT_DOUBLE_EQ(m.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.recall, 2.0 / 3.0);
}

TEST(CrossValidate, PerfectPredictorScoresOne) {
  std::vector<int> y;
  Matrix x(40, 1);
  for (std::size_t i = 0; i < 40; ++i) {
    y.push_back(static_cast<int>(i % 2));
    x(i, 0) = y.back() * 10.0 + 0.01 * static_cast<double>(i);
  }
  for (auto kind : {ClassifierKind::kNaiveBayes, ClassifierKind::kKnn,
                    ClassifierKind::kLogisticRegression}) {
    auto r = cross_validate(kind, x, y, 10, 1);
    EXPECT_EQ(r.pooled.accuracy, 1.0);
    EXPECT_EQ(r.pooled.precision, 1.0);
    EXPECT_EQ(r.pooled.recall, 1.0);
    EXPECT_EQ(r.pooled.roc_area, 1.0);
    EXPECT_EQ(r.per_fold.size(), 10u);
  }
}

TEST(CrossValidate, ThreadCountDoesNotChangeResults) {
  auto [x, y] = blobs(30, 4, 1.0, 9);
  auto a = cross_validate(ClassifierKind::kLogisticRegression, x, y, 10, 2, {}, 1);
  auto b = cross_validate(ClassifierKind::kLogisticRegression, x, y, 10, 2, {}, 4);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(Ablation, IdenticalMatricesScoreIdentically) {
  auto [x, y] = blobs(25, 3, 1.2, 10);
  Matrix copy = x;
  auto r = ablate_feature_sets({{"first", &x}, {"second", &copy}}, y,
                               ClassifierKind::kLogisticRegression, 10, 4);
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.find("first")->report.pooled.accuracy, r.find("second")->report.pooled.accuracy);
  EXPECT_EQ(r.find("first")->report.fold_of, r.find("second")->report.fold_of);
  EXPECT_NE(render_ablation_table(r).find("second"), std::string::npos);
}

}  // namespace
}  // namespace forumip
