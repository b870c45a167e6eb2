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

// Binary classifiers (Gaussian naive Bayes, k-nearest-neighbour, L2
// logistic regression) and stratified k-fold evaluation.
//
// Labels are 1 = malicious (the positive class) and 0 = benign.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "forumip/common.hpp"
#include "forumip/matrix.hpp"
#include "forumip/random.hpp"

namespace forumip {

inline constexpr int kBenign = 0;
inline constexpr int kMalicious = 1;

enum class ClassifierKind { kNaiveBayes, kKnn, kLogisticRegression };

inline std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::kNaiveBayes: return "naive_bayes";
    case ClassifierKind::kKnn: return "knn";
    case ClassifierKind::kLogisticRegression: return "logistic_regression";
  }
  return "logistic_regression";
}

inline ClassifierKind parse_classifier_kind(std::string_view s) {
  if (s == "naive_bayes" || s == "nb") return ClassifierKind::kNaiveBayes;
  if (s == "knn" || s == "3nn") return ClassifierKind::kKnn;
  if (s == "logistic_regression" || s == "lr") return ClassifierKind::kLogisticRegression;
  throw UsageError("unknown classifier kind '" + std::string(s) + "'");
}

struct Hyperparams {
  std::size_t k = 3;           ///< kNN neighbours (odd)
  double l2 = 1e-4;            ///< logistic regression weight penalty
  double variance_floor = 1e-9;
  double threshold = 0.5;      ///< NB / LR decision threshold on P(malicious)
  double grad_tol = 1e-6;      ///< LR stopping rule on the gradient norm
  std::size_t max_iter = 200;  ///< LR outer iterations
};

struct NaiveBayesParams {
  std::array<double, 2> log_prior{};
  Matrix mean;      ///< 2 x d
  Matrix variance;  ///< 2 x d
};

struct KnnParams {
  std::size_t k = 3;
  Matrix x;
  std::vector<int> y;
};

struct LogisticParams {
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

struct ClassifierModel {
  ClassifierKind kind = ClassifierKind::kLogisticRegression;
  std::vector<std::string> feature_names;
  double threshold = 0.5;
  std::variant<NaiveBayesParams, KnnParams, LogisticParams> params;

  std::size_t dimension() const { return feature_names.size(); }
};

struct Prediction {
  int label = kBenign;
  double score = 0.0;  ///< P(malicious) for NB / LR; malicious vote share for kNN
};

namespace detail {

inline void check_training_set(const Matrix& x, const std::vector<int>& y) {
  if (x.rows() != y.size()) throw PreconditionError("train: feature rows and labels differ");
  std::size_t pos = 0;
  for (int v : y) {
    if (v != kBenign && v != kMalicious) throw PreconditionError("train: labels must be 0/1");
    pos += v == kMalicious;
  }
  if (pos < 2 || y.size() - pos < 2) {
    throw PreconditionError("train: need at least 2 instances per class (got " +
                            std::to_string(pos) + " malicious, " +
                            std::to_string(y.size() - pos) + " benign)");
  }
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Solves (A) x = b for symmetric positive definite A (d x d) in place.
inline bool cholesky_solve(std::vector<double> a, std::vector<double>& b, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    double s = a[j * d + j];
    for (std::size_t k = 0; k < j; ++k) s -= a[j * d + k] * a[j * d + k];
    if (!(s > 0.0)) return false;
    double l = std::sqrt(s);
    a[j * d + j] = l;
    for (std::size_t i = j + 1; i < d; ++i) {
      double t = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) t -= a[i * d + k] * a[j * d + k];
      a[i * d + j] = t / l;
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    double t = b[i];
    for (std::size_t k = 0; k < i; ++k) t -= a[i * d + k] * b[k];
    b[i] = t / a[i * d + i];
  }
  for (std::size_t i = d; i-- > 0;) {
    double t = b[i];
    for (std::size_t k = i + 1; k < d; ++k) t -= a[k * d + i] * b[k];
    b[i] = t / a[i * d + i];
  }
  return true;
}

}  // namespace detail

/// Hex digest of the ordered feature names; stored with models so a model
/// is never applied to rows of a different layout.
inline std::string schema_hash(const std::vector<std::string>& names) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& n : names) {
    h = detail::fnv1a(n, h);
    h = detail::fnv1a(std::string_view("\x1f", 1), h);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Logistic regression objective

/// Mean log-loss plus (l2 / 2) * ||w||^2; `theta` is (w..., bias).
inline double logistic_objective(const Matrix& x, const std::vector<int>& y,
                                 std::span<const double> theta, double l2) {
  const std::size_t d = x.cols();
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xi = x.row(i);
    double z = theta[d];
    for (std::size_t j = 0; j < d; ++j) z += theta[j] * xi[j];
    loss += detail::softplus(z) - (y[i] == kMalicious ? z : 0.0);
  }
  loss /= static_cast<double>(x.rows());
  double reg = 0.0;
  for (std::size_t j = 0; j < d; ++j) reg += theta[j] * theta[j];
  return loss + 0.5 * l2 * reg;
}

inline std::vector<double> logistic_gradient(const Matrix& x, const std::vector<int>& y,
                                             std::span<const double> theta, double l2) {
  const std::size_t d = x.cols();
  std::vector<double> g(d + 1, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xi = x.row(i);
    double z = theta[d];
    for (std::size_t j = 0; j < d; ++j) z += theta[j] * xi[j];
    double r = detail::sigmoid(z) - (y[i] == kMalicious ? 1.0 : 0.0);
    for (std::size_t j = 0; j < d; ++j) g[j] += r * xi[j];
    g[d] += r;
  }
  const double n = static_cast<double>(x.rows());
  for (std::size_t j = 0; j <= d; ++j) g[j] /= n;
  for (std::size_t j = 0; j < d; ++j) g[j] += l2 * theta[j];
  return g;
}

namespace detail {

/// Damped Newton descent on the logistic objective with Armijo
/// backtracking; steepest descent is used whenever the Newton system is
/// not positive definite. Stops once ||gradient|| < grad_tol.
inline LogisticParams fit_logistic(const Matrix& x, const std::vector<int>& y,
                                   const Hyperparams& hp) {
  const std::size_t d = x.cols();
  const std::size_t p = d + 1;
  const double n = static_cast<double>(x.rows());
  std::vector<double> theta(p, 0.0);
  double f = logistic_objective(x, y, theta, hp.l2);
  LogisticParams out;
  for (std::size_t it = 0; it < hp.max_iter; ++it) {
    auto g = logistic_gradient(x, y, theta, hp.l2);
    double gnorm = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
    out.gradient_norm = gnorm;
    out.iterations = it;
    if (!std::isfinite(gnorm)) throw NumericalError("logistic regression: gradient is not finite");
    if (gnorm < hp.grad_tol) {
      out.converged = true;
      break;
    }
    std::vector<double> h(p * p, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      auto xi = x.row(i);
      double z = theta[d];
      for (std::size_t j = 0; j < d; ++j) z += theta[j] * xi[j];
      double s = sigmoid(z);
      double wgt = s * (1.0 - s) / n;
      if (wgt == 0.0) continue;
      for (std::size_t a = 0; a < p; ++a) {
        double xa = a < d ? xi[a] : 1.0;
        if (xa == 0.0) continue;
        for (std::size_t b = 0; b <= a; ++b) {
          double xb = b < d ? xi[b] : 1.0;
          h[a * p + b] += wgt * xa * xb;
        }
      }
    }
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = 0; b < a; ++b) h[b * p + a] = h[a * p + b];
      if (a < d) h[a * p + a] += hp.l2;
    }
    std::vector<double> step = g;
    bool newton = false;
    for (double jitter : {0.0, 1e-10, 1e-8, 1e-6}) {
      auto hj = h;
      for (std::size_t a = 0; a < p; ++a) hj[a * p + a] += jitter;
      step = g;
      if (cholesky_solve(hj, step, p)) {
        newton = true;
        break;
      }
    }
    if (!newton) step = g;
    double slope = std::inner_product(g.begin(), g.end(), step.begin(), 0.0);
    if (!(slope > 0.0)) {
      step = g;
      slope = gnorm * gnorm;
    }
    double t = 1.0;
    std::vector<double> trial(p);
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < p; ++j) trial[j] = theta[j] - t * step[j];
      double ft = logistic_objective(x, y, trial, hp.l2);
      if (std::isfinite(ft) && ft <= f - 1e-4 * t * slope) {
        theta = trial;
        f = ft;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    out.iterations = it + 1;
    if (!moved) break;  // no further decrease representable
  }
  auto g = logistic_gradient(x, y, theta, hp.l2);
  out.gradient_norm = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
  out.converged = out.gradient_norm < hp.grad_tol;
  out.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d));
  out.bias = theta[d];
  for (double w : out.weights) {
    if (!std::isfinite(w)) throw NumericalError("logistic regression: non-finite weights");
  }
  return out;
}

inline NaiveBayesParams fit_naive_bayes(const Matrix& x, const std::vector<int>& y,
                                        const Hyperparams& hp) {
  const std::size_t d = x.cols();
  NaiveBayesParams p;
  p.mean = Matrix(2, d);
  p.variance = Matrix(2, d);
  std::array<double, 2> count{0.0, 0.0};
  for (std::size_t i = 0; i < x.rows(); ++i) {
    count[y[i]] += 1.0;
    for (std::size_t j = 0; j < d; ++j) p.mean(y[i], j) += x(i, j);
  }
  for (int c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < d; ++j) p.mean(c, j) /= count[c];
  }
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double dv = x(i, j) - p.mean(y[i], j);
      p.variance(y[i], j) += dv * dv;
    }
  }
  for (int c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < d; ++j) {
      p.variance(c, j) = std::max(p.variance(c, j) / count[c], hp.variance_floor);
    }
    p.log_prior[c] = std::log(count[c] / static_cast<double>(x.rows()));
  }
  return p;
}

}  // namespace detail

inline ClassifierModel train(ClassifierKind kind, const Matrix& x, const std::vector<int>& y,
                             const std::vector<std::string>& feature_names,
                             const Hyperparams& hp = {}) {
  detail::check_training_set(x, y);
  if (feature_names.size() != x.cols()) {
    throw PreconditionError("train: feature names do not match the matrix width");
  }
  ClassifierModel m;
  m.kind = kind;
  m.feature_names = feature_names;
  m.threshold = hp.threshold;
  switch (kind) {
    case ClassifierKind::kNaiveBayes:
      m.params = detail::fit_naive_bayes(x, y, hp);
      break;
    case ClassifierKind::kKnn: {
      if (hp.k % 2 == 0) throw PreconditionError("knn: k must be odd");
      if (hp.k > x.rows()) throw PreconditionError("knn: k exceeds the training set size");
      m.params = KnnParams{hp.k, x, y};
      break;
    }
    case ClassifierKind::kLogisticRegression:
      m.params = detail::fit_logistic(x, y, hp);
      break;
  }
  return m;
}

inline ClassifierModel train(ClassifierKind kind, const Matrix& x, const std::vector<int>& y,
                             const Hyperparams& hp = {}) {
  std::vector<std::string> names(x.cols());
  for (std::size_t j = 0; j < names.size(); ++j) names[j] = "f" + std::to_string(j);
  return train(kind, x, y, names, hp);
}

inline Prediction predict(const ClassifierModel& m, std::span<const double> row) {
  if (row.size() != m.dimension()) {
    throw SchemaError("predict: row has " + std::to_string(row.size()) +
                      " features, model expects " + std::to_string(m.dimension()));
  }
  Prediction p;
  switch (m.kind) {
    case ClassifierKind::kNaiveBayes: {
      const auto& nb = std::get<NaiveBayesParams>(m.params);
      constexpr double kLog2Pi = 1.8378770664093454835606594728112;
      std::array<double, 2> lp = nb.log_prior;
      for (int c = 0; c < 2; ++c) {
        for (std::size_t j = 0; j < row.size(); ++j) {
          double v = nb.variance(c, j);
          double dv = row[j] - nb.mean(c, j);
          lp[c] += -0.5 * (kLog2Pi + std::log(v)) - dv * dv / (2.0 * v);
        }
      }
      p.score = detail::sigmoid(lp[kMalicious] - lp[kBenign]);
      p.label = p.score >= m.threshold ? kMalicious : kBenign;
      break;
    }
    case ClassifierKind::kKnn: {
      const auto& knn = std::get<KnnParams>(m.params);
      struct Cand {
        double dist;
        int label;
        std::size_t index;
      };
      std::vector<Cand> cands(knn.x.rows());
      for (std::size_t i = 0; i < knn.x.rows(); ++i) {
        auto xi = knn.x.row(i);
        double d2 = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
          double dv = row[j] - xi[j];
          d2 += dv * dv;
        }
        cands[i] = {d2, knn.y[i], i};
      }
      // Equal distances prefer benign neighbours, then training order.
      std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(knn.k),
                        cands.end(), [](const Cand& a, const Cand& b) {
                          if (a.dist != b.dist) return a.dist < b.dist;
                          if (a.label != b.label) return a.label < b.label;
                          return a.index < b.index;
                        });
      std::size_t votes = 0;
      for (std::size_t i = 0; i < knn.k; ++i) votes += cands[i].label == kMalicious;
      p.score = static_cast<double>(votes) / static_cast<double>(knn.k);
      p.label = 2 * votes > knn.k ? kMalicious : kBenign;
      break;
    }
    case ClassifierKind::kLogisticRegression: {
      const auto& lr = std::get<LogisticParams>(m.params);
      double z = lr.bias;
      for (std::size_t j = 0; j < row.size(); ++j) z += lr.weights[j] * row[j];
      p.score = detail::sigmoid(z);
      p.label = p.score >= m.threshold ? kMalicious : kBenign;
      break;
    }
  }
  return p;
}

/// Predicts every row of `x`; column names must match the model's.
inline std::vector<Prediction> predict(const ClassifierModel& m, const FeatureMatrix& x) {
  if (x.column_names != m.feature_names) {
    throw SchemaError("predict: feature columns differ from the model schema (" +
                      schema_hash(x.column_names) + " vs " + schema_hash(m.feature_names) +
                      ")");
  }
  std::vector<Prediction> out;
  out.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(predict(m, x.values.row(i)));
  return out;
}

// ---------------------------------------------------------------------------
// Balancing and folds

/// Seeded choice of |positives| negatives from `candidates`, returned in
/// candidate order.
template <typename T>
std::vector<T> sample_negatives(std::size_t n_positives, const std::vector<T>& candidates,
                                std::uint64_t seed) {
  if (candidates.size() < n_positives) {
    throw PreconditionError("balance: need " + std::to_string(n_positives) +
                            " negatives but only " + std::to_string(candidates.size()) +
                            " candidates are available");
  }
  Rng rng(seed);
  auto idx = sample_without_replacement(candidates.size(), n_positives, rng);
  std::sort(idx.begin(), idx.end());
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(candidates[i]);
  return out;
}

/// Positives followed by an equal number of sampled negatives.
template <typename T>
std::vector<T> balance_dataset(const std::vector<T>& positives,
                               const std::vector<T>& candidate_negatives, std::uint64_t seed) {
  std::vector<T> out = positives;
  auto neg = sample_negatives(positives.size(), candidate_negatives, seed);
  out.insert(out.end(), neg.begin(), neg.end());
  return out;
}

/// Fold index per instance. Each class is shuffled and dealt round-robin,
/// the second class continuing where the first stopped, so every fold holds
/// floor or ceil of n_c / k instances of class c and fold sizes differ by at
/// most one.
inline std::vector<std::size_t> stratified_folds(const std::vector<int>& y, std::size_t folds,
                                                 std::uint64_t seed) {
  if (folds < 2) throw PreconditionError("cross-validation: need at least 2 folds");
  if (folds > y.size()) {
    throw PreconditionError("cross-validation: " + std::to_string(folds) +
                            " folds for " + std::to_string(y.size()) + " instances");
  }
  Rng rng(seed);
  std::vector<std::size_t> fold(y.size());
  std::size_t offset = 0;
  for (int c : {kBenign, kMalicious}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == c) idx.push_back(i);
    }
    rng.shuffle(idx);
    for (std::size_t k = 0; k < idx.size(); ++k) fold[idx[k]] = (offset + k) % folds;
    offset += idx.size();
  }
  return fold;
}

// ---------------------------------------------------------------------------
// Metrics

/// Area under the ROC curve as the Mann-Whitney statistic; tied scores
/// contribute one half. Returns 0.5 when a class is absent.
inline double roc_area(const std::vector<double>& scores, const std::vector<int>& y) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (y[idx[k]] == kMalicious) {
        rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return 0.5;
  double u = rank_sum - static_cast<double>(n_pos) * static_cast<double>(n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const Confusion&) const = default;
};

struct Metrics {
  std::size_t n = 0;
  double accuracy = 0, precision = 0, recall = 0, roc_area = 0.5;
  Confusion confusion;
};

inline Metrics compute_metrics(const std::vector<int>& y, const std::vector<Prediction>& pred) {
  Metrics m;
  m.n = y.size();
  std::vector<double> scores;
  for (std::size_t i = 0; i < y.size(); ++i) {
    bool actual = y[i] == kMalicious, guess = pred[i].label == kMalicious;
    if (actual && guess) ++m.confusion.tp;
    if (!actual && guess) ++m.confusion.fp;
    if (!actual && !guess) ++m.confusion.tn;
    if (actual && !guess) ++m.confusion.fn;
    scores.push_back(pred[i].score);
  }
  const auto& c = m.confusion;
  if (m.n) m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(m.n);
  if (c.tp + c.fp) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  m.roc_area = roc_area(scores, y);
  return m;
}

struct EvalReport {
  ClassifierKind kind = ClassifierKind::kLogisticRegression;
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  Metrics pooled;
  std::vector<Metrics> per_fold;
  std::vector<std::size_t> fold_of;        ///< per instance
  std::vector<Prediction> predictions;     ///< per instance, out-of-fold
};

/// Stratified k-fold CV. Out-of-fold predictions are pooled for the headline
/// metrics. Folds run on up to `jobs` threads; results are merged by fold
/// index so output does not depend on scheduling.
inline EvalReport cross_validate(ClassifierKind kind, const Matrix& x, const std::vector<int>& y,
                                 std::size_t folds, std::uint64_t seed,
                                 const Hyperparams& hp = {}, std::size_t jobs = 1,
                                 const std::vector<std::size_t>* fixed_folds = nullptr) {
  if (x.rows() != y.size()) throw PreconditionError("cross-validation: rows and labels differ");
  EvalReport rep;
  rep.kind = kind;
  rep.folds = folds;
  rep.seed = seed;
  rep.fold_of = fixed_folds ? *fixed_folds : stratified_folds(y, folds, seed);
  rep.predictions.assign(y.size(), {});
  std::vector<std::string> names(x.cols());
  for (std::size_t j = 0; j < names.size(); ++j) names[j] = "f" + std::to_string(j);

  std::vector<std::exception_ptr> errors(folds);
  auto run_fold = [&](std::size_t f) {
    try {
      std::vector<std::size_t> tr, te;
      for (std::size_t i = 0; i < y.size(); ++i) (rep.fold_of[i] == f ? te : tr).push_back(i);
      std::vector<int> ytr;
      for (auto i : tr) ytr.push_back(y[i]);
      auto model = train(kind, x.select_rows(tr), ytr, names, hp);
      for (auto i : te) rep.predictions[i] = predict(model, x.row(i));
    } catch (...) {
      errors[f] = std::current_exception();
    }
  };
  jobs = std::max<std::size_t>(1, jobs);
  for (std::size_t start = 0; start < folds; start += jobs) {
    std::vector<std::thread> pool;
    for (std::size_t f = start; f < std::min(folds, start + jobs); ++f) {
      if (jobs == 1) {
        run_fold(f);
      } else {
        pool.emplace_back(run_fold, f);
      }
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  rep.pooled = compute_metrics(y, rep.predictions);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<int> yf;
    std::vector<Prediction> pf;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (rep.fold_of[i] == f) {
        yf.push_back(y[i]);
        pf.push_back(rep.predictions[i]);
      }
    }
    rep.per_fold.push_back(compute_metrics(yf, pf));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const Metrics& m) {
  return {{"instances", m.n},
          {"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"roc_area", m.roc_area},
          {"confusion",
           {{"tp", m.confusion.tp}, {"fp", m.confusion.fp},
            {"tn", m.confusion.tn}, {"fn", m.confusion.fn}}}};
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (std::size_t f = 0; f < r.per_fold.size(); ++f) {
    auto j = to_json(r.per_fold[f]);
    j["fold"] = f;
    folds.push_back(j);
  }
  return {{"classifier", to_string(r.kind)},
          {"folds", r.folds},
          {"seed", r.seed},
          {"pooled", to_json(r.pooled)},
          {"per_fold", folds}};
}

inline std::string render_eval_table(const EvalReport& r, std::string_view title) {
  char buf[256];
  std::string out;
  std::string name(title);
  const int width = std::max<int>(24, static_cast<int>(name.size()));
  std::snprintf(buf, sizeof buf, "%-*s %10s %10s %10s %10s %10s\n", width, "Set", "Instances",
                "Accuracy", "Precision", "Recall", "ROC Area");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-*s %10zu %10.3f %10.3f %10.3f %10.3f\n", width,
                name.substr(0, 160).c_str(), r.pooled.n, r.pooled.accuracy, r.pooled.precision,
                r.pooled.recall, r.pooled.roc_area);
  out += buf;
  const auto& c = r.pooled.confusion;
  std::snprintf(buf, sizeof buf, "confusion: tp=%zu fp=%zu tn=%zu fn=%zu\n", c.tp, c.fp, c.tn,
                c.fn);
  out += buf;
  return out;
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, std::size_t cols) {
  Matrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    auto row = j[r].get<std::vector<double>>();
    if (row.size() != cols) throw SchemaError("matrix row has the wrong width");
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}

inline nlohmann::json to_json(const ClassifierModel& m) {
  nlohmann::json params;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NaiveBayesParams>) {
          params = {{"log_prior", p.log_prior},
                    {"mean", matrix_to_json(p.mean)},
                    {"variance", matrix_to_json(p.variance)}};
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          params = {{"k", p.k}, {"x", matrix_to_json(p.x)}, {"y", p.y}};
        } else {
          params = {{"weights", p.weights},
                    {"bias", p.bias},
                    {"iterations", p.iterations},
                    {"gradient_norm", p.gradient_norm},
                    {"converged", p.converged}};
        }
      },
      m.params);
  return {{"schema_version", kSchemaVersion},
          {"kind", to_string(m.kind)},
          {"feature_names", m.feature_names},
          {"schema_hash", schema_hash(m.feature_names)},
          {"threshold", m.threshold},
          {"params", params}};
}

inline ClassifierModel classifier_from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != kSchemaVersion) {
    throw SchemaError("classifier model: unsupported schema_version");
  }
  ClassifierModel m;
  try {
    m.kind = parse_classifier_kind(j.at("kind").get<std::string>());
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (j.at("schema_hash").get<std::string>() != schema_hash(m.feature_names)) {
      throw SchemaError("classifier model: schema hash does not match its feature names");
    }
    m.threshold = j.at("threshold").get<double>();
    const auto& p = j.at("params");
    const std::size_t d = m.feature_names.size();
    switch (m.kind) {
      case ClassifierKind::kNaiveBayes: {
        NaiveBayesParams nb;
        nb.log_prior = p.at("log_prior").get<std::array<double, 2>>();
        nb.mean = matrix_from_json(p.at("mean"), d);
        nb.variance = matrix_from_json(p.at("variance"), d);
        m.params = std::move(nb);
        break;
      }
      case ClassifierKind::kKnn: {
        KnnParams knn;
        knn.k = p.at("k").get<std::size_t>();
        knn.x = matrix_from_json(p.at("x"), d);
        knn.y = p.at("y").get<std::vector<int>>();
        m.params = std::move(knn);
        break;
      }
      case ClassifierKind::kLogisticRegression: {
        LogisticParams lr;
        lr.weights = p.at("weights").get<std::vector<double>>();
        lr.bias = p.at("bias").get<double>();
        lr.iterations = p.at("iterations").get<std::size_t>();
        lr.gradient_norm = p.at("gradient_norm").get<double>();
        lr.converged = p.at("converged").get<bool>();
        if (lr.weights.size() != d) throw SchemaError("classifier model: weight count mismatch");
        m.params = std::move(lr);
        break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("classifier model: ") + e.what());
  }
  return m;
}

}  // namespace forumip
