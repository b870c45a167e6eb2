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

// Sparse soft co-clustering of a nonnegative posts x features matrix X:
//
//   minimize  ||X - sum_r a_r b_r^T||_F^2 + lambda * (sum |a_r| + sum |b_r|)
//   subject to a_r >= 0, b_r >= 0.
//
// a_r (one weight per post) and b_r (one weight per feature) describe
// co-cluster r. The fit alternates between the two sides; within a side each
// factor vector is replaced by its exact minimizer with everything else
// fixed, which for a nonnegative L1-penalized least-squares coordinate is
//
//   a_r(i) = max(0, (<E_r(i,:), b_r> - lambda / 2) / ||b_r||^2),
//
// where E_r is the residual with component r added back. Every update is an
// exact block minimization, so the objective never increases.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "forumip/common.hpp"
#include "forumip/matrix.hpp"
#include "forumip/random.hpp"

namespace forumip {

struct SmrOptions {
  std::size_t rank = 10;
  double lambda = 0.01;
  std::uint64_t seed = 1;
  std::size_t max_iter = 200;  ///< full sweeps (A then B)
  double tol = 1e-6;           ///< relative objective change between sweeps
};

struct CoClusterModel {
  std::size_t rank = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  Matrix a;  ///< rank x n_rows; row r is a_r
  Matrix b;  ///< rank x n_cols; row r is b_r
  std::vector<std::string> row_ids;
  std::vector<std::string> column_names;
  /// Objective at initialization, then after every half-sweep.
  std::vector<double> objective_trace;
  std::size_t sweeps = 0;
  bool converged = false;

  /// Components whose a_r or b_r is entirely zero.
  std::vector<std::size_t> empty_components() const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < rank; ++r) {
      auto ar = a.row(r);
      auto br = b.row(r);
      bool a_zero = std::all_of(ar.begin(), ar.end(), [](double v) { return v == 0.0; });
      bool b_zero = std::all_of(br.begin(), br.end(), [](double v) { return v == 0.0; });
      if (a_zero || b_zero) out.push_back(r);
    }
    return out;
  }

  std::size_t nonzeros() const {
    std::size_t n = 0;
    for (double v : a.data()) n += v != 0.0;
    for (double v : b.data()) n += v != 0.0;
    return n;
  }

  /// Latent rows: n_rows x rank (the transpose of `a`).
  Matrix latent() const {
    Matrix out(a.cols(), rank);
    for (std::size_t r = 0; r < rank; ++r) {
      for (std::size_t i = 0; i < a.cols(); ++i) out(i, r) = a(r, i);
    }
    return out;
  }
};

namespace detail {

/// X - sum_r a_r b_r^T
inline Matrix smr_residual(const Matrix& x, const Matrix& a, const Matrix& b) {
  Matrix e = x;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto ar = a.row(r);
    auto br = b.row(r);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (ar[i] == 0.0) continue;
      auto ei = e.row(i);
      for (std::size_t j = 0; j < x.cols(); ++j) ei[j] -= ar[i] * br[j];
    }
  }
  return e;
}

/// One half-sweep over the row-side factors `u` (rank x n) with the
/// column-side factors `v` (rank x m) fixed. `e` is the current residual,
/// oriented n x m when `transposed` is false and m x n otherwise (we never
/// materialize the transpose: indices are swapped instead).
inline void smr_half_sweep(Matrix& u, const Matrix& v, Matrix& e, bool transposed,
                           double lambda) {
  const std::size_t n = u.cols();
  const std::size_t m = v.cols();
  auto at = [&](std::size_t i, std::size_t j) -> double& {
    return transposed ? e(j, i) : e(i, j);
  };
  std::vector<double> delta(n);
  for (std::size_t r = 0; r < u.rows(); ++r) {
    auto ur = u.row(r);
    auto vr = v.row(r);
    double den = 0.0;
    for (double x : vr) den += x * x;
    for (std::size_t i = 0; i < n; ++i) {
      double next = 0.0;
      if (den > 0.0) {
        double dot = 0.0;
        for (std::size_t j = 0; j < m; ++j) dot += at(i, j) * vr[j];
        double num = dot + ur[i] * den;
        next = std::max(0.0, (num - lambda / 2.0) / den);
      }
      delta[i] = next - ur[i];
      ur[i] = next;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (delta[i] == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) at(i, j) -= delta[i] * vr[j];
    }
  }
}

inline double l1_sum(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += std::abs(v);
  return s;
}

}  // namespace detail

/// Full objective for factors stored as rank x n and rank x m.
inline double smr_objective(const Matrix& x, const Matrix& a, const Matrix& b,
                            double lambda) {
  return detail::smr_residual(x, a, b).squared_norm() +
         lambda * (detail::l1_sum(a) + detail::l1_sum(b));
}

inline void check_smr_input(const Matrix& x, const SmrOptions& opts) {
  for (double v : x.data()) {
    if (std::isnan(v) || !std::isfinite(v)) {
      throw PreconditionError("co-clustering: matrix contains NaN or infinite values");
    }
    if (v < 0.0) throw PreconditionError("co-clustering: matrix has negative entries");
  }
  if (opts.rank < 1) throw PreconditionError("co-clustering: rank must be >= 1");
  if (opts.rank > std::min(x.rows(), x.cols())) {
    throw PreconditionError("co-clustering: rank " + std::to_string(opts.rank) +
                            " exceeds min(rows, cols) = " +
                            std::to_string(std::min(x.rows(), x.cols())));
  }
  if (!(opts.lambda >= 0.0)) throw PreconditionError("co-clustering: lambda must be >= 0");
}

/// Fits from explicit starting factors (rank x n, rank x m).
inline CoClusterModel fit_smr_from(const Matrix& x, Matrix a, Matrix b,
                                   const SmrOptions& opts) {
  check_smr_input(x, opts);
  CoClusterModel model;
  model.rank = opts.rank;
  model.lambda = opts.lambda;
  model.seed = opts.seed;

  Matrix e = detail::smr_residual(x, a, b);
  auto objective = [&] {
    return e.squared_norm() + opts.lambda * (detail::l1_sum(a) + detail::l1_sum(b));
  };
  model.objective_trace.push_back(objective());
  double prev = model.objective_trace.back();
  for (std::size_t sweep = 0; sweep < opts.max_iter; ++sweep) {
    detail::smr_half_sweep(a, b, e, /*transposed=*/false, opts.lambda);
    e = detail::smr_residual(x, a, b);
    model.objective_trace.push_back(objective());
    detail::smr_half_sweep(b, a, e, /*transposed=*/true, opts.lambda);
    e = detail::smr_residual(x, a, b);
    double f = objective();
    model.objective_trace.push_back(f);
    model.sweeps = sweep + 1;
    if (!std::isfinite(f)) throw NumericalError("co-clustering: objective diverged");
    if (f == 0.0 || (prev - f) <= opts.tol * prev) {
      model.converged = true;
      break;
    }
    prev = f;
  }
  model.a = std::move(a);
  model.b = std::move(b);
  return model;
}

/// Seeded initialization: entries uniform in (0, 1) scaled by mean(X).
inline std::pair<Matrix, Matrix> smr_initial_factors(const Matrix& x, std::size_t rank,
                                                     std::uint64_t seed) {
  double mean = 0.0;
  for (double v : x.data()) mean += v;
  if (!x.data().empty()) mean /= static_cast<double>(x.data().size());
  Rng rng(seed);
  Matrix a(rank, x.rows()), b(rank, x.cols());
  for (double& v : a.data()) v = rng.uniform_open() * mean;
  for (double& v : b.data()) v = rng.uniform_open() * mean;
  return {std::move(a), std::move(b)};
}

inline CoClusterModel fit_smr(const Matrix& x, const SmrOptions& opts) {
  check_smr_input(x, opts);
  auto [a, b] = smr_initial_factors(x, opts.rank, opts.seed);
  return fit_smr_from(x, std::move(a), std::move(b), opts);
}

inline CoClusterModel fit_smr(const FeatureMatrix& x, const SmrOptions& opts) {
  CoClusterModel m = fit_smr(x.values, opts);
  m.row_ids = x.row_ids;
  m.column_names = x.column_names;
  return m;
}

/// Latent coordinates of one row: argmin over a >= 0 of
/// ||x - sum_r a_r b_r||^2 + lambda * sum a_r, by cyclic coordinate descent
/// (the problem is convex in a once b is fixed).
inline std::vector<double> project_row(const CoClusterModel& model,
                                       std::span<const double> x,
                                       double tol = 1e-13, std::size_t max_iter = 100000) {
  const std::size_t rank = model.rank;
  const std::size_t m = model.b.cols();
  if (x.size() != m) throw SchemaError("projection: row width does not match the model");
  std::vector<double> gram(rank * rank), c(rank, 0.0), a(rank, 0.0);
  for (std::size_t r = 0; r < rank; ++r) {
    auto br = model.b.row(r);
    for (std::size_t j = 0; j < m; ++j) c[r] += br[j] * x[j];
    for (std::size_t s = 0; s < rank; ++s) {
      auto bs = model.b.row(s);
      double g = 0.0;
      for (std::size_t j = 0; j < m; ++j) g += br[j] * bs[j];
      gram[r * rank + s] = g;
    }
  }
  for (std::size_t it = 0; it < max_iter; ++it) {
    double change = 0.0, scale = 0.0;
    for (std::size_t r = 0; r < rank; ++r) {
      double den = gram[r * rank + r];
      double next = 0.0;
      if (den > 0.0) {
        double num = c[r];
        for (std::size_t s = 0; s < rank; ++s) {
          if (s != r) num -= gram[r * rank + s] * a[s];
        }
        next = std::max(0.0, (num - model.lambda / 2.0) / den);
      }
      change = std::max(change, std::abs(next - a[r]));
      scale = std::max(scale, std::abs(next));
      a[r] = next;
    }
    if (change <= tol * std::max(1.0, scale)) break;
  }
  return a;
}

/// Projects rows of `x` (same columns as the training matrix) to latent
/// coordinates: rows x rank.
inline Matrix project_rows(const CoClusterModel& model, const FeatureMatrix& x) {
  if (x.column_names != model.column_names) {
    throw SchemaError("projection: feature columns differ from the training columns");
  }
  Matrix out(x.rows(), model.rank);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto a = project_row(model, x.values.row(i));
    std::copy(a.begin(), a.end(), out.row(i).begin());
  }
  return out;
}

/// Latent feature matrix with columns `z:0..z:R-1`.
inline FeatureMatrix latent_features(const CoClusterModel& model,
                                     const std::vector<std::string>& row_ids,
                                     Matrix latent) {
  FeatureMatrix f;
  f.row_ids = row_ids;
  for (std::size_t r = 0; r < model.rank; ++r) f.column_names.push_back("z:" + std::to_string(r));
  f.values = std::move(latent);
  return f;
}

// Persisted form keeps b and the column schema; a is recomputed by
// projection when needed.
inline nlohmann::json to_json(const CoClusterModel& m) {
  nlohmann::json b = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rank; ++r) {
    auto br = m.b.row(r);
    b.push_back(std::vector<double>(br.begin(), br.end()));
  }
  return {{"schema_version", kSchemaVersion},
          {"rank", m.rank},
          {"lambda", m.lambda},
          {"seed", m.seed},
          {"column_names", m.column_names},
          {"b", b},
          {"objective_trace", m.objective_trace},
          {"sweeps", m.sweeps},
          {"converged", m.converged},
          {"empty_components", m.empty_components()}};
}

inline CoClusterModel cocluster_from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != kSchemaVersion) {
    throw SchemaError("co-cluster model: unsupported schema_version");
  }
  CoClusterModel m;
  try {
    m.rank = j.at("rank").get<std::size_t>();
    m.lambda = j.at("lambda").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.column_names = j.at("column_names").get<std::vector<std::string>>();
    m.objective_trace = j.at("objective_trace").get<std::vector<double>>();
    m.sweeps = j.at("sweeps").get<std::size_t>();
    m.converged = j.at("converged").get<bool>();
    const auto& b = j.at("b");
    m.b = Matrix(m.rank, m.column_names.size());
    if (b.size() != m.rank) throw SchemaError("co-cluster model: wrong number of b vectors");
    for (std::size_t r = 0; r < m.rank; ++r) {
      auto row = b[r].get<std::vector<double>>();
      if (row.size() != m.column_names.size()) {
        throw SchemaError("co-cluster model: b vector length mismatch");
      }
      std::copy(row.begin(), row.end(), m.b.row(r).begin());
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("co-cluster model: ") + e.what());
  }
  return m;
}

}  // namespace forumip
