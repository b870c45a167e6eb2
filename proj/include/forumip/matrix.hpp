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

#pragma once

#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "forumip/common.hpp"

namespace forumip {

/// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double squared_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return s;
  }

  /// Rows `idx` of this matrix, in that order.
  Matrix select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto src = row(idx[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

  /// [this | other], same row count.
  Matrix hconcat(const Matrix& other) const {
    if (other.rows_ != rows_) throw PreconditionError("hconcat: row count mismatch");
    Matrix out(rows_, cols_ + other.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
      auto a = row(r);
      auto b = other.row(r);
      auto dst = out.row(r);
      std::copy(a.begin(), a.end(), dst.begin());
      std::copy(b.begin(), b.end(), dst.begin() + static_cast<std::ptrdiff_t>(cols_));
    }
    return out;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Posts x named features.
struct FeatureMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> column_names;
  Matrix values;
  /// Rows whose behavioral block could not be resolved (zeroed).
  std::vector<std::string> flagged_rows;

  std::size_t rows() const { return values.rows(); }
  std::size_t cols() const { return values.cols(); }

  /// Throws unless shapes agree, names are unique and every value is
  /// finite and nonnegative.
  void validate() const {
    if (row_ids.size() != values.rows() || column_names.size() != values.cols()) {
      throw IntegrityError("feature matrix: shape does not match labels");
    }
    std::unordered_set<std::string> seen;
    for (const auto& c : column_names) {
      if (!seen.insert(c).second) {
        throw IntegrityError("feature matrix: duplicate column '" + c + "'");
      }
    }
    for (double v : values.data()) {
      if (!std::isfinite(v)) throw NumericalError("feature matrix: non-finite value");
      if (v < 0.0) throw PreconditionError("feature matrix: negative value");
    }
  }

  std::unordered_map<std::string, std::size_t> row_index() const {
    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < row_ids.size(); ++i) idx.emplace(row_ids[i], i);
    return idx;
  }

  bool operator==(const FeatureMatrix&) const = default;
};

/// Rows `ids` of `m`, in that order; flags are kept for the chosen rows.
inline FeatureMatrix subset_rows(const FeatureMatrix& m, const std::vector<std::string>& ids) {
  auto index = m.row_index();
  std::vector<std::size_t> idx;
  idx.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw IntegrityError("feature matrix: no row '" + id + "'");
    idx.push_back(it->second);
  }
  std::unordered_set<std::string> chosen(ids.begin(), ids.end());
  FeatureMatrix out;
  out.row_ids = ids;
  out.column_names = m.column_names;
  out.values = m.values.select_rows(idx);
  for (const auto& f : m.flagged_rows) {
    if (chosen.count(f)) out.flagged_rows.push_back(f);
  }
  return out;
}

// Sparse triplet text format:
//
//   #forumip-feature-matrix <schema_version>
//   #columns<TAB>name<TAB>name...
//   #rows<TAB>id<TAB>id...
//   #flagged<TAB>id...            (optional)
//   row_id<TAB>column_name<TAB>value   -- one line per nonzero cell
//
// Values are written with 17 significant digits so reading back is exact.
// Any other line starting with `#` is metadata and is skipped on read.

inline std::string to_triplets(const FeatureMatrix& m) {
  auto check = [](const std::string& s) {
    if (s.find_first_of("\t\n") != std::string::npos) {
      throw IntegrityError("feature matrix: label contains tab or newline: '" + s + "'");
    }
  };
  std::string out = "#forumip-feature-matrix " + std::to_string(kSchemaVersion) + "\n#columns";
  for (const auto& c : m.column_names) {
    check(c);
    out += '\t' + c;
  }
  out += "\n#rows";
  for (const auto& r : m.row_ids) {
    check(r);
    out += '\t' + r;
  }
  out += '\n';
  if (!m.flagged_rows.empty()) {
    out += "#flagged";
    for (const auto& r : m.flagged_rows) out += '\t' + r;
    out += '\n';
  }
  char buf[64];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      double v = m.values(r, c);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += m.row_ids[r] + '\t' + m.column_names[c] + '\t' + buf + '\n';
    }
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find('\t', start);
    out.emplace_back(line.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace detail

inline FeatureMatrix from_triplets(std::string_view text) {
  FeatureMatrix m;
  std::unordered_map<std::string, std::size_t> rows, cols;
  bool have_header = false, have_cols = false, have_rows = false;
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!have_header) {
      const std::string_view magic = "#forumip-feature-matrix ";
      if (line.substr(0, magic.size()) != magic) {
        throw ParseError("feature matrix: missing header", line_no);
      }
      if (std::string(line.substr(magic.size())) != std::to_string(kSchemaVersion)) {
        throw SchemaError("feature matrix: unsupported schema_version " +
                          std::string(line.substr(magic.size())));
      }
      have_header = true;
      continue;
    }
    auto fields = detail::split_tabs(line);
    if (fields[0] == "#columns") {
      m.column_names.assign(fields.begin() + 1, fields.end());
      for (std::size_t i = 0; i < m.column_names.size(); ++i) cols[m.column_names[i]] = i;
      have_cols = true;
      continue;
    }
    if (fields[0] == "#rows") {
      m.row_ids.assign(fields.begin() + 1, fields.end());
      for (std::size_t i = 0; i < m.row_ids.size(); ++i) rows[m.row_ids[i]] = i;
      have_rows = true;
      continue;
    }
    if (fields[0] == "#flagged") {
      m.flagged_rows.assign(fields.begin() + 1, fields.end());
      continue;
    }
    if (fields[0].starts_with('#')) continue;  // other metadata
    if (!have_cols || !have_rows) throw ParseError("feature matrix: cell before labels", line_no);
    if (m.values.rows() != m.row_ids.size() || m.values.cols() != m.column_names.size()) {
      m.values = Matrix(m.row_ids.size(), m.column_names.size());
    }
    if (fields.size() != 3) throw ParseError("feature matrix: expected 3 fields", line_no);
    auto r = rows.find(fields[0]);
    auto c = cols.find(fields[1]);
    if (r == rows.end() || c == cols.end()) {
      throw ParseError("feature matrix: unknown row or column", line_no);
    }
    try {
      m.values(r->second, c->second) = std::stod(fields[2]);
    } catch (const std::exception&) {
      throw ParseError("feature matrix: bad value '" + fields[2] + "'", line_no);
    }
  }
  if (!have_header || !have_cols || !have_rows) {
    throw ParseError("feature matrix: truncated file", line_no);
  }
  if (m.values.rows() != m.row_ids.size() || m.values.cols() != m.column_names.size()) {
    m.values = Matrix(m.row_ids.size(), m.column_names.size());
  }
  return m;
}

}  // namespace forumip
