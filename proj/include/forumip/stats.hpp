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

#include <algorithm>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

namespace forumip {

/// One step of a complementary CDF: fraction of samples strictly greater
/// than `x`.
struct CcdfPoint {
  std::uint64_t x = 0;
  double fraction = 0.0;
};

/// Empirical distribution of nonnegative integer counts (posts per user,
/// IPs per post, ...).
class CountDistribution {
 public:
  CountDistribution() = default;
  explicit CountDistribution(std::vector<std::uint64_t> samples)
      : sorted_(std::move(samples)) {
    std::sort(sorted_.begin(), sorted_.end());
  }

  std::size_t size() const { return sorted_.size(); }
  bool empty() const { return sorted_.empty(); }
  const std::vector<std::uint64_t>& sorted() const { return sorted_; }

  /// P(X > x).
  double fraction_greater(std::uint64_t x) const {
    if (sorted_.empty()) return 0.0;
    auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(sorted_.end() - it) /
           static_cast<double>(sorted_.size());
  }

  /// P(X <= x).
  double fraction_at_most(std::uint64_t x) const {
    if (sorted_.empty()) return 0.0;
    return 1.0 - fraction_greater(x);
  }

  /// Step series: a point at 0 followed by one point per distinct value.
  std::vector<CcdfPoint> ccdf() const {
    std::vector<CcdfPoint> out;
    if (sorted_.empty()) return out;
    const double n = static_cast<double>(sorted_.size());
    if (sorted_.front() != 0) out.push_back({0, 1.0});
    for (std::size_t i = 0; i < sorted_.size();) {
      std::size_t j = i;
      while (j < sorted_.size() && sorted_[j] == sorted_[i]) ++j;
      out.push_back({sorted_[i], static_cast<double>(sorted_.size() - j) / n});
      i = j;
    }
    return out;
  }

  double mean() const {
    if (sorted_.empty()) return 0.0;
    long double sum = 0;
    for (auto v : sorted_) sum += v;
    return static_cast<double>(sum / sorted_.size());
  }

  double median() const {
    if (sorted_.empty()) return 0.0;
    std::size_t n = sorted_.size();
    if (n % 2 == 1) return static_cast<double>(sorted_[n / 2]);
    return (static_cast<double>(sorted_[n / 2 - 1]) +
            static_cast<double>(sorted_[n / 2])) /
           2.0;
  }

  std::uint64_t max() const { return sorted_.empty() ? 0 : sorted_.back(); }
  std::uint64_t min() const { return sorted_.empty() ? 0 : sorted_.front(); }

 private:
  std::vector<std::uint64_t> sorted_;
};

inline nlohmann::json to_json(const CountDistribution& d) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& p : d.ccdf()) series.push_back({p.x, p.fraction});
  return {{"n", d.size()},     {"min", d.min()},       {"max", d.max()},
          {"mean", d.mean()},  {"median", d.median()}, {"ccdf", series}};
}

}  // namespace forumip
