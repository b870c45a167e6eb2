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

// Offline IP-range geolocation and yearly / monthly / per-continent
// summaries of predicted-malicious addresses.

#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "forumip/common.hpp"
#include "forumip/ipextract.hpp"

namespace forumip {

enum class Continent { kNA, kSA, kEU, kAS, kAF, kOC };

inline constexpr std::array<Continent, 6> kContinents = {
    Continent::kNA, Continent::kSA, Continent::kEU, Continent::kAS, Continent::kAF, Continent::kOC};

inline std::string_view to_string(Continent c) {
  static constexpr std::array<std::string_view, 6> kNames = {"NA", "SA", "EU", "AS", "AF", "OC"};
  return kNames[static_cast<std::size_t>(c)];
}

inline std::optional<Continent> parse_continent(std::string_view s) {
  for (auto c : kContinents) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

struct GeoRange {
  Ipv4 start;
  Ipv4 end;  ///< inclusive
  std::string country;
  Continent continent = Continent::kNA;
};

struct GeoLocation {
  std::string country;
  Continent continent;
};

/// Sorted, non-overlapping ranges; immutable once built.
class GeoRangeDb {
 public:
  GeoRangeDb() = default;

  /// Sorts by start and rejects inverted or overlapping ranges.
  explicit GeoRangeDb(std::vector<GeoRange> ranges) : ranges_(std::move(ranges)) {
    std::sort(ranges_.begin(), ranges_.end(),
              [](const GeoRange& a, const GeoRange& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < ranges_.size(); ++i) {
      if (ranges_[i].end < ranges_[i].start) {
        throw IntegrityError("geo db: range " + ranges_[i].start.to_string() + "-" +
                             ranges_[i].end.to_string() + " is inverted");
      }
      if (i > 0 && !(ranges_[i - 1].end < ranges_[i].start)) {
        throw IntegrityError("geo db: range starting at " + ranges_[i].start.to_string() +
                             " overlaps its predecessor");
      }
    }
  }

  const std::vector<GeoRange>& ranges() const { return ranges_; }

  /// Binary search for the last range starting at or before `ip`.
  std::optional<GeoLocation> locate(Ipv4 ip) const {
    auto it = std::upper_bound(ranges_.begin(), ranges_.end(), ip,
                               [](Ipv4 v, const GeoRange& r) { return v < r.start; });
    if (it == ranges_.begin()) return std::nullopt;
    --it;
    if (ip > it->end) return std::nullopt;
    return GeoLocation{it->country, it->continent};
  }

 private:
  std::vector<GeoRange> ranges_;
};

/// CSV `start_ip,end_ip,country,continent`; a header line starting with
/// `start_ip` is optional.
inline GeoRangeDb parse_geo_csv(std::string_view text) {
  std::vector<GeoRange> ranges;
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("start_ip", 0) == 0) continue;
    std::vector<std::string> f;
    std::size_t s = 0;
    while (true) {
      auto c = line.find(',', s);
      f.push_back(line.substr(s, c == std::string::npos ? c : c - s));
      if (c == std::string::npos) break;
      s = c + 1;
    }
    if (f.size() != 4) throw ParseError("geo db: expected 4 fields", line_no);
    auto a = Ipv4::parse(f[0]);
    auto b = Ipv4::parse(f[1]);
    auto cont = parse_continent(f[3]);
    if (!a || !b) throw ParseError("geo db: invalid address", line_no);
    if (!cont) throw ParseError("geo db: unknown continent '" + f[3] + "'", line_no);
    ranges.push_back({*a, *b, f[2], *cont});
  }
  return GeoRangeDb(std::move(ranges));
}

// ---------------------------------------------------------------------------
// Temporal summaries

/// Each IP counted once, in the year of its earliest mention.
inline std::map<int, std::size_t> yearly_counts(const std::vector<IpMention>& mentions) {
  std::map<Ipv4, Timestamp> first;
  for (const auto& m : mentions) {
    auto [it, ins] = first.emplace(m.ip, m.timestamp);
    if (!ins) it->second = std::min(it->second, m.timestamp);
  }
  std::map<int, std::size_t> out;
  for (const auto& [ip, ts] : first) ++out[year_of(ts)];
  return out;
}

/// Distinct posts containing the mentions, per `YYYY-MM` of the post.
inline std::map<std::string, std::size_t> monthly_post_counts(
    const std::vector<IpMention>& mentions) {
  std::map<std::string, Timestamp> posts;
  for (const auto& m : mentions) posts.emplace(m.forum + '\x1f' + m.post_id, m.timestamp);
  std::map<std::string, std::size_t> out;
  for (const auto& [k, ts] : posts) ++out[year_month_of(ts)];
  return out;
}

inline std::string monthly_csv(const std::map<std::string, std::size_t>& series) {
  std::string out = "year-month,count\n";
  for (const auto& [ym, n] : series) out += ym + "," + std::to_string(n) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Spatial summaries

struct ContinentShare {
  std::size_t located = 0;
  std::size_t unlocated = 0;
  std::array<std::size_t, 6> counts{};

  std::size_t total() const { return located + unlocated; }
  double percent(Continent c) const {
    return located ? 100.0 * static_cast<double>(counts[static_cast<std::size_t>(c)]) /
                         static_cast<double>(located)
                   : 0.0;
  }
};

inline ContinentShare continent_distribution(const std::set<Ipv4>& ips, const GeoRangeDb& db) {
  ContinentShare s;
  for (auto ip : ips) {
    auto loc = db.locate(ip);
    if (!loc) {
      ++s.unlocated;
      continue;
    }
    ++s.located;
    ++s.counts[static_cast<std::size_t>(loc->continent)];
  }
  return s;
}

struct GeoReport {
  ContinentShare overall;
  std::map<int, ContinentShare> per_year;             ///< year of earliest mention
  std::map<std::string, ContinentShare> per_forum;
  std::map<int, std::size_t> yearly;
};

/// Global figures count each IP once; per-forum figures count it once in
/// every forum that mentions it.
inline GeoReport geo_report(const std::vector<IpMention>& mentions, const GeoRangeDb& db) {
  GeoReport r;
  std::set<Ipv4> all;
  std::map<Ipv4, Timestamp> first;
  std::map<std::string, std::set<Ipv4>> by_forum;
  for (const auto& m : mentions) {
    all.insert(m.ip);
    by_forum[m.forum].insert(m.ip);
    auto [it, ins] = first.emplace(m.ip, m.timestamp);
    if (!ins) it->second = std::min(it->second, m.timestamp);
  }
  r.overall = continent_distribution(all, db);
  std::map<int, std::set<Ipv4>> by_year;
  for (const auto& [ip, ts] : first) by_year[year_of(ts)].insert(ip);
  for (const auto& [y, s] : by_year) {
    r.per_year[y] = continent_distribution(s, db);
    r.yearly[y] = s.size();
  }
  for (const auto& [f, s] : by_forum) r.per_forum[f] = continent_distribution(s, db);
  return r;
}

inline nlohmann::json to_json(const ContinentShare& s) {
  nlohmann::json pct = nlohmann::json::object();
  nlohmann::json cnt = nlohmann::json::object();
  for (auto c : kContinents) {
    pct[std::string(to_string(c))] = s.percent(c);
    cnt[std::string(to_string(c))] = s.counts[static_cast<std::size_t>(c)];
  }
  return {{"located", s.located}, {"unlocated", s.unlocated}, {"percent", pct}, {"counts", cnt}};
}

inline nlohmann::json to_json(const GeoReport& r) {
  nlohmann::json years = nlohmann::json::object();
  for (const auto& [y, s] : r.per_year) years[std::to_string(y)] = to_json(s);
  nlohmann::json forums = nlohmann::json::object();
  for (const auto& [f, s] : r.per_forum) forums[f] = to_json(s);
  nlohmann::json yearly = nlohmann::json::object();
  for (const auto& [y, n] : r.yearly) yearly[std::to_string(y)] = n;
  return {{"overall", to_json(r.overall)},
          {"per_year", years},
          {"per_forum", forums},
          {"yearly_counts", yearly}};
}

/// CSV rows `scope,NA,SA,EU,AS,AF,OC,located,unlocated`; percentages to one
/// decimal place.
inline std::string geo_csv(const GeoReport& r) {
  std::string out = "scope,NA,SA,EU,AS,AF,OC,located,unlocated\n";
  char buf[32];
  auto row = [&](const std::string& scope, const ContinentShare& s) {
    out += scope;
    for (auto c : kContinents) {
      std::snprintf(buf, sizeof buf, ",%.1f", s.percent(c));
      out += buf;
    }
    out += "," + std::to_string(s.located) + "," + std::to_string(s.unlocated) + "\n";
  };
  row("all", r.overall);
  for (const auto& [y, s] : r.per_year) row("year:" + std::to_string(y), s);
  for (const auto& [f, s] : r.per_forum) row("forum:" + f, s);
  return out;
}

}  // namespace forumip
