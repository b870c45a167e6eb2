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

// Ground truth from a blacklist snapshot, and comparison of predictions
// against it: exclusivity, early-warning lead times, contributing users.

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
#include "forumip/corpus.hpp"
#include "forumip/ipextract.hpp"
#include "forumip/stats.hpp"

namespace forumip {

struct BlacklistSnapshot {
  std::map<Ipv4, Date> entries;  ///< ip -> first reported
  std::string source_name;
  Date snapshot_date{};

  const Date* find(Ipv4 ip) const {
    auto it = entries.find(ip);
    return it == entries.end() ? nullptr : &it->second;
  }
};

/// CSV with required header `ip,first_reported_date`; lines starting with
/// `#` are comments. Repeated addresses
/// keep their earliest date. Without an explicit snapshot date the latest
/// report date is used.
inline BlacklistSnapshot parse_blacklist_csv(std::string_view text, std::string source_name,
                                             std::optional<Date> snapshot_date = std::nullopt) {
  BlacklistSnapshot bl;
  bl.source_name = std::move(source_name);
  std::size_t start = 0, line_no = 0;
  bool header = false;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "ip,first_reported_date") {
        throw ParseError("blacklist: expected header 'ip,first_reported_date'", line_no);
      }
      header = true;
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("blacklist: expected two fields", line_no);
    auto ip = Ipv4::parse(line.substr(0, comma));
    if (!ip) throw ParseError("blacklist: invalid address '" + line.substr(0, comma) + "'", line_no);
    Date d;
    try {
      d = parse_iso_date(line.substr(comma + 1));
    } catch (const ParseError& e) {
      throw ParseError(std::string("blacklist: ") + e.what(), line_no);
    }
    auto [it, inserted] = bl.entries.emplace(*ip, d);
    if (!inserted) it->second = std::min(it->second, d);
  }
  if (!header) throw ParseError("blacklist: missing header", 0);
  Date latest{};
  for (const auto& [ip, d] : bl.entries) latest = std::max(latest, d);
  bl.snapshot_date = snapshot_date.value_or(latest);
  for (const auto& [ip, d] : bl.entries) {
    if (d > bl.snapshot_date) {
      throw IntegrityError("blacklist: " + ip.to_string() + " reported after the snapshot date");
    }
  }
  return bl;
}

inline std::string to_csv(const BlacklistSnapshot& bl) {
  std::string out = "ip,first_reported_date\n";
  for (const auto& [ip, d] : bl.entries) out += ip.to_string() + "," + format_date(d) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Labeling

enum class MentionLabel {
  kMalicious,
  kCandidateBenign,  ///< not listed; not asserted benign
  kLateMention,      ///< listed, but first mentioned on/after its report date
  kOutOfScope,       ///< private / reserved / loopback, when excluded
};

inline std::string_view to_string(MentionLabel l) {
  switch (l) {
    case MentionLabel::kMalicious: return "malicious";
    case MentionLabel::kCandidateBenign: return "candidate_benign";
    case MentionLabel::kLateMention: return "late_mention";
    case MentionLabel::kOutOfScope: return "out_of_scope";
  }
  return "candidate_benign";
}

inline MentionLabel parse_mention_label(std::string_view s) {
  if (s == "malicious") return MentionLabel::kMalicious;
  if (s == "candidate_benign") return MentionLabel::kCandidateBenign;
  if (s == "late_mention") return MentionLabel::kLateMention;
  if (s == "out_of_scope") return MentionLabel::kOutOfScope;
  throw SchemaError("unknown mention label '" + std::string(s) + "'");
}

struct LabeledPair {
  Ipv4 ip;
  std::string post_id;
  std::string forum;
  Timestamp timestamp{};
  MentionLabel label = MentionLabel::kCandidateBenign;

  bool operator==(const LabeledPair&) const = default;
};

struct LabelOptions {
  /// Only mentions strictly before the report date become positives.
  bool require_prior_mention = true;
  /// Non-public addresses are set aside instead of joining the benign pool.
  bool exclude_non_public = true;
};

/// One labeled pair per distinct (ip, post), in first-mention order.
inline std::vector<LabeledPair> label_mentions(const std::vector<IpMention>& mentions,
                                               const BlacklistSnapshot& blacklist,
                                               const LabelOptions& opts = {}) {
  std::vector<LabeledPair> out;
  std::set<std::pair<Ipv4, std::string>> seen;
  for (const auto& m : mentions) {
    if (!seen.insert({m.ip, m.post_id}).second) continue;
    LabeledPair p{m.ip, m.post_id, m.forum, m.timestamp, MentionLabel::kCandidateBenign};
    if (opts.exclude_non_public && classify_ip_scope(m.ip) != IpScope::kPublic) {
      p.label = MentionLabel::kOutOfScope;
    } else if (const Date* reported = blacklist.find(m.ip)) {
      bool prior = day_of(m.timestamp) < *reported;
      p.label = (prior || !opts.require_prior_mention) ? MentionLabel::kMalicious
                                                      : MentionLabel::kLateMention;
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline nlohmann::json to_json(const LabeledPair& p) {
  return {{"ip", p.ip.to_string()},
          {"post", p.post_id},
          {"forum", p.forum},
          {"ts", format_datetime(p.timestamp)},
          {"label", to_string(p.label)}};
}

inline LabeledPair labeled_pair_from_json(const nlohmann::json& j) {
  try {
    return {parse_ipv4_or_throw(j.at("ip").get<std::string>()), j.at("post").get<std::string>(),
            j.value("forum", std::string()), parse_iso_datetime(j.at("ts").get<std::string>()),
            parse_mention_label(j.at("label").get<std::string>())};
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("labeled pair: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Exclusivity

struct ExclusivityCounts {
  std::size_t predicted = 0;  ///< unique predicted-malicious IPs
  std::size_t joint = 0;      ///< also on the blacklist
  std::size_t only_predicted = 0;
};

inline ExclusivityCounts exclusivity(const std::set<Ipv4>& predicted_malicious,
                                     const BlacklistSnapshot& blacklist) {
  ExclusivityCounts c;
  c.predicted = predicted_malicious.size();
  for (auto ip : predicted_malicious) (blacklist.find(ip) ? c.joint : c.only_predicted)++;
  return c;
}

// ---------------------------------------------------------------------------
// Early warning

/// Lead-time thresholds in days: 1, 3, 6 and 12 months.
inline constexpr std::array<long, 4> kLeadThresholdDays = {30, 90, 180, 365};
inline constexpr std::array<const char*, 4> kLeadThresholdNames = {">=1mo", ">=3mo", ">=6mo",
                                                                   ">=12mo"};

struct LeadBuckets {
  std::size_t n_joint = 0;  ///< denominator
  std::size_t n_nonpositive = 0;  ///< mentioned on/after the report date
  std::array<std::size_t, 4> at_least{};
  std::vector<long> lead_days;  ///< one per joint unit, sorted

  double fraction(std::size_t k) const {
    return n_joint ? static_cast<double>(at_least[k]) / static_cast<double>(n_joint) : 0.0;
  }
};

struct EarlyWarningReport {
  LeadBuckets by_ip;                          ///< unique IPs, earliest mention overall
  LeadBuckets by_ip_forum;                    ///< (ip, forum) pairs
  std::map<std::string, LeadBuckets> per_forum;
};

namespace detail {

inline void add_lead(LeadBuckets& b, long lead) {
  ++b.n_joint;
  b.lead_days.push_back(lead);
  if (lead <= 0) {
    ++b.n_nonpositive;
    return;
  }
  for (std::size_t k = 0; k < kLeadThresholdDays.size(); ++k) {
    if (lead >= kLeadThresholdDays[k]) ++b.at_least[k];
  }
}

}  // namespace detail

/// Lead time = first-reported date - earliest forum mention date, in days.
/// Only IPs in `joint` that are both mentioned and listed are considered.
inline EarlyWarningReport early_warning(const std::set<Ipv4>& joint,
                                        const std::vector<IpMention>& mentions,
                                        const BlacklistSnapshot& blacklist) {
  std::map<Ipv4, Date> first;
  std::map<std::pair<Ipv4, std::string>, Date> first_in_forum;
  for (const auto& m : mentions) {
    if (!joint.count(m.ip) || !blacklist.find(m.ip)) continue;
    Date d = day_of(m.timestamp);
    auto [it, ins] = first.emplace(m.ip, d);
    if (!ins) it->second = std::min(it->second, d);
    auto [jt, jns] = first_in_forum.emplace(std::pair{m.ip, m.forum}, d);
    if (!jns) jt->second = std::min(jt->second, d);
  }
  EarlyWarningReport r;
  for (const auto& [ip, d] : first) detail::add_lead(r.by_ip, days_between(d, *blacklist.find(ip)));
  for (const auto& [key, d] : first_in_forum) {
    long lead = days_between(d, *blacklist.find(key.first));
    detail::add_lead(r.by_ip_forum, lead);
    detail::add_lead(r.per_forum[key.second], lead);
  }
  std::sort(r.by_ip.lead_days.begin(), r.by_ip.lead_days.end());
  std::sort(r.by_ip_forum.lead_days.begin(), r.by_ip_forum.lead_days.end());
  for (auto& [f, b] : r.per_forum) std::sort(b.lead_days.begin(), b.lead_days.end());
  return r;
}

inline nlohmann::json to_json(const LeadBuckets& b) {
  nlohmann::json buckets = nlohmann::json::object();
  for (std::size_t k = 0; k < kLeadThresholdDays.size(); ++k) {
    buckets[kLeadThresholdNames[k]] = {{"days", kLeadThresholdDays[k]},
                                       {"count", b.at_least[k]},
                                       {"fraction", b.fraction(k)}};
  }
  return {{"jointly_detected", b.n_joint},
          {"not_earlier", b.n_nonpositive},
          {"buckets", buckets}};
}

// ---------------------------------------------------------------------------
// Contributing users

struct ContributorReport {
  std::size_t n_users = 0;
  CountDistribution posts_per_user;  ///< total posts of each contributing user
  double fraction_more_than_10 = 0.0;
};

/// Distinct authors of posts containing predicted-malicious IPs, with the
/// total number of posts each has made in their forum.
inline ContributorReport contributing_users(const std::vector<std::string>& malicious_post_ids,
                                            const CorpusSet& corpora) {
  std::set<std::pair<const ForumCorpus*, std::string>> users;
  for (const auto& id : malicious_post_ids) {
    auto ref = corpora.find_post(id);
    if (!ref.post) throw IntegrityError("contributing users: unknown post '" + id + "'");
    users.insert({ref.corpus, ref.post->user_id});
  }
  std::vector<std::uint64_t> counts;
  for (const auto& [c, u] : users) counts.push_back(c->posts_of_user(u).size());
  ContributorReport r;
  r.n_users = users.size();
  r.posts_per_user = CountDistribution(std::move(counts));
  r.fraction_more_than_10 = r.posts_per_user.fraction_greater(10);
  return r;
}

// ---------------------------------------------------------------------------
// Report

struct ComparisonReport {
  std::size_t n_total_ips = 0;       ///< unique IPs in scope
  std::size_t n_blacklist_hits = 0;  ///< of those, listed
  ExclusivityCounts exclusivity;
  EarlyWarningReport early;
  ContributorReport contributors;
};

inline nlohmann::json to_json(const ComparisonReport& r) {
  nlohmann::json per_forum = nlohmann::json::object();
  for (const auto& [f, b] : r.early.per_forum) per_forum[f] = to_json(b);
  return {{"total_ips", r.n_total_ips},
          {"blacklist_hits", r.n_blacklist_hits},
          {"predicted_malicious", r.exclusivity.predicted},
          {"joint", r.exclusivity.joint},
          {"predicted_only", r.exclusivity.only_predicted},
          {"early_warning",
           {{"unique_ips", to_json(r.early.by_ip)},
            {"ip_forum_pairs", to_json(r.early.by_ip_forum)},
            {"per_forum", per_forum}}},
          {"contributing_users",
           {{"users", r.contributors.n_users},
            {"fraction_more_than_10_posts", r.contributors.fraction_more_than_10},
            {"posts_per_user", to_json(r.contributors.posts_per_user)}}}};
}

/// Plain-text tables: predicted-only counts, then lead-time buckets.
inline std::string render_comparison_table(const ComparisonReport& r) {
  char buf[256];
  std::string out;
  out += "Malicious IPs found by the classifier and not by the blacklist\n";
  std::snprintf(buf, sizeof buf, "%-14s %14s %14s %14s\n", "", "Blacklist", "Predicted-only",
                "Joint");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-14s %14zu %14zu %14zu\n\n", "all forums", r.n_blacklist_hits,
                r.exclusivity.only_predicted, r.exclusivity.joint);
  out += buf;
  out += "At least X months earlier (jointly detected IPs)\n";
  int width = 14;
  for (const auto& [f, b] : r.early.per_forum) width = std::max(width, static_cast<int>(f.size()));
  width = std::min(width, 64);
  std::snprintf(buf, sizeof buf, "%-*s %8s %12s %12s %12s\n", width, "Forum", "Joint", "3 months",
                "6 months", "12 months");
  out += buf;
  auto row = [&](const std::string& name, const LeadBuckets& b) {
    std::snprintf(buf, sizeof buf, "%-*.*s %8zu %11.1f%% %11.1f%% %11.1f%%\n", width, width,
                  name.c_str(),
                  b.n_joint, 100.0 * b.fraction(1), 100.0 * b.fraction(2),
                  100.0 * b.fraction(3));
    out += buf;
  };
  for (const auto& [f, b] : r.early.per_forum) row(f, b);
  row("all (unique)", r.early.by_ip);
  return out;
}

}  // namespace forumip
