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

// Seeded generator of security-forum corpora with planted structure.
//
// Two user populations post in the forum. Reporters join early, post often
// across many threads and days, and write long posts; casual users post a
// handful of short messages. Malicious addresses are mentioned by a reporter
// with probability 1 - swap_rate and by a casual user otherwise; benign
// addresses the other way round. The label is therefore carried by the
// user-behavior block. Each body word is a class keyword with probability
// keyword_rate, and such a keyword comes from the opposite class's list with
// probability keyword_flip, so words alone carry a weak signal.
//
// Blacklist dates trail the first mention by a uniform lead of
// [1, max_lead_days] days, except for a late_rate share that is reported up
// to 60 days before the mention.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "forumip/common.hpp"
#include "forumip/compare.hpp"
#include "forumip/corpus.hpp"
#include "forumip/geotime.hpp"
#include "forumip/ipextract.hpp"
#include "forumip/random.hpp"

namespace forumip::synth {

struct Options {
  std::string forum = "synthetic";
  std::string language = "en";  ///< "en" or "fa"
  std::string id_prefix = "s";
  Date start = std::chrono::sys_days{std::chrono::year{2012} / 1 / 1};
  long span_days = 900;
  std::size_t n_reporters = 15;
  std::size_t n_casual = 60;
  std::size_t n_threads = 60;
  std::size_t n_malicious_ips = 60;
  std::size_t n_benign_ips = 90;
  std::size_t n_private_ips = 5;
  double swap_rate = 0.12;
  double keyword_rate = 0.06;
  double keyword_flip = 0.4;
  double late_rate = 0.1;
  long max_lead_days = 500;
  std::uint64_t seed = 1;
};

struct Forum {
  ForumCorpus corpus;
  std::vector<Ipv4> malicious_ips;
  std::vector<Ipv4> benign_ips;
  std::map<Ipv4, Date> reports;  ///< blacklist entries for this forum's malicious IPs
};

namespace detail {

inline const std::vector<std::string>& noise_words(const std::string& lang) {
  static const std::vector<std::string> kEn = {
      "thanks",   "help",     "computer", "windows", "problem", "please",  "update",
      "install",  "version",  "browser",  "file",    "system",  "scan",    "found",
      "checked",  "log",      "report",   "today",   "issue",   "running", "machine",
      "network",  "traffic",  "address",  "server",  "blocked", "site",    "link",
      "download", "error",    "message",  "settings", "restart", "program", "latest",
      "tried",    "still",    "works",    "anyone",  "seen",    "similar", "week",
      "forum",    "thread",   "post",     "reply",   "question", "answer", "good",
      "bad",      "safe",     "check",    "test",    "result",  "tool",    "free"};
  static const std::vector<std::string> kFa = {
      "سلام",  "ممنون", "کمک",   "کامپیوتر", "ویندوز", "مشکل",  "لطفا",  "نصب",
      "نسخه",  "مرورگر", "فایل",  "سیستم",   "اسکن",   "پیدا",  "گزارش", "امروز",
      "شبکه",  "ترافیک", "آدرس",  "سرور",    "سایت",   "لینک",  "دانلود", "خطا",
      "پیام",  "تنظیمات", "برنامه", "جدید",    "هفته",   "انجمن", "پاسخ",  "سوال",
      "خوب",   "بد",     "امن",   "بررسی",   "نتیجه",  "ابزار", "رایگان", "دوستان"};
  return lang == "fa" ? kFa : kEn;
}

inline const std::vector<std::string>& malicious_words(const std::string& lang) {
  static const std::vector<std::string> kEn = {"botnet",  "malware", "trojan",  "phishing",
                                               "exploit", "payload", "dropper", "ransomware"};
  static const std::vector<std::string> kFa = {"بدافزار", "تروجان", "فیشینگ", "باتنت",
                                               "نفوذ",    "ویروس",  "هکر",    "باجافزار"};
  return lang == "fa" ? kFa : kEn;
}

inline const std::vector<std::string>& benign_words(const std::string& lang) {
  static const std::vector<std::string> kEn = {"router", "printer", "gateway", "modem",
                                               "lan",    "setup",   "dns",     "wifi"};
  static const std::vector<std::string> kFa = {"روتر", "چاپگر", "مودم",  "وایفای",
                                               "راهاندازی", "دروازه", "محلی", "اتصال"};
  return lang == "fa" ? kFa : kEn;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[static_cast<std::size_t>(rng.below(v.size()))];
}

inline std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

inline Ipv4 random_public_ip(Rng& rng, std::set<Ipv4>& used) {
  while (true) {
    Ipv4 ip(static_cast<std::uint32_t>(rng.next() >> 32));
    if (classify_ip_scope(ip) == IpScope::kPublic && used.insert(ip).second) return ip;
  }
}

/// `kind`: 0 neutral, 1 malicious-leaning, 2 benign-leaning.
inline std::string body(Rng& rng, const Options& o, std::size_t words, int kind) {
  std::string out;
  for (std::size_t w = 0; w < words; ++w) {
    const std::string* word = &pick(noise_words(o.language), rng);
    if (kind != 0 && rng.uniform() < o.keyword_rate) {
      bool mal = kind == 1;
      if (rng.uniform() < o.keyword_flip) mal = !mal;
      word = &pick(mal ? malicious_words(o.language) : benign_words(o.language), rng);
    }
    if (!out.empty()) out += ' ';
    out += *word;
  }
  return out;
}

}  // namespace detail

/// Builds one forum. IP sets of different forums drawn with different seeds
/// are disjoint with overwhelming probability but not guaranteed to be.
inline Forum generate(const Options& o) {
  using detail::between;
  using detail::pick;
  Rng rng(o.seed);
  Forum f;
  std::set<Ipv4> used;
  for (std::size_t i = 0; i < o.n_malicious_ips; ++i) {
    f.malicious_ips.push_back(detail::random_public_ip(rng, used));
  }
  for (std::size_t i = 0; i < o.n_benign_ips; ++i) {
    f.benign_ips.push_back(detail::random_public_ip(rng, used));
  }

  struct Author {
    std::string id;
    bool reporter;
    long join_offset;
  };
  std::vector<Author> reporters, casual;
  for (std::size_t i = 0; i < o.n_reporters; ++i) {
    reporters.push_back({o.id_prefix + "r" + std::to_string(i), true,
                         static_cast<long>(rng.below(static_cast<std::uint64_t>(o.span_days / 10)))});
  }
  for (std::size_t i = 0; i < o.n_casual; ++i) {
    casual.push_back({o.id_prefix + "c" + std::to_string(i), false,
                      static_cast<long>(rng.below(static_cast<std::uint64_t>(o.span_days * 3 / 4)))});
  }

  std::vector<RawPost> posts;
  std::map<std::string, Timestamp> first_post;
  std::size_t next_id = 0;
  auto post_at = [&](const Author& a, long day, std::size_t thread, std::string text) {
    long d = std::clamp(day, a.join_offset, o.span_days - 1);
    Timestamp ts = Timestamp{o.start} + std::chrono::days{d} +
                   std::chrono::seconds{static_cast<long>(rng.below(86400))};
    Post p{o.id_prefix + "p" + std::to_string(next_id++),
           o.id_prefix + "t" + std::to_string(thread), a.id, ts, std::move(text), false};
    auto [it, ins] = first_post.emplace(a.id, ts);
    if (!ins) it->second = std::min(it->second, ts);
    posts.push_back({std::move(p), std::nullopt});
    return ts;
  };
  auto random_day = [&](const Author& a) {
    return a.join_offset +
           static_cast<long>(rng.below(static_cast<std::uint64_t>(o.span_days - a.join_offset)));
  };

  // Background traffic: reporters are prolific and verbose.
  for (const auto& a : reporters) {
    std::size_t n = between(rng, 20, 40);
    for (std::size_t k = 0; k < n; ++k) {
      post_at(a, random_day(a), static_cast<std::size_t>(rng.below(o.n_threads)),
              detail::body(rng, o, between(rng, 40, 80), 0));
    }
  }
  for (const auto& a : casual) {
    std::size_t n = between(rng, 0, 3);
    std::size_t thread = static_cast<std::size_t>(rng.below(o.n_threads));
    for (std::size_t k = 0; k < n; ++k) {
      post_at(a, random_day(a), thread, detail::body(rng, o, between(rng, 8, 20), 0));
    }
  }

  // Address-bearing posts.
  auto mention = [&](Ipv4 ip, bool malicious) {
    bool by_reporter = malicious != (rng.uniform() < o.swap_rate);
    const Author& a = pick(by_reporter ? reporters : casual, rng);
    std::size_t words = by_reporter ? between(rng, 40, 80) : between(rng, 8, 20);
    std::string text = detail::body(rng, o, words, malicious ? 1 : 2);
    auto cut = text.find(' ', text.size() / 2);
    if (cut == std::string::npos) cut = text.size();
    text.insert(cut, " " + ip.to_string());
    return post_at(a, random_day(a), static_cast<std::size_t>(rng.below(o.n_threads)), text);
  };
  for (auto ip : f.malicious_ips) {
    Timestamp first = mention(ip, true);
    if (rng.uniform() < 0.3) first = std::min(first, mention(ip, true));
    long lead = rng.uniform() < o.late_rate
                    ? -static_cast<long>(rng.below(61))
                    : 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(o.max_lead_days)));
    f.reports[ip] = day_of(first) + std::chrono::days{lead};
  }
  for (auto ip : f.benign_ips) mention(ip, false);
  for (std::size_t i = 0; i < o.n_private_ips; ++i) {
    Ipv4 ip(0xC0A80000u | static_cast<std::uint32_t>(rng.below(65536)));
    const Author& a = pick(casual, rng);
    post_at(a, random_day(a), static_cast<std::size_t>(rng.below(o.n_threads)),
            detail::body(rng, o, between(rng, 8, 20), 2) + " " + ip.to_string());
  }

  std::vector<User> users;
  for (const auto* group : {&reporters, &casual}) {
    for (const auto& a : *group) {
      auto it = first_post.find(a.id);
      if (it == first_post.end()) continue;  // never posted
      Date join = std::min(o.start + std::chrono::days{a.join_offset}, day_of(it->second));
      users.push_back({a.id, join, a.id});
    }
  }
  f.corpus = ForumCorpus::build(o.forum, o.language, std::move(users), std::move(posts));
  return f;
}

/// Blacklist over the union of the forums' reports; earliest date wins.
inline BlacklistSnapshot blacklist_of(const std::vector<Forum>& forums, std::string source) {
  std::string csv = "ip,first_reported_date\n";
  for (const auto& f : forums) {
    for (const auto& [ip, d] : f.reports) csv += ip.to_string() + "," + format_date(d) + "\n";
  }
  return parse_blacklist_csv(csv, std::move(source));
}

/// Contiguous ranges over the address space with a few gaps, each given a
/// country and continent from a fixed table.
inline GeoRangeDb geo_db(std::size_t n_ranges, double gap_rate, std::uint64_t seed) {
  static const std::vector<std::pair<std::string, Continent>> kCountries = {
      {"US", Continent::kNA}, {"CA", Continent::kNA}, {"MX", Continent::kNA},
      {"BR", Continent::kSA}, {"AR", Continent::kSA}, {"DE", Continent::kEU},
      {"FR", Continent::kEU}, {"NL", Continent::kEU}, {"RU", Continent::kEU},
      {"CN", Continent::kAS}, {"IR", Continent::kAS}, {"IN", Continent::kAS},
      {"JP", Continent::kAS}, {"ZA", Continent::kAF}, {"NG", Continent::kAF},
      {"AU", Continent::kOC}};
  using detail::pick;
  Rng rng(seed);
  std::set<std::uint32_t> cuts;
  while (cuts.size() < n_ranges - 1) {
    cuts.insert(1 + static_cast<std::uint32_t>(rng.below(0xFFFFFFFFull)));
  }
  std::vector<GeoRange> ranges;
  std::uint64_t start = 0;
  std::vector<std::uint64_t> bounds(cuts.begin(), cuts.end());
  bounds.push_back(0x100000000ull);
  for (auto end : bounds) {
    if (rng.uniform() >= gap_rate) {
      const auto& [cc, cont] = pick(kCountries, rng);
      ranges.push_back(GeoRange{Ipv4(static_cast<std::uint32_t>(start)),
                                Ipv4(static_cast<std::uint32_t>(end - 1)), cc, cont});
    }
    start = end;
  }
  return GeoRangeDb(std::move(ranges));
}

inline std::string to_csv(const GeoRangeDb& db) {
  std::string out = "start_ip,end_ip,country,continent\n";
  for (const auto& r : db.ranges()) {
    out += r.start.to_string() + "," + r.end.to_string() + "," + r.country + "," +
           std::string(to_string(r.continent)) + "\n";
  }
  return out;
}

}  // namespace forumip::synth
