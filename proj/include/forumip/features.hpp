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

// Post features: per-user behavioral statistics, TF-IDF keyword weights,
// information-gain keyword selection, and the posts x features matrix.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "forumip/common.hpp"
#include "forumip/corpus.hpp"
#include "forumip/ipextract.hpp"
#include "forumip/matrix.hpp"
#include "forumip/random.hpp"
#include "forumip/text.hpp"

namespace forumip {

// ---------------------------------------------------------------------------
// Entropy

/// Shannon entropy, in bits, of the distribution proportional to `counts`.
/// Zero counts are ignored. Evaluated as sum over groups of equal counts of
/// (m*c/N) * log2(N/c), which is exact for single-support (0) and uniform
/// (log2 n) distributions.
inline double shannon_entropy_bits(std::span<const std::uint64_t> counts) {
  std::map<std::uint64_t, std::uint64_t> groups;
  std::uint64_t total = 0;
  for (auto c : counts) {
    if (c == 0) continue;
    ++groups[c];
    total += c;
  }
  if (total == 0) return 0.0;
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (auto [c, m] : groups) {
    h += (static_cast<double>(m * c) / n) * std::log2(n / static_cast<double>(c));
  }
  return h;
}

// ---------------------------------------------------------------------------
// Behavioral features

struct BehavioralFeatures {
  static constexpr std::size_t kCount = 11;
  static constexpr std::array<const char*, kCount> kNames = {
      "n_posts",         "n_threads",          "n_threads_initiated",
      "avg_thread_entropy", "n_active_days",   "avg_day_entropy",
      "active_lifetime_days", "wait_time_days", "avg_post_len",
      "median_post_len", "max_post_len"};

  double n_posts = 0;
  double n_threads = 0;
  double n_threads_initiated = 0;
  double avg_thread_entropy = 0;  ///< bits
  double n_active_days = 0;
  double avg_day_entropy = 0;  ///< bits
  double active_lifetime_days = 0;
  double wait_time_days = 0;
  double avg_post_len = 0;  ///< code points
  double median_post_len = 0;
  double max_post_len = 0;
  bool zero_posts = false;

  std::array<double, kCount> values() const {
    return {n_posts,         n_threads,          n_threads_initiated,
            avg_thread_entropy, n_active_days,   avg_day_entropy,
            active_lifetime_days, wait_time_days, avg_post_len,
            median_post_len, max_post_len};
  }
};

/// The entropies are single Shannon entropies of the user's posts over
/// threads and over active days. Computed over the user's whole history.
inline BehavioralFeatures behavioral_features(const ForumCorpus& corpus,
                                              std::string_view user_id) {
  const User* user = corpus.find_user(user_id);
  if (!user) throw PreconditionError("unknown user '" + std::string(user_id) + "'");
  BehavioralFeatures f;
  const auto& idx = corpus.posts_of_user(user_id);
  if (idx.empty()) {
    f.zero_posts = true;
    return f;
  }
  std::map<std::string_view, std::uint64_t> per_thread;
  std::map<Date, std::uint64_t> per_day;
  std::vector<std::uint64_t> lengths;
  Date first = day_of(corpus.posts()[idx.front()].timestamp);
  Date last = first;
  std::uint64_t initiated = 0;
  for (std::size_t i : idx) {
    const Post& p = corpus.posts()[i];
    ++per_thread[p.thread_id];
    Date d = day_of(p.timestamp);
    ++per_day[d];
    first = std::min(first, d);
    last = std::max(last, d);
    lengths.push_back(char_length(p.body));
    if (p.is_thread_initiator) ++initiated;
  }
  std::vector<std::uint64_t> tc, dc;
  for (auto& [k, v] : per_thread) tc.push_back(v);
  for (auto& [k, v] : per_day) dc.push_back(v);
  std::sort(lengths.begin(), lengths.end());

  f.n_posts = static_cast<double>(idx.size());
  f.n_threads = static_cast<double>(per_thread.size());
  f.n_threads_initiated = static_cast<double>(initiated);
  f.avg_thread_entropy = shannon_entropy_bits(tc);
  f.n_active_days = static_cast<double>(per_day.size());
  f.avg_day_entropy = shannon_entropy_bits(dc);
  f.active_lifetime_days = static_cast<double>(days_between(first, last));
  f.wait_time_days =
      static_cast<double>(std::max(0L, days_between(user->join_date, first)));
  long double sum = 0;
  for (auto l : lengths) sum += l;
  f.avg_post_len = static_cast<double>(sum / lengths.size());
  std::size_t n = lengths.size();
  f.median_post_len = n % 2 ? static_cast<double>(lengths[n / 2])
                            : (static_cast<double>(lengths[n / 2 - 1]) +
                               static_cast<double>(lengths[n / 2])) / 2.0;
  f.max_post_len = static_cast<double>(lengths.back());
  return f;
}

// ---------------------------------------------------------------------------
// TF-IDF

/// weight(d, t) = (count(d, t) / |d|) * ln(N / df(t)), with |d| the number
/// of non-stop-word tokens in d.
struct TfidfResult {
  std::vector<std::string> terms;  ///< sorted
  std::vector<double> idf;
  /// Per document: (term index, weight) for terms present, by term index.
  std::vector<std::vector<std::pair<std::size_t, double>>> weights;
};

/// `documents` are already tokenized with stop-words removed.
inline TfidfResult tfidf_weights(const std::vector<std::vector<std::string>>& documents) {
  if (documents.empty()) throw EmptyInputError("tfidf: no documents");
  std::map<std::string, std::uint64_t> df;
  for (const auto& doc : documents) {
    std::set<std::string_view> seen(doc.begin(), doc.end());
    for (auto t : seen) ++df[std::string(t)];
  }
  TfidfResult r;
  std::unordered_map<std::string, std::size_t> index;
  const double n = static_cast<double>(documents.size());
  for (const auto& [t, c] : df) {
    index.emplace(t, r.terms.size());
    r.terms.push_back(t);
    r.idf.push_back(std::log(n / static_cast<double>(c)));
  }
  for (const auto& doc : documents) {
    std::map<std::size_t, std::uint64_t> counts;
    for (const auto& t : doc) ++counts[index.at(t)];
    std::vector<std::pair<std::size_t, double>> w;
    const double len = static_cast<double>(doc.size());
    for (auto [ti, c] : counts) w.emplace_back(ti, static_cast<double>(c) / len * r.idf[ti]);
    r.weights.push_back(std::move(w));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Information gain

/// Entropy in bits of a two-outcome count pair.
inline double binary_entropy_bits(std::uint64_t a, std::uint64_t b) {
  std::array<std::uint64_t, 2> c{a, b};
  return shannon_entropy_bits(c);
}

/// IG(label; term presence) in bits from the 2x2 contingency table
/// [present/absent] x [malicious/benign].
inline double information_gain(std::uint64_t present_malicious, std::uint64_t present_benign,
                               std::uint64_t absent_malicious, std::uint64_t absent_benign) {
  const std::uint64_t present = present_malicious + present_benign;
  const std::uint64_t absent = absent_malicious + absent_benign;
  const std::uint64_t total = present + absent;
  if (total == 0) return 0.0;
  const std::uint64_t malicious = present_malicious + absent_malicious;
  const double h_label = binary_entropy_bits(malicious, present_benign + absent_benign);
  // Empirical independence and perfect prediction are decided in integer
  // arithmetic so those cases come out exact.
  if (static_cast<unsigned __int128>(present_malicious) * total ==
      static_cast<unsigned __int128>(present) * malicious) {
    return 0.0;
  }
  if ((present_benign == 0 && absent_malicious == 0) ||
      (present_malicious == 0 && absent_benign == 0)) {
    return h_label;
  }
  const double n = static_cast<double>(total);
  const double h_cond =
      static_cast<double>(present) / n * binary_entropy_bits(present_malicious, present_benign) +
      static_cast<double>(absent) / n * binary_entropy_bits(absent_malicious, absent_benign);
  return std::max(0.0, h_label - h_cond);
}

struct VocabularyModel {
  std::string language;
  std::vector<std::string> terms;  ///< by decreasing information gain
  std::vector<double> idf;
  std::vector<double> ig;
  std::vector<std::string> stopwords;  ///< sorted

  bool operator==(const VocabularyModel&) const = default;
};

struct VocabularyOptions {
  double sample_fraction = 0.5;
  std::size_t cap = 100;
  std::uint64_t seed = 1;
};

/// `documents` are stop-word-filtered token lists; `malicious[i]` labels
/// document i. IG is measured on a seeded random subset of the documents;
/// idf on all of them.
inline VocabularyModel select_terms_by_information_gain(
    const std::vector<std::vector<std::string>>& documents,
    const std::vector<bool>& malicious, const VocabularyOptions& opts,
    std::string language = "en", const StopWords& stop = {}) {
  if (documents.size() != malicious.size()) {
    throw PreconditionError("vocabulary: documents and labels differ in length");
  }
  if (documents.empty()) throw EmptyInputError("vocabulary: no documents");
  if (!(opts.sample_fraction > 0.0 && opts.sample_fraction <= 1.0)) {
    throw PreconditionError("vocabulary: sample_fraction must be in (0, 1]");
  }
  auto one_class = [](const std::vector<bool>& y) {
    return std::all_of(y.begin(), y.end(), [&](bool b) { return b == y.front(); });
  };
  if (one_class(malicious)) {
    throw PreconditionError("vocabulary: labels contain a single class");
  }

  Rng rng(opts.seed);
  std::size_t n_sample = static_cast<std::size_t>(
      std::llround(opts.sample_fraction * static_cast<double>(documents.size())));
  n_sample = std::clamp<std::size_t>(n_sample, 1, documents.size());
  auto sample = sample_without_replacement(documents.size(), n_sample, rng);
  std::sort(sample.begin(), sample.end());
  std::vector<bool> ys;
  for (auto i : sample) ys.push_back(malicious[i]);
  if (one_class(ys)) {
    throw PreconditionError("vocabulary: sampled labels contain a single class");
  }

  std::uint64_t n_mal = 0, n_ben = 0;
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> presence;
  for (auto i : sample) {
    (malicious[i] ? n_mal : n_ben)++;
    std::set<std::string_view> seen(documents[i].begin(), documents[i].end());
    for (auto t : seen) {
      auto& p = presence[std::string(t)];
      (malicious[i] ? p.first : p.second)++;
    }
  }

  struct Scored {
    std::string term;
    double ig;
  };
  std::vector<Scored> scored;
  scored.reserve(presence.size());
  for (const auto& [t, p] : presence) {
    scored.push_back({t, information_gain(p.first, p.second, n_mal - p.first, n_ben - p.second)});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.ig != b.ig) return a.ig > b.ig;
    return a.term < b.term;
  });
  if (scored.size() > opts.cap) scored.resize(opts.cap);

  std::map<std::string, std::uint64_t> df;
  for (const auto& s : scored) df[s.term] = 0;
  for (const auto& doc : documents) {
    std::set<std::string_view> seen(doc.begin(), doc.end());
    for (auto t : seen) {
      auto it = df.find(std::string(t));
      if (it != df.end()) ++it->second;
    }
  }

  VocabularyModel v;
  v.language = std::move(language);
  const double n = static_cast<double>(documents.size());
  for (const auto& s : scored) {
    v.terms.push_back(s.term);
    v.ig.push_back(s.ig);
    v.idf.push_back(std::log(n / static_cast<double>(df.at(s.term))));
  }
  v.stopwords.assign(stop.begin(), stop.end());
  std::sort(v.stopwords.begin(), v.stopwords.end());
  return v;
}

inline nlohmann::json to_json(const VocabularyModel& v) {
  nlohmann::json terms = nlohmann::json::array();
  for (std::size_t i = 0; i < v.terms.size(); ++i) {
    terms.push_back({{"term", v.terms[i]}, {"idf", v.idf[i]}, {"ig", v.ig[i]}});
  }
  return {{"schema_version", kSchemaVersion},
          {"language", v.language},
          {"terms", terms},
          {"stopwords", v.stopwords}};
}

inline VocabularyModel vocabulary_from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != kSchemaVersion) {
    throw SchemaError("vocabulary: unsupported schema_version");
  }
  VocabularyModel v;
  try {
    v.language = j.at("language").get<std::string>();
    for (const auto& t : j.at("terms")) {
      v.terms.push_back(t.at("term").get<std::string>());
      v.idf.push_back(t.at("idf").get<double>());
      v.ig.push_back(t.at("ig").get<double>());
    }
    v.stopwords = j.at("stopwords").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("vocabulary: ") + e.what());
  }
  return v;
}

// ---------------------------------------------------------------------------
// Feature matrix

enum class MatrixMode { kWordsOnly, kCombined };

inline std::string behavioral_column(std::size_t k) {
  return std::string("u:") + BehavioralFeatures::kNames[k];
}
inline std::string term_column(const std::string& term) { return "w:" + term; }

/// One row per post id. The term block holds tf * idf for each vocabulary
/// term; in combined mode the posting user's behavioral block follows, each
/// column min-max scaled to [0, 1] over the rows. Posts by the anonymous
/// user get a zero behavioral block and are listed in `flagged_rows`.
inline FeatureMatrix build_matrix(const CorpusSet& corpora,
                                  const std::vector<std::string>& post_ids,
                                  const VocabularyModel& vocab, MatrixMode mode,
                                  const TokenizerOptions& tok = {}) {
  const std::size_t n_terms = vocab.terms.size();
  const std::size_t n_cols =
      n_terms + (mode == MatrixMode::kCombined ? BehavioralFeatures::kCount : 0);
  FeatureMatrix m;
  m.row_ids = post_ids;
  m.values = Matrix(post_ids.size(), n_cols);
  for (const auto& t : vocab.terms) m.column_names.push_back(term_column(t));
  if (mode == MatrixMode::kCombined) {
    for (std::size_t k = 0; k < BehavioralFeatures::kCount; ++k) {
      m.column_names.push_back(behavioral_column(k));
    }
  }

  std::unordered_map<std::string, std::size_t> term_index;
  for (std::size_t i = 0; i < n_terms; ++i) term_index.emplace(vocab.terms[i], i);
  StopWords stop(vocab.stopwords.begin(), vocab.stopwords.end());

  std::map<std::pair<const ForumCorpus*, std::string>, BehavioralFeatures> cache;
  for (std::size_t r = 0; r < post_ids.size(); ++r) {
    auto ref = corpora.find_post(post_ids[r]);
    if (!ref.post) throw IntegrityError("feature matrix: unknown post '" + post_ids[r] + "'");
    auto tokens = content_tokens(ref.post->body, stop, tok);
    if (!tokens.empty()) {
      std::map<std::size_t, std::uint64_t> counts;
      for (const auto& t : tokens) {
        auto it = term_index.find(t);
        if (it != term_index.end()) ++counts[it->second];
      }
      const double len = static_cast<double>(tokens.size());
      for (auto [ti, c] : counts) {
        m.values(r, ti) = static_cast<double>(c) / len * vocab.idf[ti];
      }
    }
    if (mode != MatrixMode::kCombined) continue;
    if (ref.post->user_id == kAnonUserId) {
      m.flagged_rows.push_back(post_ids[r]);
      continue;
    }
    auto key = std::pair{ref.corpus, ref.post->user_id};
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache.emplace(key, behavioral_features(*ref.corpus, ref.post->user_id)).first;
    }
    auto vals = it->second.values();
    for (std::size_t k = 0; k < vals.size(); ++k) m.values(r, n_terms + k) = vals[k];
  }

  if (mode == MatrixMode::kCombined && m.rows() > 0) {
    std::set<std::string> flagged(m.flagged_rows.begin(), m.flagged_rows.end());
    for (std::size_t k = 0; k < BehavioralFeatures::kCount; ++k) {
      const std::size_t c = n_terms + k;
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t r = 0; r < m.rows(); ++r) {
        if (flagged.count(m.row_ids[r])) continue;
        lo = std::min(lo, m.values(r, c));
        hi = std::max(hi, m.values(r, c));
      }
      for (std::size_t r = 0; r < m.rows(); ++r) {
        if (flagged.count(m.row_ids[r])) continue;
        m.values(r, c) = hi > lo ? (m.values(r, c) - lo) / (hi - lo) : 0.0;
      }
    }
  }
  m.validate();
  return m;
}

/// Distinct post ids of `mentions`, in first-mention order.
inline std::vector<std::string> candidate_posts(const std::vector<IpMention>& mentions) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& m : mentions) {
    if (seen.insert(m.post_id).second) out.push_back(m.post_id);
  }
  return out;
}

inline FeatureMatrix build_matrix(const CorpusSet& corpora,
                                  const std::vector<IpMention>& mentions,
                                  const VocabularyModel& vocab, MatrixMode mode) {
  return build_matrix(corpora, candidate_posts(mentions), vocab, mode);
}

}  // namespace forumip
