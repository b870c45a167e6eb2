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

// Assembly of the candidate feature sets for a labeled instance list and
// the side-by-side cross-validation that compares them.
//
//   words_frequency      tf-idf of the selected terms
//   combined             words_frequency + min-max scaled behavioral block
//   co_clustered         latent co-cluster memberships of the combined rows
//   co_clustered_concat  combined + co_clustered

#pragma once

#include <cstdio>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "forumip/classify.hpp"
#include "forumip/cocluster.hpp"
#include "forumip/corpus.hpp"
#include "forumip/features.hpp"
#include "forumip/text.hpp"

namespace forumip {

enum class FeatureSet { kWordsFrequency, kCombined, kCoClustered, kCoClusteredConcat };

inline constexpr FeatureSet kAllFeatureSets[] = {FeatureSet::kWordsFrequency, FeatureSet::kCombined,
                                                 FeatureSet::kCoClustered,
                                                 FeatureSet::kCoClusteredConcat};

inline std::string_view to_string(FeatureSet s) {
  switch (s) {
    case FeatureSet::kWordsFrequency: return "words_frequency";
    case FeatureSet::kCombined: return "combined";
    case FeatureSet::kCoClustered: return "co_clustered";
    case FeatureSet::kCoClusteredConcat: return "co_clustered_concat";
  }
  return "co_clustered";
}

inline FeatureSet parse_feature_set(std::string_view s) {
  for (auto f : kAllFeatureSets) {
    if (to_string(f) == s) return f;
  }
  throw UsageError("unknown feature set '" + std::string(s) + "'");
}

/// Union of the bundled stop-word lists for every corpus language.
inline StopWords stopwords_for_corpora(const CorpusSet& corpora) {
  StopWords out;
  for (const auto& c : corpora.corpora()) {
    const auto& s = stopwords_for(c.language_tag());
    out.insert(s.begin(), s.end());
  }
  return out;
}

inline std::string languages_of(const CorpusSet& corpora) {
  std::set<std::string> langs;
  for (const auto& c : corpora.corpora()) langs.insert(c.language_tag());
  std::string out;
  for (const auto& l : langs) out += (out.empty() ? "" : "+") + l;
  return out;
}

/// Vocabulary over the bodies of `post_ids`, labelled by `y`.
inline VocabularyModel learn_vocabulary(const CorpusSet& corpora,
                                        const std::vector<std::string>& post_ids,
                                        const std::vector<int>& y, const VocabularyOptions& opts,
                                        const StopWords& stop, const TokenizerOptions& tok = {}) {
  if (post_ids.size() != y.size()) throw PreconditionError("vocabulary: ids and labels differ");
  std::vector<std::vector<std::string>> docs;
  std::vector<bool> malicious;
  docs.reserve(post_ids.size());
  for (std::size_t i = 0; i < post_ids.size(); ++i) {
    auto ref = corpora.find_post(post_ids[i]);
    if (!ref.post) throw IntegrityError("vocabulary: unknown post '" + post_ids[i] + "'");
    docs.push_back(content_tokens(ref.post->body, stop, tok));
    malicious.push_back(y[i] == kMalicious);
  }
  return select_terms_by_information_gain(docs, malicious, opts, languages_of(corpora), stop);
}

struct FeatureSets {
  FeatureMatrix words_frequency;
  FeatureMatrix combined;
  FeatureMatrix co_clustered;
  FeatureMatrix co_clustered_concat;
  CoClusterModel smr;

  const FeatureMatrix& get(FeatureSet s) const {
    switch (s) {
      case FeatureSet::kWordsFrequency: return words_frequency;
      case FeatureSet::kCombined: return combined;
      case FeatureSet::kCoClustered: return co_clustered;
      case FeatureSet::kCoClusteredConcat: return co_clustered_concat;
    }
    return co_clustered;
  }
};

inline FeatureMatrix concat_features(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.row_ids != b.row_ids) throw PreconditionError("concat: row ids differ");
  FeatureMatrix out;
  out.row_ids = a.row_ids;
  out.column_names = a.column_names;
  out.column_names.insert(out.column_names.end(), b.column_names.begin(), b.column_names.end());
  out.values = a.values.hconcat(b.values);
  out.flagged_rows = a.flagged_rows;
  out.validate();
  return out;
}

/// Co-clustered features from an already fitted model: its memberships for
/// the rows it was fitted on.
inline FeatureSets feature_sets_from(FeatureMatrix words, FeatureMatrix combined,
                                     CoClusterModel smr) {
  FeatureSets fs;
  fs.co_clustered = latent_features(smr, combined.row_ids, smr.latent());
  fs.co_clustered_concat = concat_features(combined, fs.co_clustered);
  fs.words_frequency = std::move(words);
  fs.combined = std::move(combined);
  fs.smr = std::move(smr);
  return fs;
}

/// The SMR model is fitted on the combined rows of `post_ids`; no labels are
/// involved in that step.
inline FeatureSets build_feature_sets(const CorpusSet& corpora,
                                      const std::vector<std::string>& post_ids,
                                      const VocabularyModel& vocab, const SmrOptions& smr,
                                      const TokenizerOptions& tok = {}) {
  auto words = build_matrix(corpora, post_ids, vocab, MatrixMode::kWordsOnly, tok);
  auto combined = build_matrix(corpora, post_ids, vocab, MatrixMode::kCombined, tok);
  auto model = fit_smr(combined, smr);
  return feature_sets_from(std::move(words), std::move(combined), std::move(model));
}

struct AblationEntry {
  std::string name;
  std::size_t columns = 0;
  EvalReport report;
};

struct AblationReport {
  ClassifierKind kind = ClassifierKind::kLogisticRegression;
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  std::vector<AblationEntry> entries;

  const AblationEntry* find(std::string_view name) const {
    for (const auto& e : entries) {
      if (e.name == name) return &e;
    }
    return nullptr;
  }
};

/// Cross-validates every named matrix with the same classifier, folds and
/// seed. All matrices must have one row per label, in the same order.
inline AblationReport ablate_feature_sets(
    const std::vector<std::pair<std::string, const Matrix*>>& sets, const std::vector<int>& y,
    ClassifierKind kind, std::size_t folds, std::uint64_t seed, const Hyperparams& hp = {},
    std::size_t jobs = 1) {
  AblationReport r;
  r.kind = kind;
  r.folds = folds;
  r.seed = seed;
  auto fold_of = stratified_folds(y, folds, seed);
  for (const auto& [name, m] : sets) {
    if (m->rows() != y.size()) {
      throw PreconditionError("ablation: feature set '" + name + "' has " +
                              std::to_string(m->rows()) + " rows for " +
                              std::to_string(y.size()) + " labels");
    }
    r.entries.push_back(
        {name, m->cols(), cross_validate(kind, *m, y, folds, seed, hp, jobs, &fold_of)});
  }
  return r;
}

inline AblationReport ablate_feature_sets(const FeatureSets& fs, const std::vector<int>& y,
                                          ClassifierKind kind, std::size_t folds,
                                          std::uint64_t seed, const Hyperparams& hp = {},
                                          std::size_t jobs = 1) {
  std::vector<std::pair<std::string, const Matrix*>> sets;
  for (auto s : kAllFeatureSets) sets.emplace_back(std::string(to_string(s)), &fs.get(s).values);
  return ablate_feature_sets(sets, y, kind, folds, seed, hp, jobs);
}

inline nlohmann::json to_json(const AblationReport& r) {
  nlohmann::json sets = nlohmann::json::array();
  for (const auto& e : r.entries) {
    sets.push_back({{"feature_set", e.name},
                    {"columns", e.columns},
                    {"accuracy", e.report.pooled.accuracy},
                    {"metrics", to_json(e.report.pooled)}});
  }
  return {{"classifier", to_string(r.kind)}, {"folds", r.folds}, {"seed", r.seed}, {"sets", sets}};
}

inline std::string render_ablation_table(const AblationReport& r) {
  char buf[160];
  std::string out = "Feature-set comparison (" + std::string(to_string(r.kind)) + ", " +
                    std::to_string(r.folds) + "-fold)\n";
  std::snprintf(buf, sizeof buf, "%-22s %8s %9s %10s %8s %8s\n", "Feature set", "Columns",
                "Accuracy", "Precision", "Recall", "ROC");
  out += buf;
  for (const auto& e : r.entries) {
    const auto& m = e.report.pooled;
    std::snprintf(buf, sizeof buf, "%-22s %8zu %9.3f %10.3f %8.3f %8.3f\n", e.name.c_str(),
                  e.columns, m.accuracy, m.precision, m.recall, m.roc_area);
    out += buf;
  }
  return out;
}

}  // namespace forumip
