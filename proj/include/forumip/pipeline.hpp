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

// File-based pipeline stages over a working directory.
//
// Each stage reads the artifacts of earlier stages, writes its own under
// `<workdir>/<stage>/`, and finishes with `<stage>/manifest.json` listing
// the SHA-256 of every input and output together with the configuration.
// Every artifact names the schema version and the configuration hash:
// JSON files in top-level fields, JSONL files in a leading header record,
// matrices and CSV files in a leading `#` line.
//
// Requires OpenSSL (libcrypto) for hashing.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "forumip/ablation.hpp"
#include "forumip/classify.hpp"
#include "forumip/cocluster.hpp"
#include "forumip/common.hpp"
#include "forumip/compare.hpp"
#include "forumip/corpus.hpp"
#include "forumip/features.hpp"
#include "forumip/geotime.hpp"
#include "forumip/ipextract.hpp"
#include "forumip/matrix.hpp"
#include "forumip/random.hpp"

namespace forumip {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw DataError("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

/// Independent stream seed for a named purpose (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) {
  std::uint64_t z = seed ^ detail::fnv1a(purpose);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct PipelineConfig {
  std::vector<std::string> corpora;
  std::string blacklist;
  std::string blacklist_name = "blacklist";
  std::optional<std::string> snapshot_date;
  std::string geo_db;
  std::size_t vocab_cap = 100;
  double sample_fraction = 0.5;
  std::size_t rank = 10;
  double lambda = 0.01;
  std::size_t smr_max_iter = 200;
  double smr_tol = 1e-6;
  ClassifierKind classifier = ClassifierKind::kLogisticRegression;
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  FeatureSet feature_set = FeatureSet::kCoClustered;
  bool include_private = false;
  bool require_prior_mention = true;
  double review_fraction = 0.1;
  Hyperparams hyper;
  /// Worker cap; does not affect results and is not part of the hash.
  std::size_t jobs = 1;

  nlohmann::json to_json() const {
    return {{"corpora", corpora},
            {"blacklist", blacklist},
            {"blacklist_name", blacklist_name},
            {"snapshot_date", snapshot_date ? nlohmann::json(*snapshot_date) : nlohmann::json()},
            {"geo_db", geo_db},
            {"vocab_cap", vocab_cap},
            {"sample_fraction", sample_fraction},
            {"rank", rank},
            {"lambda", lambda},
            {"smr_max_iter", smr_max_iter},
            {"smr_tol", smr_tol},
            {"classifier", to_string(classifier)},
            {"folds", folds},
            {"seed", seed},
            {"feature_set", to_string(feature_set)},
            {"include_private", include_private},
            {"require_prior_mention", require_prior_mention},
            {"review_fraction", review_fraction},
            {"knn_k", hyper.k},
            {"l2", hyper.l2},
            {"threshold", hyper.threshold}};
  }

  std::string hash() const { return sha256_hex(to_json().dump()).substr(0, 16); }

  void validate() const {
    if (vocab_cap == 0) throw UsageError("vocab cap must be positive");
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) {
      throw UsageError("sample fraction must be in (0, 1]");
    }
    if (rank == 0) throw UsageError("rank must be positive");
    if (!(lambda >= 0.0)) throw UsageError("lambda must be nonnegative");
    if (folds < 2) throw UsageError("folds must be at least 2");
    if (hyper.k == 0 || hyper.k % 2 == 0) throw UsageError("k must be odd");
    if (!(review_fraction > 0.0 && review_fraction <= 1.0)) {
      throw UsageError("review fraction must be in (0, 1]");
    }
  }
};

/// An upstream artifact is absent; names the stage that produces it.
class MissingArtifactError : public DataError {
 public:
  MissingArtifactError(const std::string& artifact, std::string_view stage)
      : DataError("missing artifact '" + artifact + "': run 'forumip " + std::string(stage) +
                  "' first") {}
};

// ---------------------------------------------------------------------------
// Instance selection

/// Posts with at least one in-scope mention, in first-mention order.
inline std::vector<std::string> in_scope_posts(const std::vector<LabeledPair>& pairs) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& p : pairs) {
    if (p.label == MentionLabel::kOutOfScope) continue;
    if (seen.insert(p.post_id).second) out.push_back(p.post_id);
  }
  return out;
}

struct InstanceSet {
  std::vector<std::string> post_ids;  ///< positives first, then sampled negatives
  std::vector<int> labels;
  std::size_t positive_pool = 0;
  std::size_t negative_pool = 0;
};

/// A post is positive when it mentions a malicious address and a negative
/// candidate when all of its in-scope mentions are unlisted. Posts whose
/// only listed mentions are late are left out. Negatives are sampled to
/// match the positives.
inline InstanceSet select_instances(const std::vector<LabeledPair>& pairs, std::uint64_t seed) {
  std::map<std::string, std::pair<bool, bool>> status;  // (any malicious, any late)
  for (const auto& p : pairs) {
    if (p.label == MentionLabel::kOutOfScope) continue;
    auto& s = status[p.post_id];
    s.first = s.first || p.label == MentionLabel::kMalicious;
    s.second = s.second || p.label == MentionLabel::kLateMention;
  }
  std::vector<std::string> pos, neg;
  for (const auto& id : in_scope_posts(pairs)) {
    const auto& s = status.at(id);
    if (s.first) {
      pos.push_back(id);
    } else if (!s.second) {
      neg.push_back(id);
    }
  }
  if (pos.empty()) throw EmptyInputError("instances: no post mentions a listed address");
  InstanceSet r;
  r.positive_pool = pos.size();
  r.negative_pool = neg.size();
  r.post_ids = balance_dataset(pos, neg, seed);
  r.labels.assign(pos.size(), kMalicious);
  r.labels.resize(r.post_ids.size(), kBenign);
  return r;
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    if (end > start) out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace detail

/// One prediction per in-scope (ip, post) pair, carrying the post's score.
struct PairPrediction {
  LabeledPair pair;
  int predicted = kBenign;
  double score = 0.0;
};

// ---------------------------------------------------------------------------
// Pipeline

class Pipeline {
 public:
  Pipeline(PipelineConfig cfg, std::filesystem::path workdir)
      : cfg_(std::move(cfg)), root_(std::move(workdir)), hash_(cfg_.hash()) {
    cfg_.validate();
  }

  const PipelineConfig& config() const { return cfg_; }
  const std::string& config_hash() const { return hash_; }
  const std::filesystem::path& workdir() const { return root_; }
  /// Warnings raised by stages run through this object.
  const std::vector<std::string>& warnings() const { return warnings_; }

  static const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> kStages = {
        "ingest",   "stats", "extract-ips", "label",   "featurize",  "cocluster", "train",
        "evaluate", "ablate", "apply",      "compare", "geo-report", "timeline",  "export-sample"};
    return kStages;
  }

  void run(std::string_view stage) {
    if (stage == "ingest") return ingest();
    if (stage == "stats") return stats();
    if (stage == "extract-ips") return extract_ips();
    if (stage == "label") return label();
    if (stage == "featurize") return featurize();
    if (stage == "cocluster") return cocluster();
    if (stage == "train") return train_stage();
    if (stage == "evaluate") return evaluate();
    if (stage == "ablate") return ablate();
    if (stage == "apply") return apply();
    if (stage == "compare") return compare();
    if (stage == "geo-report") return geo_report_stage();
    if (stage == "timeline") return timeline();
    if (stage == "export-sample") return export_sample();
    throw UsageError("unknown stage '" + std::string(stage) + "'");
  }

  /// Every stage in order; geo-report is skipped without a geo database.
  void run_all() {
    for (const auto& s : stage_names()) {
      if (s == "geo-report" && cfg_.geo_db.empty()) {
        warnings_.push_back("geo-report skipped: no geo database configured");
        continue;
      }
      run(s);
    }
  }

  void ingest() {
    Stage st(*this, "ingest");
    if (cfg_.corpora.empty()) throw UsageError("ingest: no corpus given (--corpus)");
    std::vector<ForumCorpus> corpora;
    for (const auto& path : cfg_.corpora) corpora.push_back(parse_corpus(st.read_external(path)));
    CorpusSet set(std::move(corpora));
    nlohmann::json list = nlohmann::json::array();
    for (const auto& c : set.corpora()) list.push_back(to_json(c));
    st.write_json("ingest/corpora.json", {{"corpora", list}});
  }

  void stats() {
    Stage st(*this, "stats");
    auto corpora = st.corpora();
    nlohmann::json forums = nlohmann::json::array();
    std::vector<StatsReport> reports;
    for (const auto& c : corpora.corpora()) {
      reports.push_back(corpus_stats(c));
      forums.push_back(to_json(reports.back()));
    }
    st.write_json("stats/stats.json", {{"forums", forums}});
    st.write_text("stats/stats.txt", st.comment_line() + render_stats_table(reports));
  }

  void extract_ips() {
    Stage st(*this, "extract-ips");
    auto corpora = st.corpora();
    std::vector<IpMention> all;
    nlohmann::json per_forum = nlohmann::json::object();
    for (const auto& c : corpora.corpora()) {
      auto ms = forumip::extract_ips(c);
      per_forum[c.forum_name()] = ip_summary(ms);
      all.insert(all.end(), ms.begin(), ms.end());
    }
    st.write_jsonl("ips/mentions.jsonl", "mentions", mentions_to_jsonl(all));
    st.write_json("ips/ip_stats.json", {{"all", ip_summary(all)}, {"per_forum", per_forum}});
  }

  void label() {
    Stage st(*this, "label");
    auto mentions = st.mentions();
    if (cfg_.blacklist.empty()) throw UsageError("label: no blacklist given (--blacklist)");
    std::optional<Date> snap;
    if (cfg_.snapshot_date) snap = parse_iso_date(*cfg_.snapshot_date);
    auto bl = parse_blacklist_csv(st.read_external(cfg_.blacklist), cfg_.blacklist_name, snap);
    LabelOptions opts;
    opts.require_prior_mention = cfg_.require_prior_mention;
    opts.exclude_non_public = !cfg_.include_private;
    auto pairs = label_mentions(mentions, bl, opts);
    std::string body;
    std::map<std::string, std::size_t> counts;
    for (const auto& p : pairs) {
      body += forumip::to_json(p).dump() + '\n';
      ++counts[std::string(to_string(p.label))];
    }
    st.write_jsonl("label/labels.jsonl", "labels", body);
    st.write_text("label/blacklist.csv", st.comment_line() + to_csv(bl));
    st.write_json("label/summary.json",
                  {{"pairs", pairs.size()},
                   {"by_label", counts},
                   {"blacklist_entries", bl.entries.size()},
                   {"snapshot_date", format_date(bl.snapshot_date)}});
  }

  void featurize() {
    Stage st(*this, "featurize");
    auto corpora = st.corpora();
    auto pairs = st.labels();
    auto inst = select_instances(pairs, derive_seed(cfg_.seed, "balance"));
    VocabularyOptions vo;
    vo.cap = cfg_.vocab_cap;
    vo.sample_fraction = cfg_.sample_fraction;
    vo.seed = derive_seed(cfg_.seed, "vocabulary");
    auto vocab =
        learn_vocabulary(corpora, inst.post_ids, inst.labels, vo, stopwords_for_corpora(corpora));
    auto candidates = in_scope_posts(pairs);
    auto words = build_matrix(corpora, candidates, vocab, MatrixMode::kWordsOnly);
    auto combined = build_matrix(corpora, candidates, vocab, MatrixMode::kCombined);
    if (!combined.flagged_rows.empty()) {
      st.warn(std::to_string(combined.flagged_rows.size()) +
              " candidate posts have no resolvable user; behavioral block zeroed");
    }
    st.write_json("features/instances.json", {{"post_ids", inst.post_ids},
                                              {"labels", inst.labels},
                                              {"positive_pool", inst.positive_pool},
                                              {"negative_pool", inst.negative_pool},
                                              {"candidates", candidates.size()}});
    auto vj = to_json(vocab);
    st.write_json("features/vocabulary.json", vj);
    st.write_matrix("features/words_frequency.tsv", words);
    st.write_matrix("features/combined.tsv", combined);
  }

  void cocluster() {
    Stage st(*this, "cocluster");
    auto combined = st.matrix("features/combined.tsv", "featurize");
    SmrOptions o;
    o.rank = cfg_.rank;
    o.lambda = cfg_.lambda;
    o.seed = derive_seed(cfg_.seed, "smr");
    o.max_iter = cfg_.smr_max_iter;
    o.tol = cfg_.smr_tol;
    auto model = fit_smr(combined, o);
    if (auto empty = model.empty_components(); !empty.empty()) {
      st.warn(std::to_string(empty.size()) + " of " + std::to_string(model.rank) +
              " co-clusters are empty");
    }
    if (!model.converged) st.warn("co-clustering stopped at the sweep limit");
    st.write_json("cocluster/model.json", to_json(model));
    st.write_matrix("cocluster/co_clustered.tsv",
                    latent_features(model, combined.row_ids, model.latent()));
  }

  void train_stage() {
    Stage st(*this, "train");
    auto [x, inst] = st.training_set(cfg_.feature_set);
    auto model = train(cfg_.classifier, x.values, inst.labels, x.column_names, cfg_.hyper);
    auto j = to_json(model);
    j["feature_set"] = to_string(cfg_.feature_set);
    j["instances"] = inst.post_ids.size();
    st.write_json("train/model.json", j);
  }

  void evaluate() {
    Stage st(*this, "evaluate");
    auto [x, inst] = st.training_set(cfg_.feature_set);
    auto rep = cross_validate(cfg_.classifier, x.values, inst.labels, cfg_.folds,
                              derive_seed(cfg_.seed, "folds"), cfg_.hyper, cfg_.jobs);
    auto j = to_json(rep);
    j["feature_set"] = to_string(cfg_.feature_set);
    st.write_json("evaluate/eval.json", j);
    st.write_text("evaluate/eval.txt",
                  st.comment_line() +
                      render_eval_table(rep, std::string(to_string(cfg_.classifier)) + " on " +
                                                 std::string(to_string(cfg_.feature_set))));
  }

  void ablate() {
    Stage st(*this, "ablate");
    std::vector<FeatureMatrix> mats;
    InstanceSet inst;
    for (auto fs : kAllFeatureSets) {
      auto [x, i] = st.training_set(fs);
      mats.push_back(std::move(x));
      inst = std::move(i);
    }
    std::vector<std::pair<std::string, const Matrix*>> sets;
    for (std::size_t k = 0; k < mats.size(); ++k) {
      sets.emplace_back(std::string(to_string(kAllFeatureSets[k])), &mats[k].values);
    }
    auto rep = ablate_feature_sets(sets, inst.labels, cfg_.classifier, cfg_.folds,
                                   derive_seed(cfg_.seed, "folds"), cfg_.hyper, cfg_.jobs);
    st.write_json("ablate/ablation.json", to_json(rep));
    st.write_text("ablate/ablation.txt", st.comment_line() + render_ablation_table(rep));
  }

  void apply() {
    Stage st(*this, "apply");
    auto mj = st.json("train/model.json", "train");
    auto model = classifier_from_json(mj);
    FeatureSet fs = parse_feature_set(mj.at("feature_set").get<std::string>());
    auto x = st.feature_set(fs);
    auto preds = predict(model, x);
    auto row = x.row_index();
    std::string body;
    std::set<std::string> mal_posts;
    std::set<Ipv4> mal_ips;
    std::size_t n_pairs = 0;
    for (const auto& p : st.labels()) {
      if (p.label == MentionLabel::kOutOfScope) continue;
      const auto& pr = preds.at(row.at(p.post_id));
      auto j = forumip::to_json(p);
      j["predicted"] = pr.label == kMalicious ? "malicious" : "benign";
      j["score"] = pr.score;
      body += j.dump() + '\n';
      ++n_pairs;
      if (pr.label == kMalicious) {
        mal_posts.insert(p.post_id);
        mal_ips.insert(p.ip);
      }
    }
    st.write_jsonl("apply/predictions.jsonl", "predictions", body);
    st.write_json("apply/summary.json", {{"feature_set", to_string(fs)},
                                         {"classifier", to_string(model.kind)},
                                         {"posts", x.rows()},
                                         {"pairs", n_pairs},
                                         {"predicted_malicious_posts", mal_posts.size()},
                                         {"predicted_malicious_ips", mal_ips.size()}});
  }

  void compare() {
    Stage st(*this, "compare");
    auto corpora = st.corpora();
    auto preds = st.predictions();
    auto bl = parse_blacklist_csv(st.read("label/blacklist.csv", "label"), cfg_.blacklist_name);
    std::set<Ipv4> in_scope, predicted;
    std::set<std::string> posts;
    for (const auto& p : preds) {
      in_scope.insert(p.pair.ip);
      if (p.predicted == kMalicious) {
        predicted.insert(p.pair.ip);
        posts.insert(p.pair.post_id);
      }
    }
    std::vector<IpMention> scoped;
    for (const auto& m : st.mentions()) {
      if (in_scope.count(m.ip)) scoped.push_back(m);
    }
    ComparisonReport r;
    r.n_total_ips = in_scope.size();
    for (auto ip : in_scope) r.n_blacklist_hits += bl.find(ip) != nullptr;
    r.exclusivity = exclusivity(predicted, bl);
    std::set<Ipv4> joint;
    for (auto ip : predicted) {
      if (bl.find(ip)) joint.insert(ip);
    }
    r.early = early_warning(joint, scoped, bl);
    r.contributors =
        contributing_users(std::vector<std::string>(posts.begin(), posts.end()), corpora);
    st.write_json("compare/comparison.json", to_json(r));
    st.write_text("compare/comparison.txt", st.comment_line() + render_comparison_table(r));
  }

  void geo_report_stage() {
    Stage st(*this, "geo-report");
    if (cfg_.geo_db.empty()) throw UsageError("geo-report: no geo database given (--geo-db)");
    auto db = parse_geo_csv(st.read_external(cfg_.geo_db));
    auto r = geo_report(st.predicted_mentions(), db);
    st.write_json("geo/geo.json", to_json(r));
    st.write_text("geo/geo.csv", st.comment_line() + geo_csv(r));
  }

  void timeline() {
    Stage st(*this, "timeline");
    auto ms = st.predicted_mentions();
    auto yearly = yearly_counts(ms);
    auto monthly = monthly_post_counts(ms);
    nlohmann::json y = nlohmann::json::object();
    for (const auto& [yr, n] : yearly) y[std::to_string(yr)] = n;
    st.write_json("timeline/timeline.json", {{"yearly_ips", y}, {"monthly_posts", monthly}});
    st.write_text("timeline/monthly.csv", st.comment_line() + monthly_csv(monthly));
  }

  /// A seeded share of predicted-malicious pairs with their context, for
  /// manual review. The verdict column is left for the reviewer.
  void export_sample() {
    Stage st(*this, "export-sample");
    std::map<std::pair<Ipv4, std::string>, std::string> context;
    for (const auto& m : st.mentions()) context.emplace(std::pair{m.ip, m.post_id}, m.context_window);
    std::vector<PairPrediction> mal;
    for (auto& p : st.predictions()) {
      if (p.predicted == kMalicious) mal.push_back(std::move(p));
    }
    std::string out = st.comment_line() + "ip,post,forum,timestamp,score,context,verdict\n";
    if (!mal.empty()) {
      auto n = static_cast<std::size_t>(
          std::ceil(cfg_.review_fraction * static_cast<double>(mal.size())));
      Rng rng(derive_seed(cfg_.seed, "review"));
      auto idx = sample_without_replacement(mal.size(), std::min(n, mal.size()), rng);
      std::sort(idx.begin(), idx.end());
      char score[32];
      for (auto i : idx) {
        const auto& p = mal[i];
        std::snprintf(score, sizeof score, "%.4f", p.score);
        out += p.pair.ip.to_string() + "," + detail::csv_field(p.pair.post_id) + "," +
               detail::csv_field(p.pair.forum) + "," + format_datetime(p.pair.timestamp) + "," +
               score + "," + detail::csv_field(context[{p.pair.ip, p.pair.post_id}]) + ",\n";
      }
    } else {
      st.warn("no predicted-malicious pairs to sample");
    }
    st.write_text("sample/review.csv", out);
  }

 private:
  static nlohmann::json ip_summary(const std::vector<IpMention>& ms) {
    std::set<Ipv4> unique;
    std::map<std::string, std::size_t> scopes;
    for (const auto& m : ms) {
      if (unique.insert(m.ip).second) ++scopes[std::string(to_string(classify_ip_scope(m.ip)))];
    }
    nlohmann::json j = {{"mentions", ms.size()}, {"unique_ips", unique.size()}, {"scopes", scopes}};
    if (!ms.empty()) j["ips_per_post"] = to_json(ip_per_post_stats(ms));
    return j;
  }

  /// Per-stage I/O bookkeeping; the manifest is written when the stage
  /// completes without throwing.
  class Stage {
   public:
    Stage(Pipeline& p, std::string name) : p_(p), name_(std::move(name)) {}
    Stage(const Stage&) = delete;
    Stage& operator=(const Stage&) = delete;

    ~Stage() noexcept(false) {
      if (std::uncaught_exceptions() > 0) return;
      nlohmann::json ins = nlohmann::json::array(), outs = nlohmann::json::array();
      for (const auto& [path, sha] : inputs_) ins.push_back({{"path", path}, {"sha256", sha}});
      for (const auto& [path, sha] : outputs_) outs.push_back({{"path", path}, {"sha256", sha}});
      nlohmann::json m = {{"schema_version", kSchemaVersion},
                          {"stage", name_},
                          {"tool_version", kToolVersion},
                          {"config_hash", p_.hash_},
                          {"config", p_.cfg_.to_json()},
                          {"seed", p_.cfg_.seed},
                          {"inputs", ins},
                          {"outputs", outs},
                          {"warnings", warnings_}};
      raw_write(stage_dir() + "/manifest.json", m.dump(2) + "\n");
    }

    void warn(std::string w) {
      p_.warnings_.push_back(name_ + ": " + w);
      warnings_.push_back(std::move(w));
    }

    std::string comment_line() const {
      return "# forumip schema_version=" + std::to_string(kSchemaVersion) +
             " config_hash=" + p_.hash_ + "\n";
    }

    std::string read_external(const std::string& path) {
      std::filesystem::path fp(path);
      if (fp.is_relative()) fp = p_.root_ / fp;
      if (!std::filesystem::exists(fp)) throw DataError("input file '" + path + "' not found");
      std::string text = read_file(fp.string());
      inputs_.emplace_back(path, sha256_hex(text));
      return text;
    }

    std::string read(const std::string& rel, std::string_view producer) {
      auto fp = p_.root_ / rel;
      if (!std::filesystem::exists(fp)) throw MissingArtifactError(rel, producer);
      std::string text = read_file(fp.string());
      inputs_.emplace_back(rel, sha256_hex(text));
      return text;
    }

    nlohmann::json json(const std::string& rel, std::string_view producer) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read(rel, producer));
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(rel + ": " + e.what(), 0);
      }
      check_version(j, rel, producer);
      return j;
    }

    /// Records after the header line.
    std::vector<nlohmann::json> jsonl(const std::string& rel, std::string_view producer) {
      auto text = read(rel, producer);
      auto lines = detail::split_lines(text);
      std::vector<nlohmann::json> out;
      for (std::size_t i = 0; i < lines.size(); ++i) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::parse_error& e) {
          throw ParseError(rel + ": " + e.what(), i + 1);
        }
        if (i == 0) {
          check_version(j, rel, producer);
        } else {
          out.push_back(std::move(j));
        }
      }
      if (lines.empty()) throw SchemaError(rel + ": missing header record");
      return out;
    }

    FeatureMatrix matrix(const std::string& rel, std::string_view producer) {
      try {
        return from_triplets(read(rel, producer));
      } catch (const SchemaError& e) {
        throw SchemaError(rel + ": " + e.what() + "; re-run 'forumip " + std::string(producer) +
                          "' to regenerate it");
      }
    }

    CorpusSet corpora() {
      auto j = json("ingest/corpora.json", "ingest");
      std::vector<ForumCorpus> out;
      for (const auto& c : j.at("corpora")) out.push_back(corpus_from_json(c));
      return CorpusSet(std::move(out));
    }

    std::vector<IpMention> mentions() {
      std::vector<IpMention> out;
      for (const auto& j : jsonl("ips/mentions.jsonl", "extract-ips")) {
        out.push_back(mention_from_json(j));
      }
      return out;
    }

    std::vector<LabeledPair> labels() {
      std::vector<LabeledPair> out;
      for (const auto& j : jsonl("label/labels.jsonl", "label")) {
        out.push_back(labeled_pair_from_json(j));
      }
      return out;
    }

    std::vector<PairPrediction> predictions() {
      std::vector<PairPrediction> out;
      for (const auto& j : jsonl("apply/predictions.jsonl", "apply")) {
        out.push_back({labeled_pair_from_json(j),
                       j.at("predicted").get<std::string>() == "malicious" ? kMalicious : kBenign,
                       j.at("score").get<double>()});
      }
      return out;
    }

    /// Mentions whose (ip, post) pair was predicted malicious.
    std::vector<IpMention> predicted_mentions() {
      std::set<std::pair<Ipv4, std::string>> keep;
      for (const auto& p : predictions()) {
        if (p.predicted == kMalicious) keep.insert({p.pair.ip, p.pair.post_id});
      }
      std::vector<IpMention> out;
      for (auto& m : mentions()) {
        if (keep.count({m.ip, m.post_id})) out.push_back(std::move(m));
      }
      return out;
    }

    /// All candidate rows of a feature set.
    FeatureMatrix feature_set(FeatureSet fs) {
      switch (fs) {
        case FeatureSet::kWordsFrequency:
          return matrix("features/words_frequency.tsv", "featurize");
        case FeatureSet::kCombined:
          return matrix("features/combined.tsv", "featurize");
        case FeatureSet::kCoClustered:
          return matrix("cocluster/co_clustered.tsv", "cocluster");
        case FeatureSet::kCoClusteredConcat:
          return concat_features(matrix("features/combined.tsv", "featurize"),
                                 matrix("cocluster/co_clustered.tsv", "cocluster"));
      }
      throw UsageError("unknown feature set");
    }

    std::pair<FeatureMatrix, InstanceSet> training_set(FeatureSet fs) {
      auto j = json("features/instances.json", "featurize");
      InstanceSet inst;
      inst.post_ids = j.at("post_ids").get<std::vector<std::string>>();
      inst.labels = j.at("labels").get<std::vector<int>>();
      inst.positive_pool = j.at("positive_pool").get<std::size_t>();
      inst.negative_pool = j.at("negative_pool").get<std::size_t>();
      return {subset_rows(feature_set(fs), inst.post_ids), std::move(inst)};
    }

    void write_text(const std::string& rel, const std::string& content) {
      raw_write(rel, content);
      outputs_.emplace_back(rel, sha256_hex(content));
    }

    void write_json(const std::string& rel, nlohmann::json j) {
      j["schema_version"] = kSchemaVersion;
      j["config_hash"] = p_.hash_;
      write_text(rel, j.dump(2) + "\n");
    }

    void write_jsonl(const std::string& rel, std::string_view kind, const std::string& records) {
      nlohmann::json h = {{"schema_version", kSchemaVersion},
                          {"config_hash", p_.hash_},
                          {"kind", kind}};
      write_text(rel, h.dump() + "\n" + records);
    }

    void write_matrix(const std::string& rel, const FeatureMatrix& m) {
      std::string t = to_triplets(m);
      auto nl = t.find('\n');
      t.insert(nl + 1, "#config_hash\t" + p_.hash_ + "\n");
      write_text(rel, t);
    }

   private:
    std::string stage_dir() const {
      static const std::map<std::string, std::string> kDir = {
          {"extract-ips", "ips"},
          {"featurize", "features"},
          {"geo-report", "geo"},
          {"export-sample", "sample"}};
      auto it = kDir.find(name_);
      return it == kDir.end() ? name_ : it->second;
    }

    void raw_write(const std::string& rel, const std::string& content) {
      auto fp = p_.root_ / rel;
      std::filesystem::create_directories(fp.parent_path());
      write_file(fp.string(), content);
    }

    static void check_version(const nlohmann::json& j, const std::string& rel,
                              std::string_view producer) {
      int v = j.is_object() ? j.value("schema_version", 0) : 0;
      if (v != kSchemaVersion) {
        throw SchemaError(rel + " has schema_version " + std::to_string(v) +
                          " but this build reads " + std::to_string(kSchemaVersion) +
                          "; re-run 'forumip " + std::string(producer) + "' to migrate it");
      }
    }

    Pipeline& p_;
    std::string name_;
    std::vector<std::pair<std::string, std::string>> inputs_, outputs_;
    std::vector<std::string> warnings_;
  };

  PipelineConfig cfg_;
  std::filesystem::path root_;
  std::string hash_;
  std::vector<std::string> warnings_;
};

}  // namespace forumip
