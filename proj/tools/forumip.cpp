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

// forumip command-line driver.
//
// Exit codes: 0 success, 2 usage error, 3 data or integrity error,
// 4 numerical failure.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "forumip/harvest.hpp"
#include "forumip/pipeline.hpp"

namespace {

struct Flags {
  forumip::PipelineConfig cfg;
  std::string workdir = ".";
  std::string classifier = "logistic_regression";
  std::string feature_set = "co_clustered";
  bool concat_raw = false;
  bool allow_late = false;
  std::string snapshot;
  // harvest
  std::string site_config;
  std::string pages;
  std::string harvest_out = "harvest/corpus.json";
};

void add_pipeline_options(CLI::App& app, Flags& f) {
  auto& c = f.cfg;
  app.add_option("--workdir,-w", f.workdir, "Directory holding all stage artifacts")
      ->capture_default_str();
  app.add_option("--corpus", c.corpora, "Corpus JSON file (repeatable)");
  app.add_option("--blacklist", c.blacklist, "Blacklist CSV (ip,first_reported_date)");
  app.add_option("--blacklist-name", c.blacklist_name, "Label for the blacklist in reports")
      ->capture_default_str();
  app.add_option("--snapshot-date", f.snapshot, "Blacklist snapshot date (YYYY-MM-DD)");
  app.add_option("--geo-db", c.geo_db, "Geolocation range CSV");
  app.add_option("--vocab-cap", c.vocab_cap, "Number of keywords kept")->capture_default_str();
  app.add_option("--sample-fraction", c.sample_fraction,
                 "Share of instances used to score keywords")
      ->capture_default_str();
  app.add_option("--rank", c.rank, "Number of co-clusters")->capture_default_str();
  app.add_option("--lambda", c.lambda, "Sparsity weight of the co-clustering")
      ->capture_default_str();
  app.add_option("--max-sweeps", c.smr_max_iter, "Co-clustering sweep limit")
      ->capture_default_str();
  app.add_option("--classifier", f.classifier, "logistic_regression | naive_bayes | knn")
      ->capture_default_str();
  app.add_option("--folds", c.folds, "Cross-validation folds")->capture_default_str();
  app.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app.add_option("--feature-set", f.feature_set,
                 "words_frequency | combined | co_clustered | co_clustered_concat")
      ->capture_default_str();
  app.add_flag("--concat-raw", f.concat_raw,
               "Train on co-cluster memberships concatenated with the combined features");
  app.add_flag("--include-private", c.include_private,
               "Keep private, loopback and reserved addresses");
  app.add_flag("--allow-late-mentions", f.allow_late,
               "Label listed addresses malicious even when first mentioned after listing");
  app.add_option("--review-fraction", c.review_fraction, "Share exported by export-sample")
      ->capture_default_str();
  app.add_option("--k", c.hyper.k, "Neighbours for knn (odd)")->capture_default_str();
  app.add_option("--l2", c.hyper.l2, "Logistic regression weight penalty")->capture_default_str();
  app.add_option("--threshold", c.hyper.threshold, "Decision threshold on P(malicious)")
      ->capture_default_str();
  app.add_option("--jobs,-j", c.jobs, "Worker threads")->capture_default_str();
}

forumip::PipelineConfig finish_config(Flags& f) {
  auto c = f.cfg;
  c.classifier = forumip::parse_classifier_kind(f.classifier);
  c.feature_set = f.concat_raw ? forumip::FeatureSet::kCoClusteredConcat
                               : forumip::parse_feature_set(f.feature_set);
  c.require_prior_mention = !f.allow_late;
  if (!f.snapshot.empty()) {
    forumip::parse_iso_date(f.snapshot);
    c.snapshot_date = f.snapshot;
  }
  return c;
}

void print_stage_summary(const std::filesystem::path& root, const std::string& stage) {
  auto show = [&](const char* rel) {
    auto p = root / rel;
    if (!std::filesystem::exists(p)) return;
    std::string text = forumip::read_file(p.string());
    if (text.rfind("# forumip", 0) == 0) text.erase(0, text.find('\n') + 1);
    std::cout << text;
  };
  if (stage == "stats") show("stats/stats.txt");
  if (stage == "evaluate") show("evaluate/eval.txt");
  if (stage == "ablate") show("ablate/ablation.txt");
  if (stage == "compare") show("compare/comparison.txt");
}

int run_harvest(Flags& f) {
  auto cfg = forumip::load_harvest_config(f.site_config);
  auto result = forumip::harvest_directory(f.pages, cfg);
  for (const auto& w : result.warnings) std::cerr << "forumip: warning: " << w << "\n";
  for (const auto& e : result.errors) {
    std::cerr << "forumip: skipped " << e.source << " post #" << e.ordinal << ": " << e.message
              << "\n";
  }
  std::filesystem::path out(f.harvest_out);
  if (out.is_relative()) out = std::filesystem::path(f.workdir) / out;
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  forumip::write_file(out.string(), forumip::to_json(result.corpus).dump(2) + "\n");
  std::cout << "harvested " << result.corpus.posts().size() << " posts in "
            << result.corpus.thread_count() << " threads from " << result.pages << " pages ("
            << result.errors.size() << " skipped) into " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forumip: infer malicious IP addresses from security-forum discussions"};
  app.set_config("--config", "", "Key-value configuration file (option = value)");
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  add_pipeline_options(app, f);

  auto* harvest = app.add_subcommand("harvest", "Convert saved forum pages into a corpus");
  harvest->add_option("--site-config", f.site_config, "Forum selector configuration (INI)")
      ->required();
  harvest->add_option("--pages", f.pages, "Directory of .html pages")->required();
  harvest->add_option("--out", f.harvest_out, "Output corpus JSON")->capture_default_str();

  const std::vector<std::pair<std::string, std::string>> stages = {
      {"ingest", "Validate corpora and store them in the workdir"},
      {"stats", "Posts, threads and activity statistics per forum"},
      {"extract-ips", "Find IPv4 mentions in every post"},
      {"label", "Label mentions against a blacklist snapshot"},
      {"featurize", "Select keywords and build the feature matrices"},
      {"cocluster", "Fit the sparse co-clustering of the combined matrix"},
      {"train", "Train the classifier on the balanced instances"},
      {"evaluate", "Cross-validate the classifier"},
      {"ablate", "Cross-validate every feature set side by side"},
      {"apply", "Score every in-scope mention with the trained model"},
      {"compare", "Compare predictions with the blacklist"},
      {"geo-report", "Continent shares of predicted-malicious addresses"},
      {"timeline", "Yearly and monthly counts of predicted-malicious addresses"},
      {"export-sample", "Export a sample of predictions for manual review"},
  };
  for (const auto& [name, help] : stages) app.add_subcommand(name, help);
  app.add_subcommand("run", "Run every stage in order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(forumip::ExitCode::kUsage);
  }

  try {
    if (harvest->parsed()) return run_harvest(f);
    auto cfg = finish_config(f);
    std::filesystem::create_directories(f.workdir);
    forumip::Pipeline pipeline(cfg, f.workdir);
    std::string stage = app.get_subcommands().front()->get_name();
    if (stage == "run") {
      pipeline.run_all();
    } else {
      pipeline.run(stage);
    }
    for (const auto& w : pipeline.warnings()) std::cerr << "forumip: warning: " << w << "\n";
    if (stage == "run") {
      for (const auto& s : {"evaluate", "ablate", "compare"}) print_stage_summary(f.workdir, s);
    } else {
      print_stage_summary(f.workdir, stage);
    }
    return 0;
  } catch (const forumip::Error& e) {
    std::cerr << "forumip: error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "forumip: error: " << e.what() << "\n";
    return static_cast<int>(forumip::ExitCode::kData);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "forumip: error: malformed artifact: " << e.what() << "\n";
    return static_cast<int>(forumip::ExitCode::kData);
  }
}
