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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "forumip/features.hpp"
#include "forumip/text.hpp"
#include "oracles.hpp"

namespace forumip {
namespace {

using fixtures::PostSpec;

TEST(Text, TokenizeFoldsCaseAndDropsNumbers) {
  EXPECT_EQ(tokenize("Hello, WORLD! 2014 1.2.3.4 abc123"),
            (std::vector<std::string>{"hello", "world", "abc123"}));
  TokenizerOptions keep;
  keep.keep_numeric = true;
  auto t = tokenize("year 2014", keep);
  EXPECT_EQ(t, (std::vector<std::string>{"year", "2014"}));
  EXPECT_EQ(tokenize("\xD8\xB3\xD9\x84\xD8\xA7\xD9\x85 \xD8\xAF\xD9\x86\xDB\x8C\xD8\xA7").size(), 2u);
  EXPECT_EQ(char_length("\xD8\xB3\xD9\x84\xD8\xA7\xD9\x85"), 4u);
}

TEST(Text, StopwordsRemoved) {
  const auto& en = stopwords_for("en");
  EXPECT_TRUE(en.count("the"));
  EXPECT_FALSE(stopwords_for("fa").empty());
  EXPECT_TRUE(stopwords_for("xx").empty());
  EXPECT_EQ(content_tokens("The virus and the scan", en),
            (std::vector<std::string>{"virus", "scan"}));
  EXPECT_TRUE(content_tokens("the and of", en).empty());
}

// ---------------------------------------------------------------------------

std::vector<std::uint64_t> counts(std::initializer_list<std::uint64_t> c) { return c; }

TEST(Entropy, SpecialCases) {
  EXPECT_EQ(shannon_entropy_bits(counts({8})), 0.0);
  EXPECT_EQ(shannon_entropy_bits(counts({2, 2, 2, 2})), 2.0);
  EXPECT_NEAR(shannon_entropy_bits(counts({3, 1})), 0.8112781244591328, 1e-12);
  EXPECT_EQ(shannon_entropy_bits(counts({})), 0.0);
  EXPECT_EQ(shannon_entropy_bits(counts({0, 5, 0})), 0.0);
}

TEST(Entropy, MatchesOracleOnRandomHistories) {
  std::mt19937_64 gen(17);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::uint64_t> c(1 + gen() % 12);
    for (auto& x : c) x = gen() % 30;
    EXPECT_NEAR(shannon_entropy_bits(c), oracle::entropy_bits(c), 1e-12);
  }
}

TEST(Behavioral, ThreadEntropyFromPosts) {
  std::vector<PostSpec> one, four, split;
  for (int i = 0; i < 8; ++i) {
    std::string id = std::to_string(i), day = "2012-01-0" + std::to_string(1 + i);
    one.push_back({"a" + id, "t", "u", day, "x"});
    four.push_back({"b" + id, "t" + std::to_string(i % 4), "u", day, "x"});
  }
  for (int i = 0; i < 4; ++i) {
    split.push_back({"c" + std::to_string(i), i < 3 ? "t0" : "t1", "u", "2012-01-01", "x"});
  }
  EXPECT_EQ(behavioral_features(fixtures::corpus(one), "u").avg_thread_entropy, 0.0);
  EXPECT_EQ(behavioral_features(fixtures::corpus(four), "u").avg_thread_entropy, 2.0);
  auto f = behavioral_features(fixtures::corpus(split), "u");
  EXPECT_NEAR(f.avg_thread_entropy, 0.8112781244591328, 1e-12);
  EXPECT_EQ(f.avg_day_entropy, 0.0);
  EXPECT_EQ(behavioral_features(fixtures::corpus(one), "u").avg_day_entropy, 3.0);
}

TEST(Behavioral, CountsAndLengths) {
  auto c = fixtures::corpus({{"p1", "t1", "u", "2012-01-10T05:00:00Z", "abcd"},
                             {"p2", "t1", "v", "2012-01-11T05:00:00Z", "reply"},
                             {"p3", "t2", "u", "2012-01-20T05:00:00Z", "\xD8\xB3\xD9\x84"},
                             {"p4", "t1", "u", "2012-01-20T09:00:00Z", "abcdefgh"}},
                            {"silent"});
  auto f = behavioral_features(c, "u");
  EXPECT_EQ(f.n_posts, 3.0);
  EXPECT_EQ(f.n_threads, 2.0);
  EXPECT_EQ(f.n_threads_initiated, 2.0);
  EXPECT_EQ(f.n_active_days, 2.0);
  EXPECT_EQ(f.active_lifetime_days, 10.0);
  EXPECT_EQ(f.wait_time_days, static_cast<double>(days_between(fixtures::day("2010-01-01"),
                                                               fixtures::day("2012-01-10"))));
  EXPECT_DOUBLE_EQ(f.avg_post_len, 14.0 / 3.0);
  EXPECT_EQ(f.median_post_len, 4.0);
  EXPECT_EQ(f.max_post_len, 8.0);
  EXPECT_TRUE(behavioral_features(c, "silent").zero_posts);
  EXPECT_THROW(behavioral_features(c, "nobody"), PreconditionError);
}

// ---------------------------------------------------------------------------

TEST(Tfidf, UbiquitousTermWeighsZero) {
  auto r = tfidf_weights({{"a", "b"}, {"a"}, {"a", "c", "c"}});
  ASSERT_EQ(r.terms, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(r.idf[0], 0.0);
  for (const auto& doc : r.weights) {
    EXPECT_EQ(doc.front().first, 0u);
    EXPECT_EQ(doc.front().second, 0.0);
  }
}

TEST(Tfidf, HandComputedWeight) {
  auto r = tfidf_weights({{"virus", "virus", "scan", "now"}, {"scan"}});
  ASSERT_EQ(r.terms, (std::vector<std::string>{"now", "scan", "virus"}));
  ASSERT_EQ(r.weights[0].size(), 3u);
  EXPECT_DOUBLE_EQ(r.weights[0][2].second, 0.5 * std::log(2.0));
  EXPECT_DOUBLE_EQ(r.weights[0][0].second, 0.25 * std::log(2.0));
  EXPECT_EQ(r.weights[0][1].second, 0.0);
}

TEST(Tfidf, StopwordOnlyDocumentIsZeroVector) {
  auto doc = content_tokens("the of and", english_stopwords());
  auto r = tfidf_weights({doc, {"virus"}});
  EXPECT_TRUE(r.weights[0].empty());
  EXPECT_THROW(tfidf_weights({}), EmptyInputError);
}

// ---------------------------------------------------------------------------

TEST(InformationGain, IndependentTermScoresZero) {
  EXPECT_EQ(information_gain(2, 2, 3, 3), 0.0);
  EXPECT_EQ(information_gain(1, 3, 2, 6), 0.0);
  EXPECT_EQ(information_gain(0, 0, 5, 7), 0.0);
}

TEST(InformationGain, PerfectPredictorScoresLabelEntropy) {
  EXPECT_EQ(information_gain(4, 0, 0, 4), 1.0);
  EXPECT_EQ(information_gain(0, 6, 2, 0), binary_entropy_bits(2, 6));
}

TEST(InformationGain, MatchesMutualInformationOracle) {
  std::mt19937_64 gen(23);
  for (int t = 0; t < 300; ++t) {
    std::uint64_t c[4];
    for (auto& x : c) x = gen() % 20;
    EXPECT_NEAR(information_gain(c[0], c[1], c[2], c[3]),
                oracle::mutual_information(c[0], c[1], c[2], c[3]), 1e-10);
  }
}

TEST(Vocabulary, SixDocumentFixture) {
  std::vector<std::vector<std::string>> docs = {
      {"virus", "hosts", "redirect"}, {"virus", "hijack"}, {"virus", "hosts"},
      {"printer", "driver"},          {"printer", "hosts"}, {"driver", "update"}};
  std::vector<bool> y = {true, true, true, false, false, false};
  VocabularyOptions o;
  o.sample_fraction = 1.0;
  auto v = select_terms_by_information_gain(docs, y, o, "en");
  ASSERT_EQ(v.terms.size(), 7u);
  EXPECT_EQ(v.terms[0], "virus");
  EXPECT_EQ(v.ig[0], 1.0);
  for (std::size_t i = 0; i < v.terms.size(); ++i) {
    std::uint64_t pm = 0, pb = 0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      bool has = std::count(docs[d].begin(), docs[d].end(), v.terms[i]) > 0;
      if (has) (y[d] ? pm : pb)++;
    }
    EXPECT_NEAR(v.ig[i], oracle::mutual_information(pm, pb, 3 - pm, 3 - pb), 1e-12) << v.terms[i];
    EXPECT_DOUBLE_EQ(v.idf[i], std::log(6.0 / static_cast<double>(pm + pb)));
    if (i > 0) {
      EXPECT_GE(v.ig[i - 1], v.ig[i]);
    }
  }
  o.cap = 2;
  EXPECT_EQ(select_terms_by_information_gain(docs, y, o).terms.size(), 2u);
}

TEST(Vocabulary, SeededSampleIsDeterministic) {
  std::vector<std::vector<std::string>> docs;
  std::vector<bool> y;
  for (int i = 0; i < 40; ++i) {
    docs.push_back({"w" + std::to_string(i % 7), i % 2 ? "bad" : "good"});
    y.push_back(i % 2);
  }
  VocabularyOptions o;
  EXPECT_EQ(select_terms_by_information_gain(docs, y, o), select_terms_by_information_gain(docs, y, o));
  EXPECT_THROW(select_terms_by_information_gain(docs, std::vector<bool>(40, true), o),
               PreconditionError);
  auto v = select_terms_by_information_gain(docs, y, o);
  EXPECT_EQ(vocabulary_from_json(to_json(v)), v);
}

// ---------------------------------------------------------------------------

VocabularyModel two_terms() {
  VocabularyModel v;
  v.language = "en";
  v.terms = {"virus", "scan"};
  v.idf = {0.7, 1.1};
  v.ig = {0.5, 0.25};
  return v;
}

CorpusSet five_posts() {
  return CorpusSet({fixtures::corpus({{"p1", "t1", "u1", "2012-01-01", "virus scan virus"},
                                      {"p2", "t1", "u2", "2012-01-02", "please scan now"},
                                      {"p3", "t2", "u1", "2012-01-05", "hello"},
                                      {"p4", "t2", "u3", "2012-01-06", ""},
                                      {"p5", "t2", "", "2012-01-07", "virus 1.2.3.4"}})});
}

TEST(FeatureMatrix, WordsOnlySpotCheck) {
  auto set = five_posts();
  auto m = build_matrix(set, {"p1", "p2", "p3", "p4", "p5"}, two_terms(), MatrixMode::kWordsOnly);
  ASSERT_EQ(m.values.cols(), 2u);
  EXPECT_EQ(m.column_names, (std::vector<std::string>{"w:virus", "w:scan"}));
  EXPECT_DOUBLE_EQ(m.values(0, 0), 2.0 / 3.0 * 0.7);
  EXPECT_DOUBLE_EQ(m.values(0, 1), 1.0 / 3.0 * 1.1);
  EXPECT_DOUBLE_EQ(m.values(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(m.values(1, 1), 1.0 / 3.0 * 1.1);
  EXPECT_NEAR(m.values.squared_norm(),
              m.values(0, 0) * m.values(0, 0) + m.values(0, 1) * m.values(0, 1) +
                  m.values(1, 1) * m.values(1, 1) + 0.49,
              1e-12);
  EXPECT_DOUBLE_EQ(m.values(4, 0), 0.7);
  EXPECT_TRUE(m.flagged_rows.empty());
}

TEST(FeatureMatrix, CombinedAddsScaledBehavioralBlock) {
  auto set = five_posts();
  auto m = build_matrix(set, {"p1", "p2", "p3", "p4", "p5"}, two_terms(), MatrixMode::kCombined);
  ASSERT_EQ(m.values.cols(), 2u + BehavioralFeatures::kCount);
  EXPECT_EQ(m.column_names[2], "u:n_posts");
  EXPECT_EQ(m.flagged_rows, (std::vector<std::string>{"p5"}));
  // n_posts: u1 has 2, u2 and u3 have 1 each.
  EXPECT_EQ(m.values(0, 2), 1.0);
  EXPECT_EQ(m.values(1, 2), 0.0);
  EXPECT_EQ(m.values(2, 2), 1.0);
  EXPECT_EQ(m.values(3, 2), 0.0);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 2; c < m.values.cols(); ++c) {
      EXPECT_GE(m.values(r, c), 0.0);
      EXPECT_LE(m.values(r, c), 1.0);
      if (r == 4) {
        EXPECT_EQ(m.values(r, c), 0.0);
      }
    }
  }
}

TEST(FeatureMatrix, UnknownPostRejected) {
  EXPECT_THROW(build_matrix(five_posts(), {"zz"}, two_terms(), MatrixMode::kWordsOnly),
               IntegrityError);
}

}  // namespace
}  // namespace forumip
