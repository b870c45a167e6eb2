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

// Acceptance gate. Each criterion prints one PASS/FAIL line with its pinned
// tolerance and runtime limit; the exit status is nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "forumip/ablation.hpp"
#include "forumip/classify.hpp"
#include "forumip/cocluster.hpp"
#include "forumip/compare.hpp"
#include "forumip/features.hpp"
#include "forumip/geotime.hpp"
#include "forumip/ipextract.hpp"
#include "forumip/pipeline.hpp"
#include "forumip/synth.hpp"
#include "oracles.hpp"

namespace {

using namespace forumip;
namespace fs = std::filesystem;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Timestamp at_day(long d) {
  return std::chrono::sys_days{std::chrono::year{2012} / 1 / 1} + std::chrono::days(d) +
         std::chrono::hours(12);
}

// 1 -------------------------------------------------------------------------

Outcome entropy_oracle() {
  Outcome o;
  std::mt19937_64 gen(101);
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    std::size_t n_posts = 1 + gen() % 25, n_threads = 1 + gen() % 6, n_days = 1 + gen() % 10;
    std::vector<User> users = {{"u", std::chrono::sys_days{std::chrono::year{2011} / 1 / 1}, "u"}};
    std::vector<RawPost> raw;
    std::map<std::size_t, std::uint64_t> per_thread, per_day;
    for (std::size_t i = 0; i < n_posts; ++i) {
      std::size_t th = gen() % n_threads, d = gen() % n_days;
      ++per_thread[th];
      ++per_day[d];
      raw.push_back({{"p" + std::to_string(i), "t" + std::to_string(th), "u",
                      at_day(static_cast<long>(d)), "x", false},
                     std::nullopt});
    }
    auto corpus = ForumCorpus::build("h", "en", users, raw);
    auto f = behavioral_features(corpus, "u");
    std::vector<std::uint64_t> tc, dc;
    for (auto [k, v] : per_thread) tc.push_back(v);
    for (auto [k, v] : per_day) dc.push_back(v);
    worst = std::max({worst, std::abs(f.avg_thread_entropy - oracle::entropy_bits(tc)),
                      std::abs(f.avg_day_entropy - oracle::entropy_bits(dc))});
  }
  o.require(worst <= 1e-12, fmt("max deviation %.3g > 1e-12", worst));
  std::vector<std::uint64_t> single = {7};
  o.require(shannon_entropy_bits(single) == 0.0, "single thread is not exactly 0");
  for (std::size_t n = 1; n <= 64; ++n) {
    std::vector<std::uint64_t> uniform(n, 3);
    o.require(shannon_entropy_bits(uniform) == std::log2(static_cast<double>(n)),
              fmt("uniform over %.0f is not exactly log2 n", static_cast<double>(n)));
  }
  if (o.ok) o.detail = fmt("max deviation %.2g", worst);
  return o;
}

// 2 -------------------------------------------------------------------------

Outcome information_gain_oracle() {
  Outcome o;
  std::mt19937_64 gen(202);
  double worst = 0;
  for (int t = 0; t < 500; ++t) {
    std::uint64_t c[4];
    for (auto& v : c) v = gen() % 50;
    if (c[0] + c[1] + c[2] + c[3] == 0) c[0] = 1;
    worst = std::max(worst, std::abs(information_gain(c[0], c[1], c[2], c[3]) -
                                     oracle::mutual_information(c[0], c[1], c[2], c[3])));
  }
  o.require(worst <= 1e-10, fmt("max deviation %.3g > 1e-10", worst));
  for (std::uint64_t k = 1; k < 30; ++k) {
    for (std::uint64_t m = 1; m < 10; ++m) {
      // present/absent split k:m in both classes -> independent.
      o.require(information_gain(k * 2, k * 3, m * 2, m * 3) == 0.0, "independent IG not 0");
      o.require(information_gain(k, 0, 0, m) == binary_entropy_bits(k, m),
                "perfect predictor IG not H(label)");
      o.require(information_gain(0, k, m, 0) == binary_entropy_bits(m, k),
                "perfect negative predictor IG not H(label)");
    }
  }
  if (o.ok) o.detail = fmt("max deviation %.2g", worst);
  return o;
}

// 3 -------------------------------------------------------------------------

Matrix uniform_matrix(std::size_t n, std::size_t m, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix x(n, m);
  for (auto& v : x.data()) v = u(gen);
  return x;
}

oracle::Mat to_mat(const Matrix& x) {
  oracle::Mat out(x.rows(), std::vector<double>(x.cols()));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out[i][j] = x(i, j);
  }
  return out;
}

Outcome smr_solver() {
  Outcome o;
  std::mt19937_64 gen(303);
  // (a)
  for (int t = 0; t < 100 && o.ok; ++t) {
    std::size_t n = 3 + gen() % 10, m = 3 + gen() % 10;
    auto x = uniform_matrix(n, m, gen);
    SmrOptions so;
    so.rank = 1 + gen() % std::min<std::size_t>(4, std::min(n, m));
    so.lambda = std::uniform_real_distribution<double>(0.0, 0.5)(gen);
    so.seed = gen();
    auto model = fit_smr(x, so);
    const auto& tr = model.objective_trace;
    for (std::size_t k = 1; k < tr.size(); ++k) {
      o.require(tr[k] <= tr[k - 1] + 1e-10 * std::max(1.0, tr[k - 1]),
                fmt("(a) objective rose by %.3g on instance %.0f", tr[k] - tr[k - 1], t));
    }
  }
  // (b)
  for (int t = 0; t < 20 && o.ok; ++t) {
    std::uniform_real_distribution<double> u(0.1, 2.0);
    std::size_t n = 4 + gen() % 8, m = 4 + gen() % 8;
    std::vector<double> a(n), b(m);
    for (auto& v : a) v = u(gen);
    for (auto& v : b) v = u(gen);
    Matrix x(n, m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) x(i, j) = a[i] * b[j];
    }
    SmrOptions so;
    so.rank = 1;
    so.lambda = 0.0;
    so.seed = gen();
    auto model = fit_smr(x, so);
    double f = smr_objective(x, model.a, model.b, 0.0);
    o.require(f <= 1e-8 * x.squared_norm(), fmt("(b) rank-1 residual %.3g", f));
  }
  // (c) lambda at twice the largest possible first numerator.
  for (int t = 0; t < 20 && o.ok; ++t) {
    auto x = uniform_matrix(5 + gen() % 5, 5 + gen() % 5, gen);
    SmrOptions so;
    so.rank = 3;
    so.seed = gen();
    auto [a0, b0] = smr_initial_factors(x, so.rank, so.seed);
    double top = 0;
    for (std::size_t r = 0; r < so.rank; ++r) {
      for (std::size_t i = 0; i < x.rows(); ++i) {
        double dot = 0;
        for (std::size_t j = 0; j < x.cols(); ++j) dot += x(i, j) * b0(r, j);
        top = std::max(top, dot);
      }
    }
    so.lambda = 2.0 * top;
    auto model = fit_smr(x, so);
    o.require(model.nonzeros() == 0, "(c) factors not annihilated");
    o.require(model.objective_trace.back() == x.squared_norm(), "(c) objective is not ||X||^2");
  }
  // (d)
  std::mt19937_64 xgen(42);
  int within = 0;
  for (int t = 0; t < 100 && o.ok; ++t) {
    auto x = uniform_matrix(6, 5, xgen);
    SmrOptions so;
    so.rank = 2;
    so.lambda = 0.01;
    so.seed = static_cast<std::uint64_t>(t + 1);
    auto model = fit_smr(x, so);
    double f = smr_objective(x, model.a, model.b, so.lambda);
    double best = oracle::smr_best_of_restarts(to_mat(x), 2, 0.01, 200, 2000, 1000 + t);
    within += f <= 1.05 * best;
  }
  o.require(within >= 95, fmt("(d) only %.0f/100 within 5%% of the oracle", within));
  if (o.ok) o.detail = fmt("(d) %.0f/100 within 5%% of a 200-restart oracle", within);
  return o;
}

// 4 -------------------------------------------------------------------------

Outcome classifier_correctness() {
  Outcome o;
  std::mt19937_64 gen(404);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    std::size_t n = 20 + gen() % 30, d = 1 + gen() % 5;
    Matrix x(n, d);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(gen() % 2);
      for (std::size_t j = 0; j < d; ++j) x(i, j) = g(gen);
    }
    std::vector<double> theta(d + 1);
    for (auto& v : theta) v = g(gen);
    double l2 = 0.01 * static_cast<double>(gen() % 10);
    auto grad = logistic_gradient(x, y, theta, l2);
    for (std::size_t k = 0; k <= d; ++k) {
      auto up = theta, down = theta;
      up[k] += 1e-6;
      down[k] -= 1e-6;
      double fd = (logistic_objective(x, y, up, l2) - logistic_objective(x, y, down, l2)) / 2e-6;
      worst = std::max(worst, std::abs(grad[k] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  o.require(worst <= 1e-5, fmt("LR gradient relative error %.3g", worst));

  std::vector<std::vector<double>> rows = {{1.0, 0.2}, {1.5, 0.1}, {0.7, 0.4},
                                           {3.0, 1.0}, {2.2, 1.6}, {2.9, 0.9}};
  std::vector<int> y6 = {0, 0, 0, 1, 1, 1};
  Matrix x6(6, 2);
  for (std::size_t i = 0; i < 6; ++i) {
    x6(i, 0) = rows[i][0];
    x6(i, 1) = rows[i][1];
  }
  auto nb = train(ClassifierKind::kNaiveBayes, x6, y6);
  for (std::vector<double> probe : {std::vector<double>{2.0, 0.5}, {1.2, 0.3}, {2.5, 1.1}, {1.9, 0.8}}) {
    double want = oracle::gaussian_nb_posterior(rows, y6, probe);
    double got = predict(nb, probe).score;
    o.require(std::abs(got - want) <= 1e-12 * std::max(1.0, want),
              fmt("NB posterior %.17g vs closed form %.17g", got, want));
  }

  Matrix xk(5, 1);
  const double pts[] = {0, 1, 2, 10, 11};
  for (std::size_t i = 0; i < 5; ++i) xk(i, 0) = pts[i];
  auto knn = train(ClassifierKind::kKnn, xk, {0, 0, 1, 1, 1});
  // Hand table: probe -> malicious votes among the three nearest.
  const std::pair<double, int> table[] = {{1.4, 1}, {9.0, 3}, {1.9, 1}, {5.6, 2}, {6.4, 3}, {-3.0, 1}};
  for (auto [p, votes] : table) {
    std::vector<double> probe = {p};
    auto pr = predict(knn, probe);
    o.require(pr.score == votes / 3.0 && pr.label == (votes >= 2 ? kMalicious : kBenign),
              fmt("3NN vote at %.2f differs from the hand table", p));
  }

  for (int t = 0; t < 200; ++t) {
    std::size_t n = 20 + gen() % 200;
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(gen() % 2);
    auto f = stratified_folds(y, 10, gen());
    std::size_t n_mal = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    std::size_t n_ben = n - n_mal;
    std::vector<std::size_t> size(10), mal(10);
    for (std::size_t i = 0; i < n; ++i) {
      ++size[f[i]];
      mal[f[i]] += static_cast<std::size_t>(y[i]);
    }
    auto [lo, hi] = std::minmax_element(size.begin(), size.end());
    o.require(*hi - *lo <= 1, "fold sizes differ by more than one");
    for (std::size_t k = 0; k < 10; ++k) {
      o.require(mal[k] >= n_mal / 10 && mal[k] <= (n_mal + 9) / 10, "malicious share unstratified");
      std::size_t ben = size[k] - mal[k];
      o.require(ben >= n_ben / 10 && ben <= (n_ben + 9) / 10, "benign share unstratified");
    }
  }
  if (o.ok) o.detail = fmt("LR gradient rel. error %.2g", worst);
  return o;
}

// 5 -------------------------------------------------------------------------

Outcome ablation_direction() {
  Outcome o;
  double sum_cc = 0, sum_wf = 0;
  const int kSeeds = 20;
  for (int s = 1; s <= kSeeds; ++s) {
    synth::Options so;
    so.forum = "Planted Board";
    so.seed = static_cast<std::uint64_t>(s);
    auto forum = synth::generate(so);
    auto dir = fs::temp_directory_path() / ("forumip_accept_ablate_" + std::to_string(s));
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_file((dir / "corpus.json").string(), to_json(forum.corpus).dump());
    write_file((dir / "blacklist.csv").string(), to_csv(synth::blacklist_of({forum}, "planted")));
    PipelineConfig cfg;
    cfg.corpora = {(dir / "corpus.json").string()};
    cfg.blacklist = (dir / "blacklist.csv").string();
    cfg.seed = static_cast<std::uint64_t>(s);
    Pipeline p(cfg, dir);
    for (const char* st : {"ingest", "extract-ips", "label", "featurize", "cocluster", "ablate"}) {
      p.run(st);
    }
    auto rep = nlohmann::json::parse(read_file((dir / "ablate/ablation.json").string()));
    for (const auto& e : rep["sets"]) {
      if (e["feature_set"] == "co_clustered") sum_cc += e["accuracy"].get<double>();
      if (e["feature_set"] == "words_frequency") sum_wf += e["accuracy"].get<double>();
    }
    fs::remove_all(dir);
  }
  double cc = sum_cc / kSeeds, wf = sum_wf / kSeeds;
  o.require(cc >= wf, fmt("co_clustered %.3f < words_frequency %.3f", cc, wf));
  o.detail = fmt("mean accuracy co_clustered %.3f, words_frequency %.3f", cc, wf);
  return o;
}

// 6 -------------------------------------------------------------------------

Outcome separable_sanity() {
  Outcome o;
  std::mt19937_64 gen(606);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t n = 400, d = 5;
  Matrix x(n, d);
  std::vector<int> y(n);
  std::vector<double> w = {1.0, -2.0, 0.5, 1.5, -1.0};
  for (std::size_t i = 0; i < n; ++i) {
    double z = 0;
    do {
      z = 0;
      for (std::size_t j = 0; j < d; ++j) {
        x(i, j) = g(gen);
        z += w[j] * x(i, j);
      }
    } while (std::abs(z) < 0.5);  // margin
    y[i] = z > 0 ? kMalicious : kBenign;
  }
  auto rep = cross_validate(ClassifierKind::kLogisticRegression, x, y, 10, 1);
  o.require(rep.pooled.accuracy >= 0.95, fmt("separable accuracy %.3f < 0.95", rep.pooled.accuracy));
  double sum = 0;
  for (int s = 0; s < 20; ++s) {
    auto shuffled = y;
    std::mt19937_64 sg(static_cast<std::uint64_t>(7000 + s));
    std::shuffle(shuffled.begin(), shuffled.end(), sg);
    sum += cross_validate(ClassifierKind::kLogisticRegression, x, shuffled, 10,
                          static_cast<std::uint64_t>(s))
               .pooled.accuracy;
  }
  double mean = sum / 20.0;
  o.require(std::abs(mean - 0.5) <= 0.1, fmt("shuffled-label accuracy %.3f outside 0.5 +/- 0.1", mean));
  o.detail = fmt("separable %.3f, shuffled mean %.3f", rep.pooled.accuracy, mean);
  return o;
}

// 7 -------------------------------------------------------------------------

Outcome ip_extraction() {
  Outcome o;
  std::mt19937_64 gen(707);
  const std::vector<std::string> pieces = {
      "0", "1", "9", "25", "255", "256", "999", "1000", "07", ".", ".", ".", "..", " ", " ",
      "a", "x1", ":", "/", "http://", "\xD8\xB3", ",", "(", ")", "\n", "v", "1.2.3", "-"};
  std::size_t checked = 0, mentions = 0;
  for (int t = 0; t < 10000; ++t) {
    std::string body;
    std::size_t len = gen() % 60;
    for (std::size_t k = 0; k < len; ++k) body += pieces[gen() % pieces.size()];
    if (t % 50 == 0) body += " 64.91.255.87 ";
    if (t % 70 == 0) body += "http://69.50.191.51/2484/";
    std::vector<std::pair<std::size_t, std::string>> got;
    for (auto [off, l] : find_ipv4_spans(body)) got.emplace_back(off, body.substr(off, l));
    auto want = oracle::ipv4_substrings(body);
    if (got != want) {
      o.require(false, "mismatch on fuzz post " + std::to_string(t));
      break;
    }
    mentions += got.size();
    ++checked;
  }
  auto only = [](const std::string& s) {
    std::vector<std::string> out;
    for (auto [off, l] : find_ipv4_spans(s)) out.push_back(s.substr(off, l));
    return out;
  };
  o.require(only("hosts file entry 64.91.255.87 localhost") == std::vector<std::string>{"64.91.255.87"},
            "missed 64.91.255.87");
  o.require(only("redirected to http://69.50.191.51/2484/") == std::vector<std::string>{"69.50.191.51"},
            "missed 69.50.191.51");
  for (const char* bad : {"version 999.1.1.1 and 1.2.3", "1.2.3.4.5", "a1.2.3.4", "1.2.3.4b",
                          "256.256.256.256", "1.2.3.1234"}) {
    o.require(only(bad).empty(), std::string("accepted rejection fixture '") + bad + "'");
  }
  if (o.ok) o.detail = fmt("%.0f posts, %.0f mentions agree", static_cast<double>(checked),
                           static_cast<double>(mentions));
  return o;
}

// 8 -------------------------------------------------------------------------

Outcome early_warning_arithmetic() {
  Outcome o;
  // Scripted: IP k is reported on day 1000 and first mentioned on day 1000 - lead(k).
  auto lead_of = [](std::uint32_t k) { return static_cast<long>(k * 17 % 500) - 60; };
  std::string csv = "ip,first_reported_date\n";
  std::vector<IpMention> ms;
  std::set<Ipv4> joint;
  for (std::uint32_t k = 0; k < 50; ++k) {
    Ipv4 a(0x05000000u + k);
    csv += a.to_string() + "," + format_date(std::chrono::floor<std::chrono::days>(at_day(1000))) + "\n";
    IpMention m;
    m.ip = a;
    m.post_id = "p" + std::to_string(k);
    m.forum = "F";
    m.timestamp = at_day(1000 - lead_of(k));
    ms.push_back(m);
    IpMention later = m;
    later.post_id += "b";
    later.timestamp = at_day(1000 - lead_of(k) + 40);
    ms.push_back(later);
    joint.insert(a);
  }
  auto bl = parse_blacklist_csv(csv, "scripted");
  auto r = early_warning(joint, ms, bl).by_ip;
  // Independent recount.
  const long thresholds[] = {30, 90, 180, 365};
  std::size_t nonpos = 0;
  for (std::uint32_t k = 0; k < 50; ++k) nonpos += lead_of(k) <= 0;
  o.require(r.n_joint == 50, "joint count is not 50");
  o.require(r.n_nonpositive == nonpos, "nonpositive count differs from recount");
  for (std::size_t b = 0; b < 4; ++b) {
    std::size_t c = 0;
    for (std::uint32_t k = 0; k < 50; ++k) c += lead_of(k) >= thresholds[b];
    o.require(r.at_least[b] == c, fmt("bucket %.0f count differs from recount", static_cast<double>(b)));
    o.require(r.fraction(b) == static_cast<double>(c) / 50.0, "bucket fraction differs");
  }
  std::mt19937_64 gen(808);
  for (int t = 0; t < 500 && o.ok; ++t) {
    std::string fcsv = "ip,first_reported_date\n";
    std::vector<IpMention> fm;
    std::set<Ipv4> fj;
    std::size_t n = 1 + gen() % 40;
    for (std::uint32_t k = 0; k < n; ++k) {
      Ipv4 a(0x06000000u + k);
      long rep = 500 + static_cast<long>(gen() % 1000);
      fcsv += a.to_string() + "," + format_date(std::chrono::floor<std::chrono::days>(at_day(rep))) + "\n";
      for (std::size_t j = 0, nm = 1 + gen() % 3; j < nm; ++j) {
        IpMention m;
        m.ip = a;
        m.post_id = "q" + std::to_string(k) + "_" + std::to_string(j);
        m.forum = gen() % 2 ? "F" : "G";
        m.timestamp = at_day(static_cast<long>(gen() % 1500));
        fm.push_back(m);
      }
      if (gen() % 4) fj.insert(a);
    }
    auto fr = early_warning(fj, fm, parse_blacklist_csv(fcsv, "fuzz"));
    for (const auto* b : {&fr.by_ip, &fr.by_ip_forum}) {
      for (std::size_t k = 1; k < 4; ++k) o.require(b->at_least[k] <= b->at_least[k - 1], "buckets not nested");
      o.require(b->at_least[0] + b->n_nonpositive <= b->n_joint, "bucket exceeds denominator");
    }
    o.require(fr.by_ip.n_joint <= fj.size(), "more joint IPs than predicted");
  }
  if (o.ok) o.detail = fmt("fractions %.2f/%.2f/%.2f", r.fraction(0), r.fraction(1), r.fraction(2));
  return o;
}

// 9 -------------------------------------------------------------------------

Outcome geo_lookup() {
  Outcome o;
  std::mt19937_64 gen(909);
  std::vector<GeoRange> ranges;
  std::vector<oracle::Range> plain;
  std::uint32_t cursor = 0x01000000;
  for (int i = 0; i < 1000; ++i) {
    cursor += static_cast<std::uint32_t>(gen() % 200000);
    std::uint32_t len = static_cast<std::uint32_t>(gen() % 2000000);
    ranges.push_back({Ipv4(cursor), Ipv4(cursor + len), "C" + std::to_string(i),
                      kContinents[static_cast<std::size_t>(i) % 6]});
    plain.push_back({cursor, cursor + len, i});
    cursor += len + 1;
  }
  std::shuffle(ranges.begin(), ranges.end(), gen);
  GeoRangeDb db(ranges);
  std::set<Ipv4> sample;
  for (int t = 0; t < 10000; ++t) {
    std::uint32_t v = static_cast<std::uint32_t>(gen() % (std::uint64_t{cursor} + 1000000));
    auto got = db.locate(Ipv4(v));
    auto want = oracle::linear_locate(plain, v);
    bool same = got.has_value() == want.has_value() &&
                (!got || got->country == "C" + std::to_string(*want));
    if (!same) {
      o.require(false, "locate differs from linear scan at " + Ipv4(v).to_string());
      break;
    }
    sample.insert(Ipv4(v));
  }
  auto share = continent_distribution(sample, db);
  double sum = 0;
  for (auto c : kContinents) sum += share.percent(c);
  o.require(std::abs(sum - 100.0) <= 0.1, fmt("continent percentages sum to %.4f", sum));
  if (o.ok) o.detail = fmt("%.0f located, percentages sum to %.6f", static_cast<double>(share.located), sum);
  return o;
}

// 10 ------------------------------------------------------------------------

Outcome end_to_end_determinism() {
  Outcome o;
  const std::string mini = std::string(FORUMIP_SOURCE_DIR) + "/data/mini";
  PipelineConfig cfg;
  cfg.corpora = {mini + "/forum_en.json", mini + "/forum_fa.json"};
  cfg.blacklist = mini + "/blacklist.csv";
  cfg.geo_db = mini + "/geo.csv";
  cfg.seed = 1;
  std::vector<fs::path> dirs;
  for (int run = 0; run < 2; ++run) {
    auto dir = fs::temp_directory_path() / ("forumip_accept_determinism_" + std::to_string(run));
    fs::remove_all(dir);
    fs::create_directories(dir);
    Pipeline(cfg, dir).run_all();
    dirs.push_back(dir);
  }
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
    if (!e.is_regular_file()) continue;
    auto rel = fs::relative(e.path(), dirs[0]);
    auto other = dirs[1] / rel;
    if (!fs::exists(other)) {
      o.require(false, rel.string() + " missing from the second run");
      break;
    }
    if (read_file(e.path().string()) != read_file(other.string())) {
      o.require(false, rel.string() + " differs between runs");
      break;
    }
    ++compared;
  }
  for (const char* must : {"evaluate/manifest.json", "evaluate/eval.json", "compare/comparison.json",
                           "geo/geo.json", "timeline/timeline.json"}) {
    o.require(fs::exists(dirs[0] / must), std::string(must) + " not produced");
  }
  for (const auto& d : dirs) fs::remove_all(d);
  if (o.ok) o.detail = fmt("%.0f artifacts byte-identical", static_cast<double>(compared));
  return o;
}

struct Criterion {
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"entropy oracle", 5, entropy_oracle},
      {"information-gain oracle", 5, information_gain_oracle},
      {"co-clustering solver", 60, smr_solver},
      {"classifier correctness", 30, classifier_correctness},
      {"ablation direction on planted data", 300, ablation_direction},
      {"separable-data sanity", 60, separable_sanity},
      {"IP extraction", 30, ip_extraction},
      {"early-warning arithmetic", 5, early_warning_arithmetic},
      {"geo lookup", 10, geo_lookup},
      {"end-to-end determinism", 120, end_to_end_determinism},
  };
  int failed = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.ok && secs > c.limit_s) {
      out.ok = false;
      out.detail += fmt(" (runtime %.1fs over the %.0fs limit)", secs, c.limit_s);
    }
    failed += !out.ok;
    std::printf("%s %2d %-36s %6.2fs / %3.0fs  %s\n", out.ok ? "PASS" : "FAIL", index, c.name, secs,
                c.limit_s, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed ? 1 : 0;
}
