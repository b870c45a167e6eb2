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

// Writes a synthetic two-forum dataset: one corpus JSON per forum, a
// blacklist CSV and a geolocation range CSV. The bundled data/mini set is
// the output of `forumip-synth --out data/mini` with default options.

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "forumip/synth.hpp"

int main(int argc, char** argv) {
  CLI::App app{"forumip-synth: generate a planted synthetic forum dataset"};
  std::string out = "mini";
  std::uint64_t seed = 7;
  std::size_t ranges = 300;
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.add_option("--seed", seed, "Generator seed")->capture_default_str();
  app.add_option("--geo-ranges", ranges, "Ranges in the geolocation table")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    using namespace forumip;
    synth::Options en;
    en.forum = "Mini Security Board";
    en.id_prefix = "en";
    en.n_benign_ips = 90;
    en.seed = seed;
    synth::Options fa = en;
    fa.forum = "Mini Persian Board";
    fa.language = "fa";
    fa.id_prefix = "fa";
    fa.n_reporters = 10;
    fa.n_casual = 40;
    fa.n_malicious_ips = 40;
    fa.n_benign_ips = 60;
    fa.start = std::chrono::sys_days{std::chrono::year{2013} / 3 / 1};
    fa.seed = seed + 1;

    std::vector<synth::Forum> forums = {synth::generate(en), synth::generate(fa)};
    std::filesystem::create_directories(out);
    write_file(out + "/forum_en.json", to_json(forums[0].corpus).dump(2) + "\n");
    write_file(out + "/forum_fa.json", to_json(forums[1].corpus).dump(2) + "\n");
    write_file(out + "/blacklist.csv", to_csv(synth::blacklist_of(forums, "mini-blacklist")));
    write_file(out + "/geo.csv", synth::to_csv(synth::geo_db(ranges, 0.05, seed + 2)));
    std::cout << "wrote " << out << "\n";
  } catch (const forumip::Error& e) {
    std::cerr << "forumip-synth: error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  }
  return 0;
}
