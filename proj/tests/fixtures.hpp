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

// Small corpus builders shared by the unit tests.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "forumip/common.hpp"
#include "forumip/corpus.hpp"

namespace fixtures {

inline forumip::Timestamp ts(const std::string& iso) { return forumip::parse_iso_datetime(iso); }
inline forumip::Date day(const std::string& iso) { return forumip::parse_iso_date(iso); }

struct PostSpec {
  std::string id, thread, user, when, body;
};

/// Every user joins on 2010-01-01.
inline forumip::ForumCorpus corpus(const std::vector<PostSpec>& posts,
                                   const std::vector<std::string>& silent_users = {},
                                   const std::string& forum = "Test Board",
                                   const std::string& lang = "en") {
  std::vector<forumip::User> users;
  std::vector<std::string> seen;
  auto add_user = [&](const std::string& id) {
    if (id.empty()) return;
    for (const auto& s : seen) {
      if (s == id) return;
    }
    seen.push_back(id);
    users.push_back({id, day("2010-01-01"), id});
  };
  for (const auto& p : posts) add_user(p.user);
  for (const auto& u : silent_users) add_user(u);
  std::vector<forumip::RawPost> raw;
  for (const auto& p : posts) {
    raw.push_back({{p.id, p.thread, p.user, ts(p.when), p.body, false}, std::nullopt});
  }
  return forumip::ForumCorpus::build(forum, lang, std::move(users), std::move(raw));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("forumip_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace fixtures
