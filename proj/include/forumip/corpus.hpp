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

// Normalized forum data model: users, threads, posts.
//
// A ForumCorpus is validated once at construction and never mutated
// afterwards, so it can be shared freely between readers.

#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "forumip/common.hpp"
#include "forumip/stats.hpp"

namespace forumip {

/// Reserved id for deleted or anonymous authors.
inline constexpr std::string_view kAnonUserId = "_anon_";

struct User {
  std::string id;
  Date join_date{};
  std::string display_name;

  bool operator==(const User&) const = default;
};

struct Post {
  std::string id;
  std::string thread_id;
  std::string user_id;
  Timestamp timestamp{};
  std::string body;
  bool is_thread_initiator = false;

  bool operator==(const Post&) const = default;
};

/// Post as read from input, before initiators are resolved.
struct RawPost {
  Post post;
  std::optional<bool> initiator;
};

class ForumCorpus {
 public:
  ForumCorpus() = default;

  /// Validates and normalizes. Anonymous posts (empty user id) are mapped
  /// to the reserved anonymous user; missing initiator flags are derived
  /// from timestamps with ties broken by post id.
  static ForumCorpus build(std::string forum_name, std::string language_tag,
                           std::vector<User> users, std::vector<RawPost> posts);

  const std::string& forum_name() const { return forum_name_; }
  const std::string& language_tag() const { return language_tag_; }
  const std::vector<User>& users() const { return users_; }
  const std::vector<Post>& posts() const { return posts_; }

  std::size_t thread_count() const { return thread_posts_.size(); }

  const User* find_user(std::string_view id) const {
    auto it = user_index_.find(std::string(id));
    return it == user_index_.end() ? nullptr : &users_[it->second];
  }
  const Post* find_post(std::string_view id) const {
    auto it = post_index_.find(std::string(id));
    return it == post_index_.end() ? nullptr : &posts_[it->second];
  }

  /// Indices into posts() authored by `user_id`, in corpus order.
  const std::vector<std::size_t>& posts_of_user(std::string_view user_id) const {
    static const std::vector<std::size_t> kNone;
    auto it = user_posts_.find(std::string(user_id));
    return it == user_posts_.end() ? kNone : it->second;
  }

  const std::map<std::string, std::vector<std::size_t>>& threads() const {
    return thread_posts_;
  }

  bool operator==(const ForumCorpus& o) const {
    return forum_name_ == o.forum_name_ && language_tag_ == o.language_tag_ &&
           users_ == o.users_ && posts_ == o.posts_;
  }

 private:
  std::string forum_name_;
  std::string language_tag_;
  std::vector<User> users_;
  std::vector<Post> posts_;
  std::unordered_map<std::string, std::size_t> user_index_;
  std::unordered_map<std::string, std::size_t> post_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> user_posts_;
  std::map<std::string, std::vector<std::size_t>> thread_posts_;
};

inline ForumCorpus ForumCorpus::build(std::string forum_name,
                                      std::string language_tag,
                                      std::vector<User> users,
                                      std::vector<RawPost> raw) {
  ForumCorpus c;
  c.forum_name_ = std::move(forum_name);
  c.language_tag_ = std::move(language_tag);

  // Anonymous authors first, so the reserved user can be synthesized.
  std::optional<Timestamp> anon_first;
  for (auto& rp : raw) {
    if (rp.post.user_id.empty()) rp.post.user_id = std::string(kAnonUserId);
    if (rp.post.user_id == kAnonUserId) {
      if (!anon_first || rp.post.timestamp < *anon_first) {
        anon_first = rp.post.timestamp;
      }
    }
  }
  bool has_anon = std::any_of(users.begin(), users.end(),
                              [](const User& u) { return u.id == kAnonUserId; });
  if (anon_first && !has_anon) {
    users.push_back({std::string(kAnonUserId), day_of(*anon_first), "anonymous"});
  }

  for (std::size_t i = 0; i < users.size(); ++i) {
    if (users[i].id.empty()) throw IntegrityError("user with empty id");
    if (!c.user_index_.emplace(users[i].id, i).second) {
      throw IntegrityError("duplicate user id '" + users[i].id + "'");
    }
  }

  std::vector<std::optional<bool>> flags;
  flags.reserve(raw.size());
  c.posts_.reserve(raw.size());
  for (auto& rp : raw) {
    const Post& p = rp.post;
    if (p.id.empty()) throw IntegrityError("post with empty id");
    if (p.thread_id.empty()) {
      throw IntegrityError("post '" + p.id + "' has an empty thread id");
    }
    if (!c.user_index_.count(p.user_id)) {
      throw IntegrityError("post '" + p.id + "' references unknown user '" +
                           p.user_id + "'");
    }
    if (!c.post_index_.emplace(p.id, c.posts_.size()).second) {
      throw IntegrityError("duplicate post id '" + p.id + "'");
    }
    flags.push_back(rp.initiator);
    c.thread_posts_[p.thread_id].push_back(c.posts_.size());
    c.user_posts_[p.user_id].push_back(c.posts_.size());
    c.posts_.push_back(std::move(rp.post));
  }

  for (const auto& [thread, idx] : c.thread_posts_) {
    bool explicit_flags = std::any_of(idx.begin(), idx.end(), [&](std::size_t i) {
      return flags[i].has_value();
    });
    std::size_t initiator = idx.front();
    if (explicit_flags) {
      std::size_t n_true = 0;
      for (std::size_t i : idx) {
        if (flags[i].value_or(false)) {
          ++n_true;
          initiator = i;
        }
      }
      if (n_true != 1) {
        throw IntegrityError("thread '" + thread + "' has " +
                             std::to_string(n_true) + " initiator posts");
      }
    } else {
      for (std::size_t i : idx) {
        const Post& a = c.posts_[i];
        const Post& b = c.posts_[initiator];
        if (a.timestamp < b.timestamp ||
            (a.timestamp == b.timestamp && a.id < b.id)) {
          initiator = i;
        }
      }
    }
    for (std::size_t i : idx) {
      c.posts_[i].is_thread_initiator = (i == initiator);
      if (c.posts_[i].timestamp < c.posts_[initiator].timestamp) {
        throw IntegrityError("post '" + c.posts_[i].id +
                             "' predates the initiator of thread '" + thread +
                             "'");
      }
    }
  }

  for (const auto& [uid, idx] : c.user_posts_) {
    const User& u = users[c.user_index_.at(uid)];
    Date first = day_of(c.posts_[idx.front()].timestamp);
    for (std::size_t i : idx) first = std::min(first, day_of(c.posts_[i].timestamp));
    if (u.join_date > first) {
      throw IntegrityError("user '" + uid + "' joined after their first post");
    }
  }
  c.users_ = std::move(users);
  return c;
}

// ---------------------------------------------------------------------------
// JSON representation.

inline nlohmann::json to_json(const ForumCorpus& c) {
  nlohmann::json users = nlohmann::json::array();
  for (const auto& u : c.users()) {
    users.push_back(
        {{"id", u.id}, {"join_date", format_date(u.join_date)}, {"name", u.display_name}});
  }
  nlohmann::json posts = nlohmann::json::array();
  for (const auto& p : c.posts()) {
    posts.push_back({{"id", p.id},
                     {"thread", p.thread_id},
                     {"user", p.user_id},
                     {"ts", format_datetime(p.timestamp)},
                     {"body", p.body},
                     {"initiator", p.is_thread_initiator}});
  }
  return {{"schema_version", kSchemaVersion},
          {"forum", c.forum_name()},
          {"language", c.language_tag()},
          {"users", std::move(users)},
          {"posts", std::move(posts)}};
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key,
                                     const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError(where + ": missing field '" + key + "'");
  }
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key,
                                  const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) throw SchemaError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

inline ForumCorpus corpus_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("corpus: top level must be an object");
  if (auto it = j.find("schema_version"); it != j.end()) {
    if (!it->is_number_integer() || it->get<int>() != kSchemaVersion) {
      throw SchemaError("corpus: unsupported schema_version " + it->dump() +
                        " (expected " + std::to_string(kSchemaVersion) + ")");
    }
  }
  std::string forum = detail::require_string(j, "forum", "corpus");
  std::string language = j.value("language", std::string("en"));

  std::vector<User> users;
  for (const auto& ju : detail::require(j, "users", "corpus")) {
    std::string id = detail::require_string(ju, "id", "user");
    std::string where = "user '" + id + "'";
    User u;
    u.id = id;
    try {
      u.join_date = parse_iso_date(detail::require_string(ju, "join_date", where));
    } catch (const ParseError& e) {
      throw SchemaError(where + ": " + e.what());
    }
    u.display_name = ju.value("name", std::string());
    users.push_back(std::move(u));
  }

  std::vector<RawPost> posts;
  for (const auto& jp : detail::require(j, "posts", "corpus")) {
    RawPost rp;
    rp.post.id = detail::require_string(jp, "id", "post");
    std::string where = "post '" + rp.post.id + "'";
    rp.post.thread_id = detail::require_string(jp, "thread", where);
    if (auto it = jp.find("user"); it != jp.end() && !it->is_null()) {
      if (!it->is_string()) throw SchemaError(where + ": field 'user' must be a string");
      rp.post.user_id = it->get<std::string>();
    }
    try {
      rp.post.timestamp = parse_iso_datetime(detail::require_string(jp, "ts", where));
    } catch (const ParseError& e) {
      throw SchemaError(where + ": " + e.what());
    }
    rp.post.body = detail::require_string(jp, "body", where);
    if (auto it = jp.find("initiator"); it != jp.end() && !it->is_null()) {
      if (!it->is_boolean()) throw SchemaError(where + ": 'initiator' must be boolean");
      rp.initiator = it->get<bool>();
    }
    posts.push_back(std::move(rp));
  }
  return ForumCorpus::build(std::move(forum), std::move(language), std::move(users),
                            std::move(posts));
}

/// Parses corpus JSON text; syntax errors carry the offending line.
inline ForumCorpus parse_corpus(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed corpus JSON: ") + e.what(),
                     line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  return corpus_from_json(j);
}

inline ForumCorpus ingest_corpus(const std::string& path) {
  return parse_corpus(read_file(path));
}

/// Several forums analysed together. Post ids must be unique across the set.
class CorpusSet {
 public:
  CorpusSet() = default;
  explicit CorpusSet(std::vector<ForumCorpus> corpora) : corpora_(std::move(corpora)) {
    for (std::size_t c = 0; c < corpora_.size(); ++c) {
      const auto& posts = corpora_[c].posts();
      for (std::size_t p = 0; p < posts.size(); ++p) {
        if (!index_.emplace(posts[p].id, std::pair{c, p}).second) {
          throw IntegrityError("post id '" + posts[p].id +
                               "' appears in more than one corpus");
        }
      }
    }
  }

  const std::vector<ForumCorpus>& corpora() const { return corpora_; }

  struct PostRef {
    const ForumCorpus* corpus = nullptr;
    const Post* post = nullptr;
  };

  PostRef find_post(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return {};
    const auto& c = corpora_[it->second.first];
    return {&c, &c.posts()[it->second.second]};
  }

 private:
  std::vector<ForumCorpus> corpora_;
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> index_;
};

// ---------------------------------------------------------------------------
// Descriptive statistics.

struct StatsReport {
  std::string forum;
  std::size_t n_users = 0;          ///< registered users, including silent ones
  std::size_t n_posting_users = 0;  ///< users with at least one post
  std::size_t n_threads = 0;
  std::size_t n_posts = 0;
  /// Calendar days from the first to the last post, inclusive.
  long active_days_span = 0;
  /// Distinct calendar days with at least one post (union over users).
  std::size_t active_days_distinct = 0;
  CountDistribution posts_per_user;
  CountDistribution threads_per_user;
};

inline StatsReport corpus_stats(const ForumCorpus& c) {
  if (c.posts().empty()) throw EmptyInputError("corpus '" + c.forum_name() + "' has no posts");
  StatsReport r;
  r.forum = c.forum_name();
  r.n_users = c.users().size();
  r.n_threads = c.thread_count();
  r.n_posts = c.posts().size();

  std::vector<std::uint64_t> ppu, tpu;
  for (const auto& u : c.users()) {
    const auto& idx = c.posts_of_user(u.id);
    if (idx.empty()) continue;
    std::set<std::string_view> threads;
    for (auto i : idx) threads.insert(c.posts()[i].thread_id);
    ppu.push_back(idx.size());
    tpu.push_back(threads.size());
  }
  r.n_posting_users = ppu.size();
  r.posts_per_user = CountDistribution(std::move(ppu));
  r.threads_per_user = CountDistribution(std::move(tpu));

  std::set<Date> days;
  for (const auto& p : c.posts()) days.insert(day_of(p.timestamp));
  r.active_days_distinct = days.size();
  r.active_days_span = days_between(*days.begin(), *days.rbegin()) + 1;
  return r;
}

inline nlohmann::json to_json(const StatsReport& r) {
  return {{"forum", r.forum},
          {"users", r.n_users},
          {"posting_users", r.n_posting_users},
          {"threads", r.n_threads},
          {"posts", r.n_posts},
          {"active_days_span", r.active_days_span},
          {"active_days_distinct", r.active_days_distinct},
          {"posts_per_user", to_json(r.posts_per_user)},
          {"threads_per_user", to_json(r.threads_per_user)}};
}

inline std::string render_stats_table(const std::vector<StatsReport>& rs) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-24s %7s %8s %8s %8s %11s %11s\n", "Forum", "Users", "Posting",
                "Threads", "Posts", "Days (span)", "Days (dist)");
  std::string out = buf;
  for (const auto& r : rs) {
    std::snprintf(buf, sizeof buf, "%-24s %7zu %8zu %8zu %8zu %11ld %11zu\n", r.forum.c_str(),
                  r.n_users, r.n_posting_users, r.n_threads, r.n_posts, r.active_days_span,
                  r.active_days_distinct);
    out += buf;
  }
  return out;
}

}  // namespace forumip
