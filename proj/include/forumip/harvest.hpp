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

// Offline conversion of saved forum pages into a corpus.
//
// A harvest configuration is an INI file:
//
//   [forum]
//   name         = Example Board          ; required
//   language     = en                     ; BCP-47 tag, default "en"
//   encoding     = utf-8                  ; any ICU converter name
//   date_format  = %d %b %Y, %H:%M        ; std::get_time syntax, C locale
//   date_example = 02 Mar 2014, 17:45     ; required, must parse
//   join_date_format = %b %Y              ; optional, defaults to date_format
//   utc_offset   = +00:00                 ; zone of page-local times
//
//   [selectors]
//   post      = //div[@class='post']      ; required, one node per post
//   user_id   = .//a[@class='user']/@data-uid   ; required
//   post_date = .//span[@class='date']    ; required
//   post_body = .//div[@class='body']     ; required
//   post_id, thread_id, user_name, user_join_date   ; optional
//
//   [date_rules]
//   Yesterday = 01 Mar 2014               ; literal substitution before parsing
//
// Field selectors are evaluated relative to the post node unless they start
// with '/'. A missing thread_id selector takes the page's file stem up to
// the last '_p<digits>' suffix. A missing post_id is replaced by a content
// hash of (thread, user, date, body) so that overlapping pages deduplicate.

#pragma once

#include <algorithm>
#include <cctype>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <locale>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <unicode/unistr.h>

#include "forumip/common.hpp"
#include "forumip/corpus.hpp"
#include "forumip/html.hpp"

namespace forumip {

struct HarvestConfig {
  std::string forum_name;
  std::string language = "en";
  std::string encoding = "utf-8";
  std::string date_format;
  std::string date_example;
  std::string join_date_format;
  std::chrono::minutes utc_offset{0};
  std::map<std::string, std::string> selectors;
  std::vector<std::pair<std::string, std::string>> date_rules;

  static constexpr std::string_view kMandatory[] = {"post", "user_id", "post_date", "post_body"};
  static constexpr std::string_view kKnown[] = {"post",      "post_id",   "thread_id",
                                                "user_id",   "user_name", "user_join_date",
                                                "post_date", "post_body"};

  /// Throws SchemaError naming the first violated invariant.
  void validate() const;
};

/// Parses `text` with a get_time format in the C locale. The whole string
/// must be consumed. `offset` is the zone of the text and is subtracted.
inline std::optional<Timestamp> parse_with_format(std::string_view text, const std::string& fmt,
                                                  std::chrono::minutes offset = {}) {
  std::tm tm{};
  tm.tm_mday = 1;
  std::istringstream is{std::string(text)};
  is.imbue(std::locale::classic());
  is >> std::get_time(&tm, fmt.c_str());
  if (is.fail()) return std::nullopt;
  is >> std::ws;
  if (is.peek() != std::char_traits<char>::eof()) return std::nullopt;
  using namespace std::chrono;
  year_month_day ymd{year{tm.tm_year + 1900}, month{static_cast<unsigned>(tm.tm_mon + 1)},
                     day{static_cast<unsigned>(tm.tm_mday)}};
  if (!ymd.ok() || tm.tm_hour > 23 || tm.tm_min > 59 || tm.tm_sec > 60) return std::nullopt;
  return sys_days{ymd} + hours{tm.tm_hour} + minutes{tm.tm_min} + seconds{tm.tm_sec} - offset;
}

inline void HarvestConfig::validate() const {
  if (forum_name.empty()) throw SchemaError("harvest config: [forum] name is required");
  for (auto f : kMandatory) {
    auto it = selectors.find(std::string(f));
    if (it == selectors.end() || it->second.empty()) {
      throw SchemaError("harvest config: selector '" + std::string(f) + "' is required");
    }
  }
  for (const auto& [k, v] : selectors) {
    if (std::find(std::begin(kKnown), std::end(kKnown), k) == std::end(kKnown)) {
      throw SchemaError("harvest config: unknown selector '" + k + "'");
    }
    html::Path::compile(v);
  }
  if (date_format.empty()) throw SchemaError("harvest config: date_format is required");
  if (date_example.empty()) throw SchemaError("harvest config: date_example is required");
  if (!parse_with_format(date_example, date_format)) {
    throw SchemaError("harvest config: date_format '" + date_format +
                      "' does not parse date_example '" + date_example + "'");
  }
}

inline std::chrono::minutes parse_utc_offset(std::string_view s) {
  if (s.empty() || s == "Z" || s == "UTC") return std::chrono::minutes{0};
  if (s.size() != 6 || (s[0] != '+' && s[0] != '-') || s[3] != ':' ||
      !std::isdigit(static_cast<unsigned char>(s[1])) ||
      !std::isdigit(static_cast<unsigned char>(s[2])) ||
      !std::isdigit(static_cast<unsigned char>(s[4])) ||
      !std::isdigit(static_cast<unsigned char>(s[5]))) {
    throw SchemaError("harvest config: utc_offset must look like +HH:MM");
  }
  int h = (s[1] - '0') * 10 + (s[2] - '0');
  int m = (s[4] - '0') * 10 + (s[5] - '0');
  if (h > 14 || m > 59) throw SchemaError("harvest config: utc_offset out of range");
  int total = h * 60 + m;
  return std::chrono::minutes{s[0] == '-' ? -total : total};
}

inline HarvestConfig parse_harvest_config(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is{std::string(text)};
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("harvest config: " + e.message(), e.line());
  }
  HarvestConfig cfg;
  for (const auto& [section, body] : tree) {
    if (section == "forum") {
      for (const auto& [k, v] : body) {
        const std::string val = v.data();
        if (k == "name") cfg.forum_name = val;
        else if (k == "language") cfg.language = val;
        else if (k == "encoding") cfg.encoding = val;
        else if (k == "date_format") cfg.date_format = val;
        else if (k == "date_example") cfg.date_example = val;
        else if (k == "join_date_format") cfg.join_date_format = val;
        else if (k == "utc_offset") cfg.utc_offset = parse_utc_offset(val);
        else throw SchemaError("harvest config: unknown key [forum] " + k);
      }
    } else if (section == "selectors") {
      for (const auto& [k, v] : body) cfg.selectors[k] = v.data();
    } else if (section == "date_rules") {
      for (const auto& [k, v] : body) cfg.date_rules.emplace_back(k, v.data());
    } else {
      throw SchemaError("harvest config: unknown section [" + section + "]");
    }
  }
  if (cfg.join_date_format.empty()) cfg.join_date_format = cfg.date_format;
  cfg.validate();
  return cfg;
}

inline HarvestConfig load_harvest_config(const std::string& path) {
  return parse_harvest_config(read_file(path));
}

/// One post as scraped from a page. Optional fields are null when their
/// selector is absent or matched nothing.
struct PostFragment {
  std::string source;  ///< page name
  std::size_t ordinal = 0;
  std::string post_id;
  std::string thread_id;
  std::optional<std::string> user_id;  ///< null means anonymous
  std::optional<std::string> user_name;
  std::optional<Date> user_join_date;
  Timestamp timestamp{};
  std::string body;

  bool operator==(const PostFragment&) const = default;
};

struct FragmentError {
  std::string source;
  std::size_t ordinal = 0;
  std::string message;
};

struct PageResult {
  std::vector<PostFragment> fragments;
  std::vector<FragmentError> errors;
  std::vector<std::string> warnings;
};

/// Converts page bytes in `encoding` to UTF-8.
inline std::string to_utf8(std::string_view bytes, const std::string& encoding) {
  std::string enc = html::detail::lower(encoding);
  if (enc.empty() || enc == "utf-8" || enc == "utf8") {
    if (bytes.size() >= 3 && bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
    return std::string(bytes);
  }
  icu::UnicodeString u(bytes.data(), static_cast<int32_t>(bytes.size()), encoding.c_str());
  if (u.isBogus()) throw SchemaError("harvest: unsupported encoding '" + encoding + "'");
  std::string out;
  u.toUTF8String(out);
  return out;
}

/// Strips a trailing `_p<digits>` page suffix and the extension.
inline std::string thread_from_source(const std::string& source) {
  std::string stem = std::filesystem::path(source).stem().string();
  auto pos = stem.rfind("_p");
  if (pos != std::string::npos && pos + 2 < stem.size() &&
      std::all_of(stem.begin() + static_cast<std::ptrdiff_t>(pos) + 2, stem.end(),
                  [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; })) {
    stem.resize(pos);
  }
  return stem;
}

namespace detail {

inline std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string apply_date_rules(std::string s, const HarvestConfig& cfg) {
  for (const auto& [from, to] : cfg.date_rules) {
    for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) {
      s.replace(p, from.size(), to);
    }
  }
  return s;
}

}  // namespace detail

/// Extracts one fragment per node matched by the `post` selector. Posts
/// with an unparseable or missing date become error records instead.
inline PageResult parse_page(std::string_view page, const HarvestConfig& cfg,
                             const std::string& source = "page") {
  PageResult r;
  std::map<std::string, html::Path> paths;
  for (const auto& [k, v] : cfg.selectors) paths.emplace(k, html::Path::compile(v));
  html::Document doc = html::Document::parse(to_utf8(page, cfg.encoding));

  auto field = [&](const char* name, html::NodeId ctx) -> std::optional<std::string> {
    auto it = paths.find(name);
    if (it == paths.end()) return std::nullopt;
    auto v = it->second.first_string(doc, ctx);
    if (v && v->empty()) return std::nullopt;
    return v;
  };

  auto nodes = paths.at("post").select(doc, doc.root());
  if (nodes.empty()) {
    r.warnings.push_back(source + ": selector 'post' matched no nodes");
    return r;
  }
  std::size_t ordinal = 0;
  for (html::NodeId node : nodes) {
    ++ordinal;
    PostFragment f;
    f.source = source;
    f.ordinal = ordinal;
    auto raw_date = field("post_date", node);
    if (!raw_date) {
      r.errors.push_back({source, ordinal, "post date not found"});
      continue;
    }
    auto ts = parse_with_format(detail::apply_date_rules(*raw_date, cfg), cfg.date_format,
                                cfg.utc_offset);
    if (!ts) {
      r.errors.push_back({source, ordinal, "unparseable date '" + *raw_date + "'"});
      continue;
    }
    f.timestamp = *ts;
    f.user_id = field("user_id", node);
    f.user_name = field("user_name", node);
    if (auto jd = field("user_join_date", node)) {
      auto jts = parse_with_format(detail::apply_date_rules(*jd, cfg), cfg.join_date_format);
      if (!jts) {
        r.errors.push_back({source, ordinal, "unparseable join date '" + *jd + "'"});
        continue;
      }
      f.user_join_date = day_of(*jts);
    }
    f.body = field("post_body", node).value_or("");
    f.thread_id = field("thread_id", node).value_or(thread_from_source(source));
    if (auto pid = field("post_id", node)) {
      f.post_id = *pid;
    } else {
      f.post_id = "h" + detail::fnv1a_hex(f.thread_id + '\x1f' + f.user_id.value_or("") + '\x1f' +
                                          format_datetime(f.timestamp) + '\x1f' + f.body);
    }
    r.fragments.push_back(std::move(f));
  }
  return r;
}

/// Raised when two fragments share a post id but disagree on content.
class ConflictError : public IntegrityError {
 public:
  using IntegrityError::IntegrityError;
};

/// Deduplicates fragments by post id and builds a validated corpus. User
/// join dates default to the user's first post day; a scraped join date
/// later than that is clamped to it.
inline ForumCorpus assemble_corpus(const std::vector<PostFragment>& fragments,
                                   const std::string& forum_name,
                                   const std::string& language = "en") {
  std::map<std::string, const PostFragment*> by_id;
  for (const auto& f : fragments) {
    if (f.thread_id.empty()) {
      throw PreconditionError("fragment " + f.source + "#" + std::to_string(f.ordinal) +
                              " has no thread id");
    }
    auto [it, inserted] = by_id.emplace(f.post_id, &f);
    if (inserted) continue;
    const PostFragment& g = *it->second;
    if (g.body != f.body || g.thread_id != f.thread_id || g.user_id != f.user_id ||
        g.timestamp != f.timestamp) {
      throw ConflictError("post '" + f.post_id + "' differs between " + g.source + "#" +
                          std::to_string(g.ordinal) + " and " + f.source + "#" +
                          std::to_string(f.ordinal));
    }
  }

  struct UserAcc {
    std::optional<Date> join;
    Date first_post = Date::max();
    std::string name;
  };
  std::map<std::string, UserAcc> users;
  std::vector<RawPost> posts;
  posts.reserve(by_id.size());
  for (const auto& [id, f] : by_id) {
    std::string uid = f->user_id.value_or("");
    if (!uid.empty()) {
      auto& u = users[uid];
      u.first_post = std::min(u.first_post, day_of(f->timestamp));
      if (f->user_join_date) u.join = u.join ? std::min(*u.join, *f->user_join_date) : *f->user_join_date;
      if (f->user_name && u.name.empty()) u.name = *f->user_name;
    }
    posts.push_back({Post{id, f->thread_id, uid, f->timestamp, f->body, false}, std::nullopt});
  }
  std::sort(posts.begin(), posts.end(), [](const RawPost& a, const RawPost& b) {
    return std::tie(a.post.timestamp, a.post.id) < std::tie(b.post.timestamp, b.post.id);
  });
  std::vector<User> out_users;
  for (const auto& [uid, u] : users) {
    Date join = u.join ? std::min(*u.join, u.first_post) : u.first_post;
    out_users.push_back({uid, join, u.name});
  }
  return ForumCorpus::build(forum_name, language, std::move(out_users), std::move(posts));
}

struct HarvestResult {
  ForumCorpus corpus;
  std::vector<FragmentError> errors;
  std::vector<std::string> warnings;
  std::size_t pages = 0;
};

/// Parses every `*.html` / `*.htm` file in `dir` in name order.
inline HarvestResult harvest_directory(const std::string& dir, const HarvestConfig& cfg) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("harvest: '" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto ext = html::detail::lower(e.path().extension().string());
    if (e.is_regular_file() && (ext == ".html" || ext == ".htm")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw EmptyInputError("harvest: no .html files in '" + dir + "'");
  HarvestResult r;
  std::vector<PostFragment> fragments;
  for (const auto& f : files) {
    auto page = parse_page(read_file(f.string()), cfg, f.filename().string());
    fragments.insert(fragments.end(), page.fragments.begin(), page.fragments.end());
    r.errors.insert(r.errors.end(), page.errors.begin(), page.errors.end());
    r.warnings.insert(r.warnings.end(), page.warnings.begin(), page.warnings.end());
    ++r.pages;
  }
  r.corpus = assemble_corpus(fragments, cfg.forum_name, cfg.language);
  return r;
}

}  // namespace forumip
