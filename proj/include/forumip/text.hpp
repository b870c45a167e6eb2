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

// Language-agnostic tokenization: split on anything that is not a letter,
// a combining mark or a decimal digit, then apply Unicode default case
// folding. No stemming; works the same on English and Farsi text.

#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "forumip/common.hpp"

namespace forumip {

struct TokenizerOptions {
  /// Tokens made only of digits (IP octets, years, versions) are dropped
  /// unless this is set.
  bool keep_numeric = false;
};

namespace detail {

inline bool is_token_char(UChar32 c) {
  if (c < 0) return false;
  if (u_hasBinaryProperty(c, UCHAR_ALPHABETIC)) return true;
  if (u_isdigit(c)) return true;
  auto cat = u_charType(c);
  return cat == U_NON_SPACING_MARK || cat == U_COMBINING_SPACING_MARK;
}

inline std::string fold_case(std::string_view s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.foldCase(U_FOLD_CASE_DEFAULT);
  std::string out;
  u.toUTF8String(out);
  return out;
}

}  // namespace detail

inline std::vector<std::string> tokenize(std::string_view text,
                                         const TokenizerOptions& opts = {}) {
  std::vector<std::string> out;
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const int32_t n = static_cast<int32_t>(text.size());
  int32_t i = 0;
  int32_t start = -1;
  bool all_digits = true;
  auto flush = [&](int32_t end) {
    if (start >= 0 && end > start) {
      if (!all_digits || opts.keep_numeric) {
        out.push_back(detail::fold_case(text.substr(start, end - start)));
      }
    }
    start = -1;
    all_digits = true;
  };
  while (i < n) {
    int32_t here = i;
    UChar32 c;
    U8_NEXT(s, i, n, c);
    if (detail::is_token_char(c)) {
      if (start < 0) start = here;
      if (!u_isdigit(c)) all_digits = false;
    } else {
      flush(here);
    }
  }
  flush(n);
  return out;
}

/// Number of Unicode code points (invalid bytes count as one each).
inline std::size_t char_length(std::string_view text) {
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const int32_t n = static_cast<int32_t>(text.size());
  int32_t i = 0;
  std::size_t count = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(s, i, n, c);
    ++count;
  }
  return count;
}

using StopWords = std::unordered_set<std::string>;

inline const StopWords& english_stopwords() {
  static const StopWords kWords = {
      "a", "about", "above", "after", "again", "against", "all", "am", "an",
      "and", "any", "are", "as", "at", "be", "because", "been", "before",
      "being", "below", "between", "both", "but", "by", "can", "could", "did",
      "do", "does", "doing", "down", "during", "each", "few", "for", "from",
      "further", "had", "has", "have", "having", "he", "her", "here", "hers",
      "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is",
      "it", "its", "itself", "just", "me", "more", "most", "my", "myself", "no",
      "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other",
      "our", "ours", "ourselves", "out", "over", "own", "same", "she", "should",
      "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
      "themselves", "then", "there", "these", "they", "this", "those", "through",
      "to", "too", "under", "until", "up", "very", "was", "we", "were", "what",
      "when", "where", "which", "while", "who", "whom", "why", "will", "with",
      "would", "you", "your", "yours", "yourself", "yourselves", "s", "t", "don",
      "im", "ive", "also", "get", "got"};
  return kWords;
}

inline const StopWords& farsi_stopwords() {
  static const StopWords kWords = {
      "و", "در", "به", "از", "که", "این", "را", "با", "است", "برای", "آن", "یک",
      "خود", "تا", "کرد", "بر", "هم", "نیز", "شد", "می", "ها", "های", "اما",
      "یا", "شده", "باید", "هر", "ما", "من", "تو", "او", "شما", "آنها", "ایشان",
      "بود", "باشد", "شود", "دارد", "کند", "اگر", "چه", "همه", "وی", "پس",
      "دیگر", "کنید", "کنم", "هست", "نه", "روی", "بین", "ولی", "چون", "حتی"};
  return kWords;
}

/// Bundled list for a language tag; unknown tags get an empty list.
inline const StopWords& stopwords_for(std::string_view language) {
  static const StopWords kNone;
  if (language == "en") return english_stopwords();
  if (language == "fa") return farsi_stopwords();
  return kNone;
}

/// One word per line; blank lines and lines starting with '#' ignored.
inline StopWords load_stopwords(const std::string& path) {
  StopWords out;
  std::string text = read_file(path);
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line[0] != '#') out.insert(detail::fold_case(line));
    start = end + 1;
  }
  return out;
}

/// Tokens of `text` with stop-words removed.
inline std::vector<std::string> content_tokens(std::string_view text,
                                               const StopWords& stop,
                                               const TokenizerOptions& opts = {}) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text, opts)) {
    if (!stop.count(t)) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace forumip
