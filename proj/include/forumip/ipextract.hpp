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

// IPv4 mention extraction from post bodies.
//
// A mention is a dotted quad `D.D.D.D` (each D one to three ASCII digits,
// value <= 255) that is not glued to surrounding text:
//   - the byte before it is not an ASCII letter, digit or '.';
//   - the byte after it is not an ASCII letter or digit, and is not a '.'
//     followed by a digit (so "1.2.3.4.5" is a version string, while a
//     sentence-final "1.2.3.4." is still a mention).

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "forumip/common.hpp"
#include "forumip/corpus.hpp"
#include "forumip/stats.hpp"

namespace forumip {

class Ipv4 {
 public:
  constexpr Ipv4() = default;
  constexpr explicit Ipv4(std::uint32_t v) : value_(v) {}
  constexpr Ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
      : value_((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) |
               (std::uint32_t{c} << 8) | std::uint32_t{d}) {}

  constexpr std::uint32_t value() const { return value_; }
  constexpr std::uint8_t octet(int i) const {
    return static_cast<std::uint8_t>(value_ >> (24 - 8 * i));
  }

  /// Strict dotted-quad parse of the whole string.
  static std::optional<Ipv4> parse(std::string_view s) {
    std::uint32_t v = 0;
    std::size_t pos = 0;
    for (int k = 0; k < 4; ++k) {
      if (k > 0) {
        if (pos >= s.size() || s[pos] != '.') return std::nullopt;
        ++pos;
      }
      std::size_t start = pos;
      unsigned octet = 0;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9' && pos - start < 3) {
        octet = octet * 10 + static_cast<unsigned>(s[pos] - '0');
        ++pos;
      }
      if (pos == start || octet > 255) return std::nullopt;
      v = (v << 8) | octet;
    }
    if (pos != s.size()) return std::nullopt;
    return Ipv4(v);
  }

  std::string to_string() const {
    return std::to_string(octet(0)) + "." + std::to_string(octet(1)) + "." +
           std::to_string(octet(2)) + "." + std::to_string(octet(3));
  }

  constexpr auto operator<=>(const Ipv4&) const = default;

 private:
  std::uint32_t value_ = 0;
};

inline Ipv4 parse_ipv4_or_throw(std::string_view s) {
  auto ip = Ipv4::parse(s);
  if (!ip) throw ParseError("invalid IPv4 address '" + std::string(s) + "'", 0);
  return *ip;
}

enum class IpScope { kPublic, kPrivate, kReserved, kLoopback };

inline std::string_view to_string(IpScope s) {
  switch (s) {
    case IpScope::kPublic: return "public";
    case IpScope::kPrivate: return "private";
    case IpScope::kReserved: return "reserved";
    case IpScope::kLoopback: return "loopback";
  }
  return "public";
}

/// Scope per the RFC 1918 / RFC 5735 special-use tables.
inline IpScope classify_ip_scope(Ipv4 ip) {
  struct Block {
    std::uint32_t base;
    int prefix;
    IpScope scope;
  };
  static constexpr std::array<Block, 16> kBlocks{{
      {Ipv4(127, 0, 0, 0).value(), 8, IpScope::kLoopback},
      {Ipv4(10, 0, 0, 0).value(), 8, IpScope::kPrivate},
      {Ipv4(172, 16, 0, 0).value(), 12, IpScope::kPrivate},
      {Ipv4(192, 168, 0, 0).value(), 16, IpScope::kPrivate},
      {Ipv4(0, 0, 0, 0).value(), 8, IpScope::kReserved},
      {Ipv4(100, 64, 0, 0).value(), 10, IpScope::kReserved},
      {Ipv4(169, 254, 0, 0).value(), 16, IpScope::kReserved},
      {Ipv4(192, 0, 0, 0).value(), 24, IpScope::kReserved},
      {Ipv4(192, 0, 2, 0).value(), 24, IpScope::kReserved},
      {Ipv4(192, 88, 99, 0).value(), 24, IpScope::kReserved},
      {Ipv4(198, 18, 0, 0).value(), 15, IpScope::kReserved},
      {Ipv4(198, 51, 100, 0).value(), 24, IpScope::kReserved},
      {Ipv4(203, 0, 113, 0).value(), 24, IpScope::kReserved},
      {Ipv4(224, 0, 0, 0).value(), 4, IpScope::kReserved},
      {Ipv4(240, 0, 0, 0).value(), 4, IpScope::kReserved},
      {Ipv4(255, 255, 255, 255).value(), 32, IpScope::kReserved},
  }};
  for (const auto& b : kBlocks) {
    std::uint32_t mask = b.prefix == 0 ? 0 : ~std::uint32_t{0} << (32 - b.prefix);
    if ((ip.value() & mask) == b.base) return b.scope;
  }
  return IpScope::kPublic;
}

struct IpMention {
  Ipv4 ip;
  std::string post_id;
  std::size_t byte_offset = 0;
  std::size_t byte_length = 0;
  Timestamp timestamp{};
  std::string forum;
  std::string context_window;

  bool operator==(const IpMention&) const = default;
};

namespace detail {

inline bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ascii_alnum(char c) {
  return is_ascii_digit(c) || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

/// Moves `pos` back/forward to the nearest UTF-8 lead byte.
inline std::size_t utf8_floor(std::string_view s, std::size_t pos) {
  while (pos > 0 && pos < s.size() &&
         (static_cast<unsigned char>(s[pos]) & 0xC0) == 0x80) {
    --pos;
  }
  return pos;
}

}  // namespace detail

/// Token spans `[offset, offset + length)` of every mention, by offset.
inline std::vector<std::pair<std::size_t, std::size_t>> find_ipv4_spans(
    std::string_view body) {
  using detail::is_ascii_alnum;
  using detail::is_ascii_digit;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t n = body.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_ascii_digit(body[i]) ||
        (i > 0 && (is_ascii_alnum(body[i - 1]) || body[i - 1] == '.'))) {
      ++i;
      continue;
    }
    std::size_t pos = i;
    bool ok = true;
    for (int k = 0; k < 4 && ok; ++k) {
      if (k > 0) {
        if (pos < n && body[pos] == '.') {
          ++pos;
        } else {
          ok = false;
          break;
        }
      }
      std::size_t start = pos;
      unsigned value = 0;
      while (pos < n && is_ascii_digit(body[pos])) {
        if (pos - start < 3) value = value * 10 + static_cast<unsigned>(body[pos] - '0');
        ++pos;
      }
      std::size_t len = pos - start;
      if (len == 0 || len > 3 || value > 255) ok = false;
    }
    if (ok && pos < n) {
      if (is_ascii_alnum(body[pos])) ok = false;
      if (body[pos] == '.' && pos + 1 < n && is_ascii_digit(body[pos + 1])) ok = false;
    }
    if (ok) {
      out.emplace_back(i, pos - i);
      i = pos;
    } else {
      // Skip the rest of this digit run; its tail cannot start a mention.
      while (i < n && is_ascii_digit(body[i])) ++i;
    }
  }
  return out;
}

inline constexpr std::size_t kContextRadius = 60;

inline std::vector<IpMention> extract_ips(const Post& post,
                                          std::string_view forum = {}) {
  std::vector<IpMention> out;
  const std::string_view body = post.body;
  for (auto [off, len] : find_ipv4_spans(body)) {
    IpMention m;
    m.ip = *Ipv4::parse(body.substr(off, len));
    m.post_id = post.id;
    m.byte_offset = off;
    m.byte_length = len;
    m.timestamp = post.timestamp;
    m.forum = std::string(forum);
    std::size_t lo = detail::utf8_floor(body, off > kContextRadius ? off - kContextRadius : 0);
    std::size_t hi = std::min(body.size(), off + len + kContextRadius);
    hi = detail::utf8_floor(body, hi);
    m.context_window = std::string(body.substr(lo, hi - lo));
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<IpMention> extract_ips(const ForumCorpus& corpus) {
  std::vector<IpMention> out;
  for (const auto& p : corpus.posts()) {
    auto ms = extract_ips(p, corpus.forum_name());
    out.insert(out.end(), std::make_move_iterator(ms.begin()),
               std::make_move_iterator(ms.end()));
  }
  return out;
}

/// Distribution of mention counts over posts with at least one mention.
inline CountDistribution ip_per_post_stats(const std::vector<IpMention>& mentions) {
  std::map<std::pair<std::string, std::string>, std::uint64_t> per_post;
  for (const auto& m : mentions) ++per_post[{m.forum, m.post_id}];
  std::vector<std::uint64_t> counts;
  counts.reserve(per_post.size());
  for (const auto& [k, v] : per_post) counts.push_back(v);
  return CountDistribution(std::move(counts));
}

// JSON-lines record: {ip, post, offset, len, ts, forum, scope}.
inline nlohmann::json to_json(const IpMention& m) {
  return {{"ip", m.ip.to_string()},
          {"post", m.post_id},
          {"offset", m.byte_offset},
          {"len", m.byte_length},
          {"ts", format_datetime(m.timestamp)},
          {"forum", m.forum},
          {"scope", to_string(classify_ip_scope(m.ip))}};
}

inline IpMention mention_from_json(const nlohmann::json& j) {
  IpMention m;
  try {
    m.ip = parse_ipv4_or_throw(j.at("ip").get<std::string>());
    m.post_id = j.at("post").get<std::string>();
    m.byte_offset = j.at("offset").get<std::size_t>();
    m.timestamp = parse_iso_datetime(j.at("ts").get<std::string>());
    m.forum = j.value("forum", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("mention record: ") + e.what());
  }
  m.byte_length = j.value("len", m.ip.to_string().size());
  return m;
}

inline std::string mentions_to_jsonl(const std::vector<IpMention>& ms) {
  std::string out;
  for (const auto& m : ms) {
    out += to_json(m).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<IpMention> mentions_from_jsonl(std::string_view text) {
  std::vector<IpMention> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    try {
      out.push_back(mention_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed mention record: ") + e.what(), line_no);
    }
  }
  return out;
}

}  // namespace forumip
