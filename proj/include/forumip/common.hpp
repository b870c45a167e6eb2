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

#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace forumip {

/// Version stamped into every artifact this library writes.
inline constexpr int kSchemaVersion = 1;

/// Process exit codes used by the command line driver.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kNumerical = 4,
};

/// Base of all library errors; carries the exit code the CLI maps it to.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ExitCode code = ExitCode::kData)
      : std::runtime_error(what), code_(code) {}
  ExitCode exit_code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(what, ExitCode::kUsage) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what, ExitCode::kData) {}
};

/// Malformed input text; `line` is 1-based, 0 when unknown.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Referential or structural invariant violated by otherwise parseable data.
class IntegrityError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyInputError : public DataError {
 public:
  using DataError::DataError;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class PreconditionError : public DataError {
 public:
  using DataError::DataError;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(what, ExitCode::kNumerical) {}
};

// ---------------------------------------------------------------------------
// Calendar helpers. All timestamps are UTC seconds.

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

namespace detail {

inline bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len,
                            int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace detail

/// Parses `YYYY-MM-DD`.
inline Date parse_iso_date(std::string_view s) {
  int y = 0, m = 0, d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
      !detail::parse_fixed_int(s, 0, 4, y) ||
      !detail::parse_fixed_int(s, 5, 2, m) ||
      !detail::parse_fixed_int(s, 8, 2, d)) {
    throw ParseError("invalid ISO-8601 date '" + std::string(s) + "'", 0);
  }
  std::chrono::year_month_day ymd{std::chrono::year{y},
                                  std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw ParseError("invalid calendar date '" + std::string(s) + "'", 0);
  }
  return Date{ymd};
}

/// Parses `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS][.fff][Z|+HH:MM|-HH:MM]`
/// (a space may replace `T`). Date-only values map to 00:00:00 UTC and
/// values without an offset are taken as UTC.
inline Timestamp parse_iso_datetime(std::string_view s) {
  auto fail = [&]() -> ParseError {
    return ParseError("invalid ISO-8601 timestamp '" + std::string(s) + "'", 0);
  };
  if (s.size() < 10) throw fail();
  Date day;
  try {
    day = parse_iso_date(s.substr(0, 10));
  } catch (const ParseError&) {
    throw fail();
  }
  if (s.size() == 10) return Timestamp{day};
  if (s[10] != 'T' && s[10] != ' ') throw fail();
  int hh = 0, mm = 0, ss = 0;
  std::size_t pos = 11;
  if (!detail::parse_fixed_int(s, pos, 2, hh) || pos + 2 >= s.size() ||
      s[pos + 2] != ':' || !detail::parse_fixed_int(s, pos + 3, 2, mm)) {
    throw fail();
  }
  pos += 5;
  if (pos < s.size() && s[pos] == ':') {
    if (!detail::parse_fixed_int(s, pos + 1, 2, ss)) throw fail();
    pos += 3;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) throw fail();
  long offset_seconds = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      pos += 1;
    } else if ((s[pos] == '+' || s[pos] == '-') && pos + 6 == s.size() &&
               s[pos + 3] == ':') {
      int oh = 0, om = 0;
      if (!detail::parse_fixed_int(s, pos + 1, 2, oh) ||
          !detail::parse_fixed_int(s, pos + 4, 2, om)) {
        throw fail();
      }
      offset_seconds = (oh * 3600L + om * 60L) * (s[pos] == '+' ? 1 : -1);
      pos += 6;
    } else {
      throw fail();
    }
  }
  auto local = Timestamp{day} + std::chrono::hours{hh} +
               std::chrono::minutes{mm} + std::chrono::seconds{ss};
  return local - std::chrono::seconds{offset_seconds};
}

inline std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

inline Date day_of(Timestamp ts) {
  return std::chrono::floor<std::chrono::days>(ts);
}

/// `YYYY-MM-DDTHH:MM:SSZ`
inline std::string format_datetime(Timestamp ts) {
  Date d = day_of(ts);
  std::chrono::hh_mm_ss hms{ts - Timestamp{d}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02ld:%02ld:%02ldZ", format_date(d).c_str(),
                static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

/// Signed calendar-day difference `later - earlier`.
inline long days_between(Date earlier, Date later) {
  return static_cast<long>((later - earlier).count());
}

inline int year_of(Timestamp ts) {
  return static_cast<int>(std::chrono::year_month_day{day_of(ts)}.year());
}

/// `YYYY-MM`
inline std::string year_month_of(Timestamp ts) {
  std::chrono::year_month_day ymd{day_of(ts)};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()));
  return buf;
}

// ---------------------------------------------------------------------------
// File helpers.

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("short write to '" + path + "'");
}

/// 1-based line number of byte `offset` within `text`.
inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace forumip
