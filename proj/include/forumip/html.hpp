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

// Lenient HTML tree builder and a small XPath subset over it.
//
// The tree builder never fails: unknown end tags are dropped, unclosed
// elements are closed by their ancestors' end tags or at end of input, and
// the usual implied end tags (p, li, td/th, tr, option, dt/dd) are honoured.
//
// Supported path grammar:
//
//   path      := ['/' | '//' | './' | './/'] step (('/' | '//') step)*
//   step      := (name | '*' | '.' | '..' | '@' name | 'text()') predicate*
//   predicate := '[' N ']'                       1-based position
//              | '[last()]'
//              | '[@attr]'                       attribute present
//              | '[@attr=' literal ']'           attribute equals
//              | '[contains(@attr,' literal ')]' attribute contains
//
// A path that does not start with '/' is relative to the context node.
// '@attr' and 'text()' may only be the final step and select strings.

#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forumip/common.hpp"

namespace forumip::html {

using NodeId = std::size_t;

struct Node {
  enum class Kind { kDocument, kElement, kText };
  Kind kind = Kind::kElement;
  std::string name;  ///< lowercase tag name for elements
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  ///< decoded text for text nodes
  NodeId parent = 0;
  std::vector<NodeId> children;

  const std::string* attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline void append_utf8(std::string& out, unsigned long cp) {
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

/// Decodes numeric references and the common named entities; anything
/// unrecognized is kept verbatim.
inline std::string decode_entities(std::string_view s) {
  static const std::pair<std::string_view, unsigned long> kNamed[] = {
      {"amp", '&'},     {"lt", '<'},       {"gt", '>'},       {"quot", '"'},
      {"apos", '\''},   {"nbsp", 0xA0},    {"copy", 0xA9},    {"reg", 0xAE},
      {"hellip", 0x2026}, {"mdash", 0x2014}, {"ndash", 0x2013}, {"laquo", 0xAB},
      {"raquo", 0xBB},  {"zwnj", 0x200C},  {"zwj", 0x200D},
  };
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    std::size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out += s[i++];
      continue;
    }
    std::string_view ent = s.substr(i + 1, semi - i - 1);
    std::optional<unsigned long> cp;
    if (!ent.empty() && ent[0] == '#') {
      bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
      std::string digits(ent.substr(hex ? 2 : 1));
      if (!digits.empty() &&
          std::all_of(digits.begin(), digits.end(), [&](char c) {
            return hex ? std::isxdigit(static_cast<unsigned char>(c)) != 0
                       : std::isdigit(static_cast<unsigned char>(c)) != 0;
          })) {
        cp = std::stoul(digits, nullptr, hex ? 16 : 10);
      }
    } else {
      for (const auto& [name, v] : kNamed) {
        if (name == ent) cp = v;
      }
    }
    if (!cp) {
      out += s[i++];
      continue;
    }
    append_utf8(out, *cp);
    i = semi + 1;
  }
  return out;
}

inline bool is_void(std::string_view n) {
  static const std::set<std::string_view> kVoid = {"area", "base", "br",    "col",  "embed",
                                                   "hr",   "img",  "input", "link", "meta",
                                                   "param", "source", "track", "wbr"};
  return kVoid.count(n) > 0;
}

inline bool is_raw_text(std::string_view n) {
  return n == "script" || n == "style" || n == "textarea" || n == "title";
}

inline bool closes_paragraph(std::string_view n) {
  static const std::set<std::string_view> kBlock = {
      "address", "article", "aside", "blockquote", "div", "dl", "fieldset", "footer",
      "form",    "h1",      "h2",    "h3",         "h4",  "h5", "h6",       "header",
      "hr",      "main",    "nav",   "ol",         "p",   "pre", "section", "table", "ul"};
  return kBlock.count(n) > 0;
}

inline bool breaks_words(std::string_view n) {
  static const std::set<std::string_view> kBreak = {"br", "li", "dd", "dt", "td", "th", "tr",
                                                    "caption", "option"};
  return kBreak.count(n) > 0 || closes_paragraph(n);
}

}  // namespace detail

class Document {
 public:
  static Document parse(std::string_view html);

  NodeId root() const { return 0; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

  /// Concatenated descendant text with runs of whitespace collapsed to a
  /// single space and the ends trimmed. <br>, list items, table cells and
  /// block boundaries count as whitespace.
  std::string text_content(NodeId id) const {
    std::string raw;
    collect_text(id, raw);
    std::string out;
    bool space = false;
    for (char c : raw) {
      if (c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f') {
        space = true;
        continue;
      }
      if (space && !out.empty()) out += ' ';
      space = false;
      out += c;
    }
    return out;
  }

  /// Text of the direct text children only, collapsed like text_content.
  std::string own_text(NodeId id) const {
    std::string raw;
    for (NodeId c : nodes_[id].children) {
      if (nodes_[c].kind == Node::Kind::kText) raw += nodes_[c].text;
    }
    Document tmp;
    tmp.nodes_.push_back({Node::Kind::kText, "", {}, raw, 0, {}});
    return tmp.text_content(0);
  }

 private:
  void collect_text(NodeId id, std::string& out) const {
    const Node& n = nodes_[id];
    if (n.kind == Node::Kind::kText) {
      out += n.text;
      return;
    }
    if (n.kind == Node::Kind::kElement && (n.name == "script" || n.name == "style")) return;
    bool brk = n.kind == Node::Kind::kElement && detail::breaks_words(n.name);
    if (brk) out += ' ';
    for (NodeId c : n.children) collect_text(c, out);
    if (brk) out += ' ';
  }

  NodeId add(Node n, std::vector<NodeId>& stack) {
    NodeId id = nodes_.size();
    n.parent = stack.back();
    nodes_.push_back(std::move(n));
    nodes_[stack.back()].children.push_back(id);
    return id;
  }

  std::vector<Node> nodes_;
};

inline Document Document::parse(std::string_view s) {
  Document doc;
  doc.nodes_.push_back({Node::Kind::kDocument, "#document", {}, {}, 0, {}});
  std::vector<NodeId> stack{0};
  auto top_name = [&]() -> const std::string& { return doc.nodes_[stack.back()].name; };
  auto has_open = [&](std::string_view name, std::initializer_list<std::string_view> scope) {
    for (std::size_t i = stack.size(); i-- > 1;) {
      const auto& n = doc.nodes_[stack[i]].name;
      if (n == name) return true;
      if (std::find(scope.begin(), scope.end(), n) != scope.end()) return false;
    }
    return false;
  };
  auto pop_to = [&](std::string_view name) {
    while (stack.size() > 1) {
      bool match = doc.nodes_[stack.back()].name == name;
      stack.pop_back();
      if (match) break;
    }
  };
  auto add_text = [&](std::string_view raw) {
    if (raw.empty()) return;
    Node t;
    t.kind = Node::Kind::kText;
    t.text = detail::decode_entities(raw);
    doc.add(std::move(t), stack);
  };

  std::size_t i = 0, text_start = 0;
  const std::size_t n = s.size();
  while (i < n) {
    if (s[i] != '<') {
      ++i;
      continue;
    }
    // Comments, doctype, processing instructions.
    if (s.substr(i, 4) == "<!--") {
      add_text(s.substr(text_start, i - text_start));
      std::size_t e = s.find("-->", i + 4);
      i = e == std::string_view::npos ? n : e + 3;
      text_start = i;
      continue;
    }
    if (i + 1 < n && (s[i + 1] == '!' || s[i + 1] == '?')) {
      add_text(s.substr(text_start, i - text_start));
      std::size_t e = s.find('>', i);
      i = e == std::string_view::npos ? n : e + 1;
      text_start = i;
      continue;
    }
    bool end_tag = i + 1 < n && s[i + 1] == '/';
    std::size_t p = i + (end_tag ? 2 : 1);
    if (p >= n || !std::isalpha(static_cast<unsigned char>(s[p]))) {
      ++i;  // a literal '<'
      continue;
    }
    add_text(s.substr(text_start, i - text_start));
    std::size_t name_start = p;
    while (p < n && (std::isalnum(static_cast<unsigned char>(s[p])) || s[p] == '-' ||
                     s[p] == ':' || s[p] == '_')) {
      ++p;
    }
    std::string name = detail::lower(s.substr(name_start, p - name_start));
    std::vector<std::pair<std::string, std::string>> attrs;
    bool self_closing = false;
    while (p < n && s[p] != '>') {
      if (std::isspace(static_cast<unsigned char>(s[p]))) {
        ++p;
        continue;
      }
      if (s[p] == '/') {
        self_closing = true;
        ++p;
        continue;
      }
      std::size_t an = p;
      while (p < n && !std::isspace(static_cast<unsigned char>(s[p])) && s[p] != '=' &&
             s[p] != '>' && s[p] != '/') {
        ++p;
      }
      std::string key = detail::lower(s.substr(an, p - an));
      while (p < n && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
      std::string value;
      if (p < n && s[p] == '=') {
        ++p;
        while (p < n && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
        if (p < n && (s[p] == '"' || s[p] == '\'')) {
          char q = s[p++];
          std::size_t vs = p;
          while (p < n && s[p] != q) ++p;
          value = detail::decode_entities(s.substr(vs, p - vs));
          if (p < n) ++p;
        } else {
          std::size_t vs = p;
          while (p < n && !std::isspace(static_cast<unsigned char>(s[p])) && s[p] != '>') ++p;
          value = detail::decode_entities(s.substr(vs, p - vs));
        }
      }
      if (!key.empty()) attrs.emplace_back(std::move(key), std::move(value));
      self_closing = false;
    }
    i = p < n ? p + 1 : n;
    text_start = i;

    if (end_tag) {
      if (name == "br") {
        Node br;
        br.name = "br";
        doc.add(std::move(br), stack);
        continue;
      }
      for (std::size_t k = stack.size(); k-- > 1;) {
        if (doc.nodes_[stack[k]].name == name) {
          stack.resize(k);
          break;
        }
      }
      continue;
    }

    // Implied end tags.
    if (detail::closes_paragraph(name) && has_open("p", {"div", "td", "th", "li", "table", "body"})) {
      pop_to("p");
    }
    if (name == "li" && has_open("li", {"ul", "ol"})) pop_to("li");
    if ((name == "dt" || name == "dd")) {
      if (has_open("dt", {"dl"})) pop_to("dt");
      if (has_open("dd", {"dl"})) pop_to("dd");
    }
    if (name == "option" && top_name() == "option") pop_to("option");
    if (name == "td" || name == "th") {
      if (has_open("td", {"tr", "table"})) pop_to("td");
      if (has_open("th", {"tr", "table"})) pop_to("th");
    }
    if (name == "tr") {
      if (has_open("td", {"tr", "table"})) pop_to("td");
      if (has_open("th", {"tr", "table"})) pop_to("th");
      if (has_open("tr", {"table"})) pop_to("tr");
    }

    Node el;
    el.name = name;
    el.attributes = std::move(attrs);
    NodeId id = doc.add(std::move(el), stack);
    if (detail::is_void(name) || self_closing) continue;
    if (detail::is_raw_text(name)) {
      std::size_t close = i;
      std::string needle = "</" + name;
      while (true) {
        close = s.find("</", close);
        if (close == std::string_view::npos) break;
        if (detail::lower(s.substr(close, needle.size())) == needle) break;
        close += 2;
      }
      std::size_t content_end = close == std::string_view::npos ? n : close;
      if (content_end > i) {
        Node t;
        t.kind = Node::Kind::kText;
        t.text = name == "title" || name == "textarea"
                     ? detail::decode_entities(s.substr(i, content_end - i))
                     : std::string(s.substr(i, content_end - i));
        t.parent = id;
        doc.nodes_.push_back(std::move(t));
        doc.nodes_[id].children.push_back(doc.nodes_.size() - 1);
      }
      if (close == std::string_view::npos) {
        i = n;
      } else {
        std::size_t gt = s.find('>', close);
        i = gt == std::string_view::npos ? n : gt + 1;
      }
      text_start = i;
      continue;
    }
    stack.push_back(id);
  }
  add_text(s.substr(text_start, n - text_start));
  return doc;
}

// ---------------------------------------------------------------------------
// Path expressions

class PathError : public ParseError {
 public:
  explicit PathError(const std::string& what) : ParseError(what, 0) {}
};

class Path {
 public:
  enum class Axis { kChild, kDescendant, kSelf, kParent };
  enum class Terminal { kNone, kAttribute, kText };

  struct Predicate {
    enum class Kind { kIndex, kLast, kHasAttr, kAttrEquals, kAttrContains } kind;
    std::size_t index = 0;
    std::string attr;
    std::string value;
  };

  struct Step {
    Axis axis = Axis::kChild;
    std::string name;  ///< "*" for any element
    std::vector<Predicate> predicates;
  };

  static Path compile(std::string_view expr);

  bool absolute() const { return absolute_; }
  Terminal terminal() const { return terminal_; }
  const std::string& source() const { return source_; }

  /// Matching element nodes in document order. For string-valued paths the
  /// nodes owning the selected attribute or text.
  std::vector<NodeId> select(const Document& doc, NodeId context) const;

  /// Attribute values, own text, or text content of each selected node.
  std::vector<std::string> select_strings(const Document& doc, NodeId context) const {
    std::vector<std::string> out;
    for (NodeId id : select(doc, context)) {
      const Node& nd = doc.node(id);
      switch (terminal_) {
        case Terminal::kAttribute:
          if (const auto* v = nd.attribute(terminal_name_)) out.push_back(*v);
          break;
        case Terminal::kText:
          out.push_back(doc.own_text(id));
          break;
        case Terminal::kNone:
          out.push_back(doc.text_content(id));
          break;
      }
    }
    return out;
  }

  /// First selected string, if any.
  std::optional<std::string> first_string(const Document& doc, NodeId context) const {
    auto v = select_strings(doc, context);
    if (v.empty()) return std::nullopt;
    return v.front();
  }

 private:
  static bool matches(const Node& n, const std::string& name) {
    return n.kind == Node::Kind::kElement && (name == "*" || n.name == name);
  }
  static bool check(const Node& n, const Predicate& p) {
    const std::string* v = n.attribute(p.attr);
    switch (p.kind) {
      case Predicate::Kind::kHasAttr: return v != nullptr;
      case Predicate::Kind::kAttrEquals: return v && *v == p.value;
      case Predicate::Kind::kAttrContains: return v && v->find(p.value) != std::string::npos;
      default: return true;
    }
  }
  static std::vector<NodeId> apply_predicates(const Document& doc, std::vector<NodeId> nodes,
                                              const std::vector<Predicate>& preds) {
    for (const auto& p : preds) {
      std::vector<NodeId> kept;
      if (p.kind == Predicate::Kind::kIndex) {
        if (p.index >= 1 && p.index <= nodes.size()) kept.push_back(nodes[p.index - 1]);
      } else if (p.kind == Predicate::Kind::kLast) {
        if (!nodes.empty()) kept.push_back(nodes.back());
      } else {
        for (NodeId id : nodes) {
          if (check(doc.node(id), p)) kept.push_back(id);
        }
      }
      nodes = std::move(kept);
    }
    return nodes;
  }
  static void descendants_or_self(const Document& doc, NodeId id, std::vector<NodeId>& out) {
    out.push_back(id);
    for (NodeId c : doc.node(id).children) descendants_or_self(doc, c, out);
  }

  std::string source_;
  bool absolute_ = false;
  std::vector<Step> steps_;
  Terminal terminal_ = Terminal::kNone;
  std::string terminal_name_;
};

inline Path Path::compile(std::string_view expr) {
  Path path;
  path.source_ = std::string(expr);
  std::string_view s = expr;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) throw PathError("empty path expression");
  std::size_t i = 0;
  Axis next_axis = Axis::kChild;
  if (s.substr(0, 2) == "//") {
    path.absolute_ = true;
    next_axis = Axis::kDescendant;
    i = 2;
  } else if (s[0] == '/') {
    path.absolute_ = true;
    i = 1;
  }
  auto fail = [&](const std::string& why) {
    return PathError("bad path '" + std::string(expr) + "': " + why);
  };
  auto read_literal = [&](std::size_t& p) {
    if (p >= s.size() || (s[p] != '\'' && s[p] != '"')) throw fail("expected quoted literal");
    char q = s[p++];
    std::size_t e = s.find(q, p);
    if (e == std::string_view::npos) throw fail("unterminated literal");
    std::string v(s.substr(p, e - p));
    p = e + 1;
    return v;
  };
  auto read_name = [&](std::size_t& p) {
    std::size_t st = p;
    while (p < s.size() && (std::isalnum(static_cast<unsigned char>(s[p])) || s[p] == '-' ||
                            s[p] == '_' || s[p] == ':')) {
      ++p;
    }
    if (p == st) throw fail("expected a name");
    return detail::lower(s.substr(st, p - st));
  };

  while (i < s.size()) {
    if (path.terminal_ != Terminal::kNone) throw fail("@attr and text() must be the last step");
    Step step;
    step.axis = next_axis;
    if (s.substr(i, 2) == "..") {
      step.axis = Axis::kParent;
      step.name = "*";
      i += 2;
    } else if (s[i] == '.') {
      step.axis = next_axis == Axis::kDescendant ? Axis::kDescendant : Axis::kSelf;
      step.name = "*";
      ++i;
      if (step.axis == Axis::kDescendant) throw fail("'//.' is not supported");
    } else if (s[i] == '@') {
      ++i;
      path.terminal_ = Terminal::kAttribute;
      path.terminal_name_ = read_name(i);
      if (next_axis == Axis::kDescendant) {
        step.axis = Axis::kDescendant;
        step.name = "*";
        step.predicates.push_back({Predicate::Kind::kHasAttr, 0, path.terminal_name_, {}});
      } else {
        step.axis = Axis::kSelf;
        step.name = "*";
      }
    } else if (s.substr(i, 6) == "text()") {
      i += 6;
      path.terminal_ = Terminal::kText;
      if (next_axis == Axis::kDescendant) throw fail("'//text()' is not supported");
      step.axis = Axis::kSelf;
      step.name = "*";
    } else if (s[i] == '*') {
      step.name = "*";
      ++i;
    } else {
      step.name = read_name(i);
    }
    while (i < s.size() && s[i] == '[') {
      ++i;
      Predicate p{};
      if (std::isdigit(static_cast<unsigned char>(s[i]))) {
        std::size_t st = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        p.kind = Predicate::Kind::kIndex;
        p.index = std::stoul(std::string(s.substr(st, i - st)));
      } else if (s.substr(i, 6) == "last()") {
        p.kind = Predicate::Kind::kLast;
        i += 6;
      } else if (s[i] == '@') {
        ++i;
        p.attr = read_name(i);
        if (i < s.size() && s[i] == '=') {
          ++i;
          p.kind = Predicate::Kind::kAttrEquals;
          p.value = read_literal(i);
        } else {
          p.kind = Predicate::Kind::kHasAttr;
        }
      } else if (s.substr(i, 10) == "contains(@") {
        i += 10;
        p.kind = Predicate::Kind::kAttrContains;
        p.attr = read_name(i);
        while (i < s.size() && s[i] == ' ') ++i;
        if (i >= s.size() || s[i] != ',') throw fail("expected ',' in contains()");
        ++i;
        while (i < s.size() && s[i] == ' ') ++i;
        p.value = read_literal(i);
        if (i >= s.size() || s[i] != ')') throw fail("expected ')' after contains()");
        ++i;
      } else {
        throw fail("unsupported predicate");
      }
      if (i >= s.size() || s[i] != ']') throw fail("expected ']'");
      ++i;
      step.predicates.push_back(std::move(p));
    }
    path.steps_.push_back(std::move(step));
    if (i >= s.size()) break;
    if (s.substr(i, 2) == "//") {
      next_axis = Axis::kDescendant;
      i += 2;
    } else if (s[i] == '/') {
      next_axis = Axis::kChild;
      i += 1;
    } else {
      throw fail("unexpected character '" + std::string(1, s[i]) + "'");
    }
    if (i >= s.size()) throw fail("trailing '/'");
  }
  if (path.steps_.empty()) throw fail("no steps");
  return path;
}

inline std::vector<NodeId> Path::select(const Document& doc, NodeId context) const {
  std::vector<NodeId> current{absolute_ ? doc.root() : context};
  for (const auto& step : steps_) {
    std::vector<NodeId> next;
    for (NodeId ctx : current) {
      switch (step.axis) {
        case Axis::kSelf: {
          auto r = apply_predicates(doc, {ctx}, step.predicates);
          next.insert(next.end(), r.begin(), r.end());
          break;
        }
        case Axis::kParent: {
          if (ctx != doc.root()) {
            auto r = apply_predicates(doc, {doc.node(ctx).parent}, step.predicates);
            next.insert(next.end(), r.begin(), r.end());
          }
          break;
        }
        case Axis::kChild:
        case Axis::kDescendant: {
          std::vector<NodeId> bases;
          if (step.axis == Axis::kChild) {
            bases.push_back(ctx);
          } else {
            descendants_or_self(doc, ctx, bases);
          }
          for (NodeId b : bases) {
            std::vector<NodeId> kids;
            for (NodeId c : doc.node(b).children) {
              if (matches(doc.node(c), step.name)) kids.push_back(c);
            }
            auto r = apply_predicates(doc, std::move(kids), step.predicates);
            next.insert(next.end(), r.begin(), r.end());
          }
          break;
        }
      }
    }
    // Node ids are assigned in document order.
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    current = std::move(next);
  }
  return current;
}

}  // namespace forumip::html
