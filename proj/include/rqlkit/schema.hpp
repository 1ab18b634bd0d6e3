// Copyright 2026 The rqlkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Information schemas: organ -> slot trees that define what a structured
// report may contain. A schema is both the annotation contract and the
// context string prepended to every model input.
//
// Schema file format (UTF-8, line oriented, '#' starts a comment):
//
//   version abdominopelvic-us-1
//   organ GB
//   slot seen = yes | no            # categorical
//   slot comment = *                # free text
//   slot stones :                   # composite
//     sub quantity = few | multiple # one nesting level per two spaces
//     sub size = *
//
// `organ`, `slot` and `version` lines start in column 1. `sub` lines are
// indented by two spaces per level below the enclosing `slot`.

#ifndef RQLKIT_SCHEMA_HPP_
#define RQLKIT_SCHEMA_HPP_

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rqlkit/error.hpp"
#include "rqlkit/text.hpp"

namespace rqlkit {

enum class SlotKind { kCategorical, kFreeText, kComposite };

// Maximum number of slot levels below an organ.
inline constexpr std::size_t kMaxSlotDepth = 6;

struct SlotNode {
  std::string name;
  SlotKind kind = SlotKind::kFreeText;
  std::vector<std::string> allowed_values;  // categorical only
  std::vector<SlotNode> children;           // composite only

  bool is_leaf() const { return kind != SlotKind::kComposite; }

  const SlotNode* find_child(std::string_view child) const {
    const std::string key = normalize(child);
    for (const auto& c : children)
      if (normalize(c.name) == key) return &c;
    return nullptr;
  }

  bool allows(std::string_view value) const {
    if (kind == SlotKind::kFreeText) return true;
    if (kind == SlotKind::kComposite) return false;
    const std::string key = normalize(value);
    return std::any_of(allowed_values.begin(), allowed_values.end(),
                       [&](const std::string& v) { return normalize(v) == key; });
  }

  friend bool operator==(const SlotNode&, const SlotNode&) = default;
};

struct OrganSchema {
  std::string name;
  std::vector<SlotNode> slots;

  const SlotNode* find_slot(std::string_view slot) const {
    const std::string key = normalize(slot);
    for (const auto& s : slots)
      if (normalize(s.name) == key) return &s;
    return nullptr;
  }

  friend bool operator==(const OrganSchema&, const OrganSchema&) = default;
};

struct SchemaSet {
  std::vector<OrganSchema> organs;
  std::string version;

  const OrganSchema* find_organ(std::string_view organ) const {
    const std::string key = normalize(organ);
    for (const auto& o : organs)
      if (normalize(o.name) == key) return &o;
    return nullptr;
  }

  friend bool operator==(const SchemaSet&, const SchemaSet&) = default;
};

// Ancestor chain from organ down to a leaf slot.
using KeyPath = std::vector<std::string>;

inline std::string path_string(const KeyPath& path) { return join(path, "/"); }

class SchemaError : public SourceError {
 public:
  enum class Kind { kSyntax, kDuplicate, kInvariant };

  SchemaError(Kind kind, const std::string& message, SourcePos pos = {})
      : SourceError(message, pos), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace schema_detail {

inline constexpr std::string_view kReservedNameChars = "{}()|=:,";
inline constexpr std::string_view kReservedValueChars = "{}()|,";

inline bool has_any(std::string_view s, std::string_view chars) {
  return s.find_first_of(chars) != std::string_view::npos;
}

inline void check_invariants(const SlotNode& node, std::size_t depth,
                             const std::string& where) {
  const std::string at = where + "/" + node.name;
  if (depth > kMaxSlotDepth)
    throw SchemaError(SchemaError::Kind::kInvariant,
                      "slot nesting deeper than " +
                          std::to_string(kMaxSlotDepth) + " at " + at);
  if (collapse_whitespace(node.name).empty())
    throw SchemaError(SchemaError::Kind::kInvariant, "empty slot name at " + at);
  switch (node.kind) {
    case SlotKind::kCategorical:
      if (node.allowed_values.empty() || !node.children.empty())
        throw SchemaError(SchemaError::Kind::kInvariant,
                          "categorical slot needs values and no children: " + at);
      break;
    case SlotKind::kFreeText:
      if (!node.allowed_values.empty() || !node.children.empty())
        throw SchemaError(SchemaError::Kind::kInvariant,
                          "free-text slot takes no values or children: " + at);
      break;
    case SlotKind::kComposite:
      if (node.children.empty() || !node.allowed_values.empty())
        throw SchemaError(SchemaError::Kind::kInvariant,
                          "composite slot needs children and no values: " + at);
      break;
  }
  for (std::size_t i = 0; i < node.allowed_values.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (normalize(node.allowed_values[i]) == normalize(node.allowed_values[j]))
        throw SchemaError(SchemaError::Kind::kDuplicate,
                          "duplicate value '" + node.allowed_values[i] +
                              "' in " + at);
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (normalize(node.children[i].name) == normalize(node.children[j].name))
        throw SchemaError(SchemaError::Kind::kDuplicate,
                          "duplicate slot '" + node.children[i].name + "' in " + at);
    check_invariants(node.children[i], depth + 1, at);
  }
}

}  // namespace schema_detail

// Throws SchemaError if `s` violates a structural invariant. Used for sets
// built in code; parse_schema() applies the same checks with positions.
inline void validate_schema(const SchemaSet& s) {
  using schema_detail::check_invariants;
  if (s.organs.empty())
    throw SchemaError(SchemaError::Kind::kInvariant,
                      "non-empty: at least one organ");
  for (std::size_t i = 0; i < s.organs.size(); ++i) {
    const auto& organ = s.organs[i];
    if (collapse_whitespace(organ.name).empty())
      throw SchemaError(SchemaError::Kind::kInvariant, "empty organ name");
    for (std::size_t j = 0; j < i; ++j)
      if (normalize(s.organs[j].name) == normalize(organ.name))
        throw SchemaError(SchemaError::Kind::kDuplicate,
                          "duplicate organ '" + organ.name + "'");
    if (organ.slots.empty())
      throw SchemaError(SchemaError::Kind::kInvariant,
                        "organ '" + organ.name + "' has no slots");
    for (std::size_t k = 0; k < organ.slots.size(); ++k) {
      for (std::size_t j = 0; j < k; ++j)
        if (normalize(organ.slots[j].name) == normalize(organ.slots[k].name))
          throw SchemaError(SchemaError::Kind::kDuplicate,
                            "duplicate slot '" + organ.slots[k].name +
                                "' in " + organ.name);
      check_invariants(organ.slots[k], 1, organ.name);
    }
  }
}

namespace schema_detail {

class Parser {
 public:
  explicit Parser(std::string_view source) : source_(source) {}

  SchemaSet run() {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= source_.size()) {
      std::size_t end = source_.find('\n', start);
      if (end == std::string_view::npos) end = source_.size();
      ++line_no;
      line(source_.substr(start, end - start), line_no);
      start = end + 1;
    }
    close_to(0);
    close_organ();
    if (set_.organs.empty())
      throw SchemaError(SchemaError::Kind::kInvariant,
                        "non-empty: at least one organ", {line_no, 1});
    return std::move(set_);
  }

 private:
  struct Open {
    SlotNode* node;
    SourcePos pos;
  };

  [[noreturn]] void fail(SchemaError::Kind kind, const std::string& msg,
                         SourcePos pos) {
    throw SchemaError(kind, msg, pos);
  }

  SourcePos pos_of(std::string_view part) const {
    return {line_no_, static_cast<std::size_t>(part.data() - line_.data()) + 1};
  }

  void line(std::string_view raw, std::size_t line_no) {
    line_ = raw;
    line_no_ = line_no;
    std::string_view text = raw.substr(0, raw.find('#'));
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (trim(text).empty()) return;

    std::size_t indent = 0;
    while (indent < text.size() && text[indent] == ' ') ++indent;
    if (text[indent] == '\t')
      fail(SchemaError::Kind::kSyntax, "tabs are not allowed in indentation",
           {line_no, indent + 1});
    if (indent % 2 != 0)
      fail(SchemaError::Kind::kSyntax, "indentation must be a multiple of two",
           {line_no, indent + 1});

    std::string_view body = trim(text.substr(indent));
    std::size_t kw_end = 0;
    while (kw_end < body.size() && !is_space(body[kw_end])) ++kw_end;
    const std::string_view keyword = body.substr(0, kw_end);
    const std::string_view rest = trim(body.substr(kw_end));
    const std::size_t level = indent / 2;

    if (keyword == "sub") {
      sub(rest, level, pos_of(keyword));
      return;
    }
    if (level != 0)
      fail(SchemaError::Kind::kSyntax,
           "only 'sub' lines may be indented", {line_no, 1});
    if (keyword == "version") {
      if (!set_.organs.empty() || seen_version_)
        fail(SchemaError::Kind::kSyntax,
             "'version' must appear once, before the first organ",
             pos_of(keyword));
      seen_version_ = true;
      set_.version = collapse_whitespace(rest);
    } else if (keyword == "organ") {
      organ(rest, pos_of(keyword));
    } else if (keyword == "slot") {
      slot(rest, pos_of(keyword));
    } else {
      fail(SchemaError::Kind::kSyntax,
           "expected 'organ', 'slot', 'sub' or 'version', got '" +
               std::string(keyword) + "'",
           pos_of(keyword));
    }
  }

  std::string name_at(std::string_view name, SourcePos at) {
    std::string n = collapse_whitespace(name);
    if (n.empty()) fail(SchemaError::Kind::kSyntax, "missing name", at);
    if (has_any(n, kReservedNameChars))
      fail(SchemaError::Kind::kSyntax,
           "name '" + n + "' contains a reserved character (one of " +
               std::string(kReservedNameChars) + ")",
           pos_of(name));
    return n;
  }

  void organ(std::string_view rest, SourcePos at) {
    close_to(0);
    close_organ();
    std::string name = name_at(rest, at);
    if (set_.find_organ(name) != nullptr)
      fail(SchemaError::Kind::kDuplicate, "duplicate organ '" + name + "'",
           pos_of(rest));
    set_.organs.push_back({std::move(name), {}});
    organ_pos_ = at;
  }

  SlotNode declaration(std::string_view rest, SourcePos at) {
    SlotNode node;
    const std::size_t eq = rest.find('=');
    if (eq != std::string_view::npos) {
      node.name = name_at(rest.substr(0, eq), at);
      const std::string_view rhs = trim(rest.substr(eq + 1));
      if (rhs == "*") {
        node.kind = SlotKind::kFreeText;
        return node;
      }
      node.kind = SlotKind::kCategorical;
      std::size_t start = 0;
      while (true) {
        std::size_t bar = rhs.find('|', start);
        std::string_view raw =
            rhs.substr(start, bar == std::string_view::npos ? rhs.npos : bar - start);
        std::string value = collapse_whitespace(raw);
        if (value.empty())
          fail(SchemaError::Kind::kSyntax, "empty value in value list",
               rhs.empty() ? pos_of(rest.substr(eq)) : pos_of(rhs.substr(start)));
        if (value == "*" || has_any(value, kReservedValueChars))
          fail(SchemaError::Kind::kSyntax,
               "value '" + value + "' contains a reserved character", pos_of(raw));
        if (node.allows(value))
          fail(SchemaError::Kind::kDuplicate, "duplicate value '" + value + "'",
               pos_of(raw));
        node.allowed_values.push_back(std::move(value));
        if (bar == std::string_view::npos) break;
        start = bar + 1;
      }
      return node;
    }
    if (!rest.empty() && rest.back() == ':') {
      node.name = name_at(rest.substr(0, rest.size() - 1), at);
      node.kind = SlotKind::kComposite;
      return node;
    }
    fail(SchemaError::Kind::kSyntax, "expected '=' or trailing ':' after slot name",
         rest.empty() ? at : pos_of(rest));
  }

  void slot(std::string_view rest, SourcePos at) {
    if (set_.organs.empty())
      fail(SchemaError::Kind::kSyntax, "'slot' before any 'organ'", at);
    close_to(0);
    SlotNode node = declaration(rest, at);
    auto& organ = set_.organs.back();
    if (organ.find_slot(node.name) != nullptr)
      fail(SchemaError::Kind::kDuplicate,
           "duplicate slot '" + node.name + "' in " + organ.name, pos_of(rest));
    organ.slots.push_back(std::move(node));
    open_.push_back({&organ.slots.back(), at});
  }

  void sub(std::string_view rest, std::size_t level, SourcePos at) {
    if (level == 0)
      fail(SchemaError::Kind::kSyntax, "'sub' must be indented", at);
    if (level >= kMaxSlotDepth)
      fail(SchemaError::Kind::kInvariant,
           "slot nesting deeper than " + std::to_string(kMaxSlotDepth), at);
    if (open_.size() < level)
      fail(SchemaError::Kind::kSyntax, "'sub' indented too deep for its parent",
           at);
    close_to(level);
    SlotNode* parent = open_.back().node;
    if (parent->kind != SlotKind::kComposite)
      fail(SchemaError::Kind::kInvariant,
           "'" + parent->name + "' is not composite (declare it with ':')", at);
    SlotNode node = declaration(rest, at);
    if (parent->find_child(node.name) != nullptr)
      fail(SchemaError::Kind::kDuplicate,
           "duplicate slot '" + node.name + "' under " + parent->name,
           pos_of(rest));
    parent->children.push_back(std::move(node));
    open_.push_back({&parent->children.back(), at});
  }

  // Pops open slots deeper than `level`, checking composites got children.
  void close_to(std::size_t level) {
    while (open_.size() > level) {
      const Open& o = open_.back();
      if (o.node->kind == SlotKind::kComposite && o.node->children.empty())
        fail(SchemaError::Kind::kInvariant,
             "composite slot '" + o.node->name + "' has no children", o.pos);
      open_.pop_back();
    }
  }

  void close_organ() {
    if (!set_.organs.empty() && set_.organs.back().slots.empty())
      fail(SchemaError::Kind::kInvariant,
           "organ '" + set_.organs.back().name + "' has no slots", organ_pos_);
  }

  std::string_view source_;
  std::string_view line_;
  std::size_t line_no_ = 0;
  SchemaSet set_;
  std::vector<Open> open_;
  SourcePos organ_pos_;
  bool seen_version_ = false;
};

inline void write_slot(std::string& out, const SlotNode& node, std::size_t level) {
  out += level == 0 ? std::string("slot ")
                    : std::string(level * 2, ' ') + "sub ";
  out += node.name;
  switch (node.kind) {
    case SlotKind::kCategorical:
      out += " = " + join(node.allowed_values, " | ");
      break;
    case SlotKind::kFreeText:
      out += " = *";
      break;
    case SlotKind::kComposite:
      out += " :";
      break;
  }
  out += '\n';
  for (const auto& c : node.children) write_slot(out, c, level + 1);
}

inline void linearize_slot(std::string& out, const SlotNode& node) {
  out += node.name;
  if (node.kind == SlotKind::kCategorical) {
    out += " ( " + join(node.allowed_values, " | ") + " )";
  } else if (node.kind == SlotKind::kComposite) {
    out += " ( ";
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i > 0) out += " , ";
      linearize_slot(out, node.children[i]);
    }
    out += " )";
  }
}

inline void collect_paths(const SlotNode& node, KeyPath& prefix,
                          std::vector<KeyPath>& out) {
  prefix.push_back(node.name);
  if (node.is_leaf()) {
    out.push_back(prefix);
  } else {
    for (const auto& c : node.children) collect_paths(c, prefix, out);
  }
  prefix.pop_back();
}

}  // namespace schema_detail

// Parses the schema file format. Throws SchemaError with line/column.
inline SchemaSet parse_schema(std::string_view source) {
  return schema_detail::Parser(source).run();
}

// Inverse of parse_schema(): parse_schema(serialize_schema(s)) == s.
inline std::string serialize_schema(const SchemaSet& s) {
  std::string out;
  if (!s.version.empty()) out += "version " + s.version + "\n";
  for (const auto& organ : s.organs) {
    out += "organ " + organ.name + "\n";
    for (const auto& slot : organ.slots) schema_detail::write_slot(out, slot, 0);
  }
  return out;
}

// Single-line rendering used as model context. Organs appear in declared
// order regardless of filter order and are separated by " ; ". The output
// never contains '{' or '}'.
inline std::string linearize_schema(
    const SchemaSet& s,
    const std::optional<std::vector<std::string>>& organs = std::nullopt) {
  if (organs) {
    for (const auto& name : *organs)
      if (s.find_organ(name) == nullptr)
        throw InvalidArgument("unknown organ in filter: '" + name + "'");
  }
  std::string out;
  bool first = true;
  for (const auto& organ : s.organs) {
    if (organs) {
      const std::string key = normalize(organ.name);
      const bool selected =
          std::any_of(organs->begin(), organs->end(),
                      [&](const std::string& n) { return normalize(n) == key; });
      if (!selected) continue;
    }
    if (!first) out += " ; ";
    first = false;
    out += organ.name + " :";
    for (std::size_t i = 0; i < organ.slots.size(); ++i) {
      out += i == 0 ? " " : " , ";
      schema_detail::linearize_slot(out, organ.slots[i]);
    }
  }
  return out;
}

// Depth-first organ/slot/.../leaf paths in declaration order.
inline std::vector<KeyPath> list_slot_paths(const SchemaSet& s) {
  std::vector<KeyPath> out;
  for (const auto& organ : s.organs) {
    KeyPath prefix{organ.name};
    for (const auto& slot : organ.slots)
      schema_detail::collect_paths(slot, prefix, out);
  }
  return out;
}

// Looks up the slot node at `path` (organ first). Case-insensitive.
inline const SlotNode* find_slot(const SchemaSet& s, const KeyPath& path) {
  if (path.size() < 2) return nullptr;
  const OrganSchema* organ = s.find_organ(path[0]);
  if (organ == nullptr) return nullptr;
  const SlotNode* node = organ->find_slot(path[1]);
  for (std::size_t i = 2; node != nullptr && i < path.size(); ++i)
    node = node->find_child(path[i]);
  return node;
}

}  // namespace rqlkit

#endif  // RQLKIT_SCHEMA_HPP_
