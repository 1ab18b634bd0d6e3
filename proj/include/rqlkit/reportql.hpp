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

// ReportQL: the bracketed structured-report language.
//
//   document := entry*
//   entry    := phrase block?
//   block    := '{' entry* '}'
//   phrase   := word+
//
// Tokens are maximal runs of non-whitespace characters, except that '{' and
// '}' are always tokens of their own, so "size{normal}" is three tokens.
// A phrase extends over every consecutive word, which means two adjacent
// leaves are one leaf: "a b" is the single phrase [a, b].
//
// Example:
//   liver { size { normal } lesion { no } } GB { seen { yes } }

#ifndef RQLKIT_REPORTQL_HPP_
#define RQLKIT_REPORTQL_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rqlkit/error.hpp"
#include "rqlkit/schema.hpp"
#include "rqlkit/text.hpp"

namespace rqlkit {

struct Entry {
  std::vector<std::string> phrase;
  // has_block distinguishes "a { }" (empty block) from the leaf "a".
  bool has_block = false;
  std::vector<Entry> children;

  bool is_leaf() const { return !has_block; }
  std::string text() const { return join(phrase, " "); }

  friend bool operator==(const Entry&, const Entry&) = default;
};

// Documents produced by parse_report() are well formed (see
// is_well_formed()), and for those parse(serialize_canonical(d)) == d.
struct ReportDoc {
  std::vector<Entry> entries;

  bool empty() const { return entries.empty(); }
  friend bool operator==(const ReportDoc&, const ReportDoc&) = default;
};

inline Entry leaf(std::string_view phrase) {
  return Entry{split_whitespace(phrase), false, {}};
}

inline Entry block(std::string_view phrase, std::vector<Entry> children) {
  return Entry{split_whitespace(phrase), true, std::move(children)};
}

namespace rql_detail {

inline bool well_formed_entries(const std::vector<Entry>& entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    if (e.phrase.empty()) return false;
    for (const auto& w : e.phrase)
      if (w.empty() || w.find_first_of("{} \t\n\r\v\f") != std::string::npos)
        return false;
    // A leaf followed by a sibling would merge with it into one phrase.
    if (e.is_leaf() && i + 1 < entries.size()) return false;
    if (e.has_block && !well_formed_entries(e.children)) return false;
  }
  return true;
}

}  // namespace rql_detail

// True if every phrase is a non-empty list of brace- and space-free words
// and no leaf has a following sibling. Exactly the documents that survive
// a serialize/parse round trip unchanged.
inline bool is_well_formed(const ReportDoc& doc) {
  return rql_detail::well_formed_entries(doc.entries);
}

struct Diagnostic {
  enum class Kind { kTopLevelLeaf, kEmptyBlock, kPrunedToEmpty };
  Kind kind;
  std::string message;
  SourcePos pos;
};

struct ParseResult {
  ReportDoc doc;
  std::vector<Diagnostic> warnings;
};

class ReportParseError : public SourceError {
 public:
  enum class Kind { kUnclosedBlock, kUnmatchedClose, kBlockWithoutPhrase };

  ReportParseError(Kind kind, const std::string& message, SourcePos pos,
                   std::size_t offset)
      : SourceError(message, pos), kind_(kind), offset_(offset) {}

  Kind kind() const { return kind_; }
  // Byte offset of the offending token.
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

namespace rql_detail {

struct Token {
  enum class Kind { kWord, kOpen, kClose };
  Kind kind = Kind::kWord;
  std::string_view text;
  std::size_t offset = 0;
  SourcePos pos;
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1, line_start = 0;
  std::size_t i = 0;
  auto pos = [&](std::size_t at) { return SourcePos{line, at - line_start + 1}; };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      line_start = ++i;
    } else if (is_space(c)) {
      ++i;
    } else if (c == '{' || c == '}') {
      out.push_back({c == '{' ? Token::Kind::kOpen : Token::Kind::kClose,
                     src.substr(i, 1), i, pos(i)});
      ++i;
    } else {
      const std::size_t start = i;
      while (i < src.size() && !is_space(src[i]) && src[i] != '{' && src[i] != '}')
        ++i;
      out.push_back({Token::Kind::kWord, src.substr(start, i - start), start,
                     pos(start)});
    }
  }
  return out;
}

inline void serialize_entry(std::string& out, const Entry& e) {
  out += e.text();
  if (!e.has_block) return;
  out += " {";
  for (const auto& c : e.children) {
    out += ' ';
    serialize_entry(out, c);
  }
  out += " }";
}

}  // namespace rql_detail

// Parses ReportQL text. Any text is accepted; structural problems throw
// ReportParseError. Empty input gives an empty document.
inline ParseResult parse_report(std::string_view source) {
  using rql_detail::Token;
  struct Frame {
    std::vector<std::string> phrase;
    std::vector<Entry> entries;
    Token open;
  };

  ParseResult result;
  std::vector<Frame> stack(1);
  std::vector<std::string> pending;
  SourcePos pending_pos;

  auto flush = [&](Frame& frame) {
    if (pending.empty()) return;
    if (stack.size() == 1) {
      result.warnings.push_back({Diagnostic::Kind::kTopLevelLeaf,
                                 "top-level entry '" + join(pending, " ") +
                                     "' has no block",
                                 pending_pos});
    }
    frame.entries.push_back(Entry{std::move(pending), false, {}});
    pending.clear();
  };

  for (const Token& tok : rql_detail::tokenize(source)) {
    switch (tok.kind) {
      case Token::Kind::kWord:
        if (pending.empty()) pending_pos = tok.pos;
        pending.emplace_back(tok.text);
        break;
      case Token::Kind::kOpen:
        if (pending.empty())
          throw ReportParseError(ReportParseError::Kind::kBlockWithoutPhrase,
                                 "'{' has no preceding phrase", tok.pos,
                                 tok.offset);
        stack.push_back(Frame{std::move(pending), {}, tok});
        pending.clear();
        break;
      case Token::Kind::kClose: {
        if (stack.size() == 1)
          throw ReportParseError(ReportParseError::Kind::kUnmatchedClose,
                                 "unmatched '}'", tok.pos, tok.offset);
        flush(stack.back());
        Frame done = std::move(stack.back());
        stack.pop_back();
        if (done.entries.empty()) {
          result.warnings.push_back({Diagnostic::Kind::kEmptyBlock,
                                     "empty block after '" +
                                         join(done.phrase, " ") + "'",
                                     done.open.pos});
        }
        stack.back().entries.push_back(
            Entry{std::move(done.phrase), true, std::move(done.entries)});
        break;
      }
    }
  }
  if (stack.size() > 1) {
    const Token& open = stack.back().open;
    throw ReportParseError(ReportParseError::Kind::kUnclosedBlock,
                           "'{' is never closed", open.pos, open.offset);
  }
  flush(stack.back());
  result.doc.entries = std::move(stack.back().entries);
  return result;
}

// Canonical single-line form: single spaces between words and around
// braces, no trailing whitespace. Fixed point of parse + serialize.
inline std::string serialize_canonical(const ReportDoc& doc) {
  std::string out;
  for (const auto& e : doc.entries) {
    if (!out.empty()) out += ' ';
    rql_detail::serialize_entry(out, e);
  }
  return out;
}

// Formats arbitrary ReportQL text into canonical form.
inline std::string format_report(std::string_view source) {
  return serialize_canonical(parse_report(source).doc);
}

struct SlotPair {
  KeyPath path;
  std::string value;

  std::string str() const { return path_string(path) + " = " + value; }
  friend bool operator==(const SlotPair&, const SlotPair&) = default;
};

// Value given to a top-level leaf, whose only information is its presence.
inline constexpr std::string_view kPresentValue = "present";

struct FlattenResult {
  std::vector<SlotPair> pairs;
  std::vector<Diagnostic> warnings;
};

namespace rql_detail {

inline void flatten_into(const Entry& e, KeyPath& path,
                         std::vector<SlotPair>& out) {
  if (e.is_leaf()) {
    out.push_back({path, e.text()});
    return;
  }
  path.push_back(e.text());
  for (const auto& c : e.children) flatten_into(c, path, out);
  path.pop_back();
}

}  // namespace rql_detail

// Every leaf becomes (ancestor phrases, leaf phrase), in document order.
// Duplicates are kept.
inline FlattenResult flatten(const ReportDoc& doc) {
  FlattenResult result;
  KeyPath path;
  for (const auto& e : doc.entries) {
    if (e.is_leaf()) {
      result.warnings.push_back({Diagnostic::Kind::kTopLevelLeaf,
                                 "top-level entry '" + e.text() +
                                     "' flattened as presence marker",
                                 {}});
      result.pairs.push_back({{e.text()}, std::string(kPresentValue)});
      continue;
    }
    rql_detail::flatten_into(e, path, result.pairs);
  }
  return result;
}

struct Violation {
  enum class Kind { kUnknownOrgan, kUnknownSlot, kValueNotAllowed, kMalformed };
  Kind kind;
  KeyPath path;
  std::string value;
  std::string message;
};

inline std::string_view violation_name(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::kUnknownOrgan: return "unknown-organ";
    case Violation::Kind::kUnknownSlot: return "unknown-slot";
    case Violation::Kind::kValueNotAllowed: return "value-not-allowed";
    case Violation::Kind::kMalformed: return "malformed";
  }
  return "?";
}

namespace rql_detail {

inline void check_slot(const Entry& e, const SlotNode* node, KeyPath& path,
                       std::vector<Violation>& out) {
  path.push_back(e.text());
  if (node == nullptr) {
    out.push_back({Violation::Kind::kUnknownSlot, path, "",
                   "unknown slot " + path_string(path)});
  } else if (e.is_leaf()) {
    out.push_back({Violation::Kind::kMalformed, path, "",
                   "slot " + path_string(path) + " has no value block"});
  } else if (node->kind == SlotKind::kComposite) {
    for (const auto& c : e.children) check_slot(c, node->find_child(c.text()), path, out);
  } else {
    for (const auto& c : e.children) {
      if (!c.is_leaf()) {
        out.push_back({Violation::Kind::kMalformed, path, c.text(),
                       "value '" + c.text() + "' of " + path_string(path) +
                           " must be a leaf"});
      } else if (!node->allows(c.text())) {
        out.push_back({Violation::Kind::kValueNotAllowed, path, c.text(),
                       "value '" + c.text() + "' not allowed for " +
                           path_string(path)});
      }
    }
  }
  path.pop_back();
}

}  // namespace rql_detail

// Checks a document against a schema. An empty result means conformant.
inline std::vector<Violation> validate_against_schema(const ReportDoc& doc,
                                                      const SchemaSet& schema) {
  std::vector<Violation> out;
  for (const auto& e : doc.entries) {
    KeyPath path{e.text()};
    const OrganSchema* organ = schema.find_organ(e.text());
    if (organ == nullptr) {
      out.push_back({Violation::Kind::kUnknownOrgan, path, "",
                     "unknown organ '" + e.text() + "'"});
      continue;
    }
    if (e.is_leaf()) {
      out.push_back({Violation::Kind::kMalformed, path, "",
                     "organ '" + e.text() + "' has no block"});
      continue;
    }
    for (const auto& c : e.children)
      rql_detail::check_slot(c, organ->find_slot(c.text()), path, out);
  }
  return out;
}

struct ReportDiff {
  std::vector<SlotPair> matched;   // in prediction order
  std::vector<SlotPair> missing;   // gold pairs absent from the prediction
  std::vector<SlotPair> spurious;  // predicted pairs absent from the gold
};

namespace rql_detail {

using PairKey = std::pair<std::vector<std::string>, std::string>;

inline PairKey pair_key(const SlotPair& p) {
  PairKey k;
  k.first.reserve(p.path.size());
  for (const auto& seg : p.path) k.first.push_back(normalize(seg));
  k.second = normalize(p.value);
  return k;
}

}  // namespace rql_detail

// Multiset comparison of flattened pairs. Paths and values match
// case-insensitively after whitespace normalization.
inline ReportDiff diff_pairs(const std::vector<SlotPair>& pred,
                             const std::vector<SlotPair>& gold) {
  std::map<rql_detail::PairKey, std::size_t> available;
  for (const auto& g : gold) ++available[rql_detail::pair_key(g)];

  ReportDiff diff;
  std::map<rql_detail::PairKey, std::size_t> consumed;
  for (const auto& p : pred) {
    auto key = rql_detail::pair_key(p);
    auto it = available.find(key);
    if (it != available.end() && it->second > 0) {
      --it->second;
      ++consumed[std::move(key)];
      diff.matched.push_back(p);
    } else {
      diff.spurious.push_back(p);
    }
  }
  // The first `consumed[k]` gold occurrences of each key count as matched.
  for (const auto& g : gold) {
    auto it = consumed.find(rql_detail::pair_key(g));
    if (it != consumed.end() && it->second > 0) {
      --it->second;
    } else {
      diff.missing.push_back(g);
    }
  }
  return diff;
}

inline ReportDiff diff_reports(const ReportDoc& pred, const ReportDoc& gold) {
  return diff_pairs(flatten(pred).pairs, flatten(gold).pairs);
}

}  // namespace rqlkit

#endif  // RQLKIT_REPORTQL_HPP_
