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


// Templated synthetic reports. Every record pairs a free-text report with
// the structured target it states, so the corpus is schema-conformant by
// construction. The data is synthetic and carries no patient information.

#ifndef RQLKIT_SYNTHETIC_HPP_
#define RQLKIT_SYNTHETIC_HPP_

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "rqlkit/corpus.hpp"
#include "rqlkit/random.hpp"
#include "rqlkit/reportql.hpp"
#include "rqlkit/schema.hpp"

namespace rqlkit {

struct SynthOptions {
  std::size_t count = 88;
  std::uint64_t seed = 0;
  // Probability that a categorical slot takes its first listed value
  // ("normal" in the shipped schema); otherwise a uniform pick.
  double normal_bias = 0.7;
  std::string id_prefix = "synth-";
  std::string annotator = "A";
};

namespace synth_detail {

inline std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

inline std::string the(const std::string& organ) {
  return organ == "GB" ? "the GB" : "the " + organ;
}

// One sentence stating `slot` = `value` for `organ`.
inline std::string sentence(const std::string& organ, const std::string& slot,
                            const std::string& value) {
  const std::string o = the(organ);
  const bool yes = value == "yes";
  if (slot == "size") {
    if (value == "normal") return capitalize(o) + " is normal in size.";
    return capitalize(o) + " is " + value + " in size.";
  }
  if (slot == "echogenicity" || slot == "cortical parenchymal") {
    const std::string what =
        slot == "echogenicity" ? "parenchymal echogenicity" : "cortical parenchymal echogenicity";
    return capitalize(what) + " of " + o + " is " + value + ".";
  }
  if (slot == "lesion")
    return yes ? "A space-occupying lesion is seen in " + o + "."
               : "No space-occupying lesion is seen in " + o + ".";
  if (slot == "bile duct")
    return yes ? "Bile ducts are dilated." : "No bile duct dilatation is seen.";
  if (slot == "seen")
    return yes ? capitalize(o) + " is visualized." : capitalize(o) + " is not visualized.";
  if (slot == "distention") {
    if (value == "well") return capitalize(o) + " is well distended.";
    if (value == "poor") return capitalize(o) + " is poorly distended.";
    return capitalize(o) + " is not distended.";
  }
  if (slot == "stone")
    return yes ? "Stone is seen in " + o + "." : "No stone is seen in " + o + ".";
  if (slot == "wall thickening")
    return yes ? "Wall thickening of " + o + " is noted."
               : "No wall thickening of " + o + " is noted.";
  if (slot == "stasis severity")
    return value == "no" ? "No stasis is seen in " + o + "."
                         : capitalize(value) + " stasis is seen in " + o + ".";
  if (slot == "perinephric collection")
    return yes ? "Perinephric collection is seen around " + o + "."
               : "No perinephric collection is seen around " + o + ".";
  if (slot == "dilation")
    return yes ? capitalize(o) + " is dilated." : capitalize(o) + " is not dilated.";
  if (slot == "distension empty evaluation")
    return yes ? "The urinary bladder is empty so evaluation of pelvic organs is not possible."
               : "The urinary bladder is well distended.";
  if (slot == "free fluid")
    return yes ? "Free fluid is seen in " + o + "." : "No free fluid is seen in " + o + ".";
  return capitalize(slot) + " of " + o + ": " + value + ".";
}

class Generator {
 public:
  Generator(const SynthOptions& opt) : opt_(opt), rng_(opt.seed) {}

  ReportRecord record(const SchemaSet& schema, std::size_t index) {
    ReportDoc doc;
    std::string text;
    for (const auto& organ : schema.organs) {
      Entry organ_entry = block(organ.name, {});
      bool has_stone = false;
      for (const auto& slot : organ.slots) {
        if (slot.kind == SlotKind::kCategorical) {
          const std::string value = pick(slot.allowed_values);
          if (slot.name == "stone" && value == "yes") has_stone = true;
          organ_entry.children.push_back(block(slot.name, {leaf(value)}));
          append(text, sentence(organ.name, slot.name, value));
        } else if (slot.kind == SlotKind::kComposite && has_stone) {
          composite(organ.name, slot, organ_entry, text);
        }
      }
      doc.entries.push_back(std::move(organ_entry));
    }
    char id[32];
    std::snprintf(id, sizeof id, "%03zu", index + 1);
    ReportRecord r;
    r.id = opt_.id_prefix + id;
    r.report_text = std::move(text);
    r.target = serialize_canonical(doc);
    r.annotators = {opt_.annotator};
    return r;
  }

 private:
  std::string pick(const std::vector<std::string>& values) {
    if (rng_.chance(opt_.normal_bias)) return values.front();
    return values[static_cast<std::size_t>(rng_.below(values.size()))];
  }

  // "Few stones up to 7 mm are seen in the upper pole of the left kidney."
  void composite(const std::string& organ, const SlotNode& slot, Entry& parent,
                 std::string& text) {
    Entry e = block(slot.name, {});
    std::string quantity = "few", size, location;
    for (const auto& child : slot.children) {
      std::string value;
      if (child.kind == SlotKind::kCategorical) {
        value = values_of(child);
      } else if (child.kind == SlotKind::kFreeText) {
        value = "up to " + std::to_string(3 + rng_.below(10)) + " mm";
      } else {
        continue;
      }
      if (child.name == "quantity") quantity = value;
      if (child.name == "size") size = value;
      if (child.name == "location") location = value;
      e.children.push_back(block(child.name, {leaf(value)}));
    }
    std::string s = capitalize(quantity) + (quantity == "single" ? " stone" : " stones");
    if (!size.empty()) s += " " + size;
    s += quantity == "single" ? " is seen" : " are seen";
    if (!location.empty()) s += " in the " + location + " of";
    else s += " in";
    s += " " + the(organ) + ".";
    append(text, s);
    parent.children.push_back(std::move(e));
  }

  std::string values_of(const SlotNode& node) {
    return node.allowed_values[static_cast<std::size_t>(rng_.below(node.allowed_values.size()))];
  }

  static void append(std::string& text, const std::string& sentence) {
    if (!text.empty()) text += ' ';
    text += sentence;
  }

  SynthOptions opt_;
  Rng rng_;
};

}  // namespace synth_detail

// `opt.count` reports, each covering every organ of `schema`.
inline std::vector<ReportRecord> synthesize_corpus(const SchemaSet& schema,
                                                   const SynthOptions& opt = {}) {
  synth_detail::Generator gen(opt);
  std::vector<ReportRecord> out;
  out.reserve(opt.count);
  for (std::size_t i = 0; i < opt.count; ++i) out.push_back(gen.record(schema, i));
  return out;
}

// Second annotation of the same reports: each categorical value is
// re-drawn uniformly with probability `rate`.
inline std::vector<ReportRecord> perturb_annotations(const std::vector<ReportRecord>& records,
                                                     const SchemaSet& schema, double rate,
                                                     std::uint64_t seed,
                                                     const std::string& annotator = "B") {
  Rng rng(seed);
  std::vector<ReportRecord> out = records;
  for (auto& r : out) {
    r.annotators = {annotator};
    if (!r.target) continue;
    ReportDoc doc = parse_report(*r.target).doc;
    for (auto& organ : doc.entries) {
      for (auto& slot : organ.children) {
        const SlotNode* node = find_slot(schema, {organ.text(), slot.text()});
        if (node == nullptr || node->kind != SlotKind::kCategorical) continue;
        for (auto& value : slot.children) {
          if (!value.is_leaf() || !rng.chance(rate)) continue;
          value = leaf(node->allowed_values[static_cast<std::size_t>(
              rng.below(node->allowed_values.size()))]);
        }
      }
    }
    r.target = serialize_canonical(doc);
  }
  return out;
}

}  // namespace rqlkit

#endif  // RQLKIT_SYNTHETIC_HPP_
