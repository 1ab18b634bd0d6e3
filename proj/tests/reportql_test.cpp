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


#include "rqlkit/reportql.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <string>

#include "oracles.hpp"
#include "rqlkit/schema.hpp"

namespace rqlkit {
namespace {

constexpr const char* kLiver =
    "liver { size { normal } echogenicity { normal } lesion { no } bile duct { no } }";

std::string table_report() {
  std::string s = oracle::read_file(RQLKIT_DATA_DIR "/example_report.rql");
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

SchemaSet shipped_schema() {
  return parse_schema(oracle::read_file(RQLKIT_DATA_DIR "/abdominopelvic.schema"));
}

std::vector<std::string> pair_strings(const std::vector<SlotPair>& pairs) {
  std::vector<std::string> out;
  for (const auto& p : pairs) out.push_back(p.str());
  return out;
}

TEST(ParseReport, LiverFragment) {
  const ParseResult r = parse_report(kLiver);
  EXPECT_TRUE(r.warnings.empty());
  ASSERT_EQ(r.doc.entries.size(), 1u);
  const Entry& liver = r.doc.entries[0];
  EXPECT_EQ(liver.text(), "liver");
  ASSERT_EQ(liver.children.size(), 4u);
  for (const auto& slot : liver.children) {
    ASSERT_EQ(slot.children.size(), 1u);
    EXPECT_TRUE(slot.children[0].is_leaf());
  }
  EXPECT_EQ(liver.children[3].phrase, (std::vector<std::string>{"bile", "duct"}));
}

TEST(ParseReport, EmptyInput) {
  for (const char* src : {"", "   \n\t "}) {
    const ParseResult r = parse_report(src);
    EXPECT_TRUE(r.doc.empty());
    EXPECT_TRUE(r.warnings.empty());
  }
}

TEST(ParseReport, FullExampleHasTenOrgans) {
  const ParseResult r = parse_report(table_report());
  EXPECT_TRUE(r.warnings.empty());
  std::vector<std::string> organs;
  for (const auto& e : r.doc.entries) organs.push_back(e.text());
  EXPECT_EQ(organs, (std::vector<std::string>{
                        "liver", "GB", "spleen", "pancreas", "right kidney", "left kidney",
                        "right ureter", "left ureter", "bladder", "abdominopelvic cavity"}));
}

TEST(ParseReport, BracesNeedNoSpaces) {
  EXPECT_EQ(parse_report("size{normal}").doc, parse_report("size { normal }").doc);
  EXPECT_EQ(format_report("liver{size{normal}}lesion{no}"),
            "liver { size { normal } } lesion { no }");
}

TEST(ParseReport, CommaIsAWordCharacter) {
  const ParseResult r = parse_report("stones {quantity {few}, size {up to 7 mm}}");
  const auto& stones = r.doc.entries.at(0);
  ASSERT_EQ(stones.children.size(), 2u);
  EXPECT_EQ(stones.children[1].text(), ", size");
}

TEST(ParseReport, UnbalancedBraces) {
  try {
    parse_report("liver { size { normal }");
    FAIL();
  } catch (const ReportParseError& e) {
    EXPECT_EQ(e.kind(), ReportParseError::Kind::kUnclosedBlock);
    EXPECT_EQ(e.offset(), 6u);
    EXPECT_EQ(e.pos().line, 1u);
    EXPECT_EQ(e.pos().column, 7u);
  }
  try {
    parse_report("liver { size }\n}");
    FAIL();
  } catch (const ReportParseError& e) {
    EXPECT_EQ(e.kind(), ReportParseError::Kind::kUnmatchedClose);
    EXPECT_EQ(e.pos().line, 2u);
    EXPECT_EQ(e.pos().column, 1u);
  }
}

TEST(ParseReport, BlockWithoutPhrase) {
  try {
    parse_report("liver { { normal } }");
    FAIL();
  } catch (const ReportParseError& e) {
    EXPECT_EQ(e.kind(), ReportParseError::Kind::kBlockWithoutPhrase);
    EXPECT_EQ(e.offset(), 8u);
  }
  EXPECT_THROW(parse_report("{ a }"), ReportParseError);
}

TEST(ParseReport, Warnings) {
  const ParseResult r = parse_report("liver { } ascites");
  ASSERT_EQ(r.warnings.size(), 2u);
  EXPECT_EQ(r.warnings[0].kind, Diagnostic::Kind::kEmptyBlock);
  EXPECT_EQ(r.warnings[1].kind, Diagnostic::Kind::kTopLevelLeaf);
  EXPECT_EQ(r.warnings[1].pos.column, 11u);
  ASSERT_EQ(r.doc.entries.size(), 2u);
  EXPECT_TRUE(r.doc.entries[0].has_block);
  EXPECT_TRUE(r.doc.entries[0].children.empty());
}

TEST(SerializeCanonical, Rules) {
  ReportDoc d;
  d.entries.push_back(block("liver", {block("size", {leaf("normal")})}));
  EXPECT_EQ(serialize_canonical(d), "liver { size { normal } }");
  EXPECT_EQ(serialize_canonical(ReportDoc{}), "");
  EXPECT_EQ(format_report("  liver\n{ size {\tnormal }  }  "), "liver { size { normal } }");
  EXPECT_EQ(format_report("a { }"), "a { }");
}

TEST(SerializeCanonical, ExampleReportRoundTrips) {
  const std::string src = table_report();
  const ReportDoc d = parse_report(src).doc;
  const std::string canon = serialize_canonical(d);
  EXPECT_EQ(parse_report(canon).doc, d);
  EXPECT_EQ(format_report(canon), canon);
  // The source is already in canonical form.
  EXPECT_EQ(canon, src);
}

TEST(ReportProperties, RandomTreesRoundTrip) {
  std::mt19937 rng(1234);
  for (int i = 0; i < 1000; ++i) {
    ReportDoc d{oracle::random_entries(rng, 1, 5, 6)};
    ASSERT_TRUE(is_well_formed(d));
    const std::string text = serialize_canonical(d);
    ASSERT_EQ(parse_report(text).doc, d) << text;
    EXPECT_EQ(std::count(text.begin(), text.end(), '{'),
              std::count(text.begin(), text.end(), '}'));
    EXPECT_EQ(text.find("  "), std::string::npos);
    EXPECT_TRUE(text.empty() || text.back() != ' ');
    EXPECT_EQ(flatten(d).pairs.size(), oracle::count_leaves(d.entries));
    const ReportDiff self = diff_reports(d, d);
    EXPECT_TRUE(self.missing.empty());
    EXPECT_TRUE(self.spurious.empty());
  }
}

TEST(ReportProperties, FormatIsIdempotentOnNoisyText) {
  std::mt19937 rng(99);
  const char* pieces[] = {"a", "b", "{", "}", " ", "\n", "x,y", "\t"};
  int parsed = 0;
  for (int i = 0; i < 2000; ++i) {
    std::string text;
    for (int k = rng() % 20; k > 0; --k) text += pieces[rng() % std::size(pieces)];
    try {
      const std::string once = format_report(text);
      EXPECT_EQ(format_report(once), once);
      EXPECT_TRUE(is_well_formed(parse_report(text).doc));
      ++parsed;
    } catch (const ReportParseError&) {
    }
  }
  EXPECT_GT(parsed, 100);
}

TEST(IsWellFormed, RejectsMergeableLeaves) {
  ReportDoc d;
  d.entries = {block("a", {leaf("x"), leaf("y")})};
  EXPECT_FALSE(is_well_formed(d));
  EXPECT_NE(parse_report(serialize_canonical(d)).doc, d);
  d.entries = {block("a", {leaf("x y")})};
  EXPECT_TRUE(is_well_formed(d));
  d.entries = {Entry{{"a{"}, false, {}}};
  EXPECT_FALSE(is_well_formed(d));
}

TEST(Flatten, LiverFragment) {
  EXPECT_EQ(pair_strings(flatten(parse_report(kLiver).doc).pairs),
            (std::vector<std::string>{"liver/size = normal", "liver/echogenicity = normal",
                                      "liver/lesion = no", "liver/bile duct = no"}));
}

TEST(Flatten, KidneysHaveDistinctPaths) {
  const auto pairs =
      flatten(parse_report("right kidney { stone { no } } left kidney { stone { no } }").doc).pairs;
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_NE(pairs[0].path, pairs[1].path);
  EXPECT_EQ(pairs[0].value, pairs[1].value);
}

TEST(Flatten, NestedModifiers) {
  EXPECT_EQ(pair_strings(flatten(parse_report("stones { quantity { few } size { up to 7 mm } "
                                              "location { upper pole } }")
                                     .doc)
                             .pairs),
            (std::vector<std::string>{"stones/quantity = few", "stones/size = up to 7 mm",
                                      "stones/location = upper pole"}));
}

TEST(Flatten, TopLevelLeafIsPresenceMarker) {
  const FlattenResult r = flatten(parse_report("liver { size { normal } } ascites").doc);
  ASSERT_EQ(r.pairs.size(), 2u);
  EXPECT_EQ(r.pairs[1].path, (KeyPath{"ascites"}));
  EXPECT_EQ(r.pairs[1].value, "present");
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Flatten, DuplicatesKept) {
  const auto pairs =
      flatten(parse_report("liver { lesion { cyst } lesion { cyst } }").doc).pairs;
  EXPECT_EQ(pairs.size(), 2u);
}

TEST(Validate, ExampleReportConforms) {
  const auto v = validate_against_schema(parse_report(table_report()).doc, shipped_schema());
  EXPECT_TRUE(v.empty()) << (v.empty() ? "" : v.front().message);
}

TEST(Validate, ValueOutsideAllowedList) {
  const auto v = validate_against_schema(parse_report("liver { size { purple } }").doc,
                                         shipped_schema());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::kValueNotAllowed);
  EXPECT_EQ(v[0].value, "purple");
  EXPECT_EQ(path_string(v[0].path), "liver/size");
}

TEST(Validate, UnknownOrganAndSlot) {
  const SchemaSet s = shipped_schema();
  auto v = validate_against_schema(parse_report("brain { size { normal } }").doc, s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::kUnknownOrgan);
  v = validate_against_schema(parse_report("Liver { colour { red } }").doc, s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::kUnknownSlot);
  EXPECT_EQ(path_string(v[0].path), "Liver/colour");
}

TEST(Validate, CompositeAndFreeText) {
  const SchemaSet s = shipped_schema();
  EXPECT_TRUE(validate_against_schema(
                  parse_report("left kidney { stones { quantity { few } size { up to 7 mm } "
                               "location { upper pole } } }")
                      .doc,
                  s)
                  .empty());
  auto v = validate_against_schema(
      parse_report("left kidney { stones { quantity { lots } shape { round } } }").doc, s);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].kind, Violation::Kind::kValueNotAllowed);
  EXPECT_EQ(v[1].kind, Violation::Kind::kUnknownSlot);
  v = validate_against_schema(parse_report("liver { size { normal { x } } lesion }").doc, s);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].kind, Violation::Kind::kMalformed);
  EXPECT_EQ(v[1].kind, Violation::Kind::kMalformed);
}

TEST(DiffReports, Identical) {
  const ReportDoc d = parse_report(table_report()).doc;
  const ReportDiff diff = diff_reports(d, d);
  EXPECT_TRUE(diff.missing.empty());
  EXPECT_TRUE(diff.spurious.empty());
  EXPECT_EQ(diff.matched.size(), oracle::count_leaves(d.entries));
}

TEST(DiffReports, DroppedPair) {
  const ReportDoc gold = parse_report(kLiver).doc;
  const ReportDoc pred =
      parse_report("liver { size { normal } echogenicity { normal } bile duct { no } }").doc;
  const ReportDiff d = diff_reports(pred, gold);
  EXPECT_EQ(d.matched.size(), 3u);
  ASSERT_EQ(d.missing.size(), 1u);
  EXPECT_EQ(d.missing[0].str(), "liver/lesion = no");
  EXPECT_TRUE(d.spurious.empty());
}

TEST(DiffReports, WrongValue) {
  const ReportDiff d = diff_reports(parse_report("GB { stone { no } }").doc,
                                    parse_report("GB { stone { yes } }").doc);
  EXPECT_TRUE(d.matched.empty());
  EXPECT_EQ(d.missing.size(), 1u);
  EXPECT_EQ(d.spurious.size(), 1u);
}

TEST(DiffReports, CaseAndWhitespaceInsensitive) {
  const ReportDiff d = diff_reports(parse_report("gb { Wall  Thickening { NO } }").doc,
                                    parse_report("GB { wall thickening { no } }").doc);
  EXPECT_EQ(d.matched.size(), 1u);
}

TEST(DiffReports, MultisetSemantics) {
  const ReportDiff d =
      diff_reports(parse_report("liver { lesion { cyst } lesion { cyst } lesion { cyst } }").doc,
                   parse_report("liver { lesion { cyst } lesion { cyst } }").doc);
  EXPECT_EQ(d.matched.size(), 2u);
  EXPECT_EQ(d.spurious.size(), 1u);
  EXPECT_TRUE(d.missing.empty());
}

}  // namespace
}  // namespace rqlkit
