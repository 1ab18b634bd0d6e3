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


// Corpus files, train/test splits, model input assembly, the prediction
// file contract and inter-annotator agreement.
//
// File formats (JSON lines, UTF-8):
//   corpus       {"id", "report", "target"?, "annotator"?}
//   prepared     {"id", "input", "target"?}
//   predictions  {"id", "prediction"}
//   manifest     {"seed", "fraction", "train": [ids], "test": [ids]}

#ifndef RQLKIT_CORPUS_HPP_
#define RQLKIT_CORPUS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "rqlkit/error.hpp"
#include "rqlkit/metrics.hpp"
#include "rqlkit/random.hpp"
#include "rqlkit/reportql.hpp"
#include "rqlkit/schema.hpp"

namespace rqlkit {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kReportSeparator = "[REPORT]";
inline constexpr std::string_view kAbsentLabel = "ABSENT";

struct ReportRecord {
  std::string id;
  std::string report_text;
  std::optional<std::string> target;  // canonical ReportQL
  std::vector<std::string> annotators;

  friend bool operator==(const ReportRecord&, const ReportRecord&) = default;
};

// Malformed line in a JSON-lines file. pos.line is the 1-based line.
class FormatError : public SourceError {
 public:
  FormatError(const std::string& message, std::size_t line)
      : SourceError(message, {line, 0}) {}
};

namespace corpus_detail {

// Calls fn(json, line_no) for every non-blank line.
template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError("line " + std::to_string(line_no) + ": invalid JSON (" +
                            e.what() + ")",
                        line_no);
    }
    if (!j.is_object())
      throw FormatError("line " + std::to_string(line_no) + ": expected a JSON object",
                        line_no);
    fn(j, line_no);
  }
}

inline std::string required_string(const Json& j, const char* key,
                                   std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw FormatError("line " + std::to_string(line_no) + ": missing string field '" +
                          key + "'",
                      line_no);
  return it->get<std::string>();
}

inline std::optional<std::string> optional_string(const Json& j, const char* key,
                                                  std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    throw FormatError("line " + std::to_string(line_no) + ": field '" + key +
                          "' must be a string",
                      line_no);
  return it->get<std::string>();
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace corpus_detail

// Reads a corpus file. Targets are checked and stored in canonical form.
inline std::vector<ReportRecord> load_corpus(std::istream& in) {
  using namespace corpus_detail;
  std::vector<ReportRecord> records;
  std::unordered_set<std::string> seen;
  for_each_json_line(in, [&](const Json& j, std::size_t line_no) {
    ReportRecord r;
    r.id = required_string(j, "id", line_no);
    r.report_text = required_string(j, "report", line_no);
    if (auto target = optional_string(j, "target", line_no)) {
      try {
        r.target = format_report(*target);
      } catch (const ReportParseError& e) {
        throw FormatError("line " + std::to_string(line_no) + ": target of '" + r.id +
                              "' is not valid ReportQL (" + e.what() + ")",
                          line_no);
      }
    }
    if (auto it = j.find("annotator"); it != j.end() && !it->is_null()) {
      if (it->is_string()) {
        r.annotators.push_back(it->get<std::string>());
      } else if (it->is_array() &&
                 std::all_of(it->begin(), it->end(),
                             [](const Json& a) { return a.is_string(); })) {
        for (const auto& a : *it) r.annotators.push_back(a.get<std::string>());
      } else {
        throw FormatError("line " + std::to_string(line_no) +
                              ": 'annotator' must be a string or list of strings",
                          line_no);
      }
    }
    if (!seen.insert(r.id).second)
      throw FormatError("line " + std::to_string(line_no) + ": duplicate id '" +
                            r.id + "'",
                        line_no);
    records.push_back(std::move(r));
  });
  return records;
}

inline std::vector<ReportRecord> load_corpus(const std::string& path) {
  auto in = corpus_detail::open_in(path);
  return load_corpus(in);
}

inline Json record_to_json(const ReportRecord& r) {
  Json j;
  j["id"] = r.id;
  j["report"] = r.report_text;
  if (r.target) j["target"] = *r.target;
  if (r.annotators.size() == 1) {
    j["annotator"] = r.annotators.front();
  } else if (!r.annotators.empty()) {
    j["annotator"] = r.annotators;
  }
  return j;
}

inline void write_corpus(const std::vector<ReportRecord>& records, std::ostream& out) {
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

struct SplitManifest {
  std::uint64_t seed = 0;
  double fraction = 0.0;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;

  friend bool operator==(const SplitManifest&, const SplitManifest&) = default;
};

inline constexpr double kDefaultTrainFraction = 0.8;

// Size of the training side: floor(fraction * n), clamped to [1, n - 1].
inline std::size_t train_size(std::size_t n, double fraction) {
  // The small offset keeps products such as 0.7 * 10 from flooring to 6.
  const auto raw =
      static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  return std::clamp<std::size_t>(raw, 1, n - 1);
}

// Seeded shuffle, then the first train_size() records train. Both id lists
// keep corpus order.
inline SplitManifest split(const std::vector<ReportRecord>& records,
                           double fraction, std::uint64_t seed) {
  if (records.size() < 2) throw InvalidArgument("split: need at least 2 records");
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InvalidArgument("split: fraction must lie in (0, 1)");
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t n_train = train_size(records.size(), fraction);
  std::vector<bool> is_train(records.size(), false);
  for (std::size_t i = 0; i < n_train; ++i) is_train[order[i]] = true;

  SplitManifest m;
  m.seed = seed;
  m.fraction = fraction;
  for (std::size_t i = 0; i < records.size(); ++i)
    (is_train[i] ? m.train_ids : m.test_ids).push_back(records[i].id);
  return m;
}

inline Json manifest_to_json(const SplitManifest& m) {
  Json j;
  j["seed"] = m.seed;
  j["fraction"] = m.fraction;
  j["train"] = m.train_ids;
  j["test"] = m.test_ids;
  return j;
}

inline SplitManifest manifest_from_json(const Json& j) {
  try {
    SplitManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.fraction = j.at("fraction").get<double>();
    m.train_ids = j.at("train").get<std::vector<std::string>>();
    m.test_ids = j.at("test").get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed split manifest: ") + e.what(), 0);
  }
}

struct PreparedExample {
  std::string id;
  std::string input_text;
  std::optional<std::string> target_text;

  friend bool operator==(const PreparedExample&, const PreparedExample&) = default;
};

struct PrepareOptions {
  // Organs to keep, in any order. Unset keeps every organ.
  std::optional<std::vector<std::string>> organs;
  std::string separator = std::string(kReportSeparator);
};

struct AssembleResult {
  PreparedExample example;
  std::vector<Diagnostic> warnings;
};

// Keeps the top-level entries whose phrase names one of `organs`.
inline ReportDoc prune_to_organs(const ReportDoc& doc,
                                 const std::vector<std::string>& organs) {
  std::set<std::string> keep;
  for (const auto& o : organs) keep.insert(normalize(o));
  ReportDoc out;
  for (const auto& e : doc.entries)
    if (keep.count(normalize(e.text())) != 0) out.entries.push_back(e);
  return out;
}

// input_text = linearized schema + " " + separator + " " + report text.
inline AssembleResult assemble_input(const ReportRecord& record,
                                     const SchemaSet& schema,
                                     const PrepareOptions& opt = {}) {
  if (opt.separator.empty() || opt.separator.find_first_of("{}") != std::string::npos)
    throw InvalidArgument("assemble_input: invalid separator '" + opt.separator + "'");
  if (record.report_text.find(opt.separator) != std::string::npos)
    throw InvalidArgument("assemble_input: report '" + record.id +
                          "' contains the separator " + opt.separator);
  const std::string context = linearize_schema(schema, opt.organs);
  if (context.find(opt.separator) != std::string::npos)
    throw InvalidArgument("assemble_input: schema text contains the separator " +
                          opt.separator);

  AssembleResult result;
  result.example.id = record.id;
  result.example.input_text = context + " " + opt.separator + " " + record.report_text;
  if (record.target) {
    if (opt.organs) {
      const ReportDoc pruned = prune_to_organs(parse_report(*record.target).doc, *opt.organs);
      if (pruned.empty())
        result.warnings.push_back({Diagnostic::Kind::kPrunedToEmpty,
                                   "target of '" + record.id +
                                       "' has none of the selected organs",
                                   {}});
      result.example.target_text = serialize_canonical(pruned);
    } else {
      result.example.target_text = record.target;
    }
  }
  return result;
}

inline void export_prepared(const std::vector<PreparedExample>& examples,
                            std::ostream& out) {
  for (const auto& ex : examples) {
    Json j;
    j["id"] = ex.id;
    j["input"] = ex.input_text;
    if (ex.target_text) j["target"] = *ex.target_text;
    out << j.dump() << '\n';
  }
}

inline std::vector<PreparedExample> import_prepared(std::istream& in) {
  using namespace corpus_detail;
  std::vector<PreparedExample> out;
  std::unordered_set<std::string> seen;
  for_each_json_line(in, [&](const Json& j, std::size_t line_no) {
    PreparedExample ex;
    ex.id = required_string(j, "id", line_no);
    ex.input_text = required_string(j, "input", line_no);
    ex.target_text = optional_string(j, "target", line_no);
    if (!seen.insert(ex.id).second)
      throw FormatError("line " + std::to_string(line_no) + ": duplicate id '" +
                            ex.id + "'",
                        line_no);
    out.push_back(std::move(ex));
  });
  return out;
}

struct Prediction {
  std::string id;
  std::string text;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

inline void export_predictions(const std::vector<Prediction>& preds, std::ostream& out) {
  for (const auto& p : preds) {
    Json j;
    j["id"] = p.id;
    j["prediction"] = p.text;
    out << j.dump() << '\n';
  }
}

// Reads a predictions file. Ids outside `known_ids` (when given) and
// repeated ids are errors; ids may be a strict subset of the known ones.
inline std::vector<Prediction> import_predictions(
    std::istream& in, const std::vector<std::string>* known_ids = nullptr) {
  using namespace corpus_detail;
  std::unordered_set<std::string> known;
  if (known_ids) known.insert(known_ids->begin(), known_ids->end());
  std::unordered_set<std::string> seen;
  std::vector<Prediction> out;
  for_each_json_line(in, [&](const Json& j, std::size_t line_no) {
    Prediction p;
    p.id = required_string(j, "id", line_no);
    p.text = required_string(j, "prediction", line_no);
    if (known_ids && known.count(p.id) == 0)
      throw FormatError("line " + std::to_string(line_no) + ": unknown id '" + p.id +
                            "'",
                        line_no);
    if (!seen.insert(p.id).second)
      throw FormatError("line " + std::to_string(line_no) + ": duplicate id '" +
                            p.id + "'",
                        line_no);
    out.push_back(std::move(p));
  });
  return out;
}

// Gold references for evaluation: any file whose lines carry "id" and
// "target" (corpus and prepared files both qualify). Lines without a
// target are skipped.
inline std::vector<Prediction> load_gold(std::istream& in) {
  using namespace corpus_detail;
  std::vector<Prediction> out;
  std::unordered_set<std::string> seen;
  for_each_json_line(in, [&](const Json& j, std::size_t line_no) {
    Prediction g;
    g.id = required_string(j, "id", line_no);
    auto target = optional_string(j, "target", line_no);
    if (!target) return;
    try {
      g.text = format_report(*target);
    } catch (const ReportParseError& e) {
      throw FormatError("line " + std::to_string(line_no) + ": gold target of '" +
                            g.id + "' is not valid ReportQL (" + e.what() + ")",
                        line_no);
    }
    if (!seen.insert(g.id).second)
      throw FormatError("line " + std::to_string(line_no) + ": duplicate id '" +
                            g.id + "'",
                        line_no);
    out.push_back(std::move(g));
  });
  return out;
}

// Prediction texts in the order of `gold`; ids without a prediction map to
// the empty string.
inline std::vector<std::string> align_predictions(const std::vector<Prediction>& preds,
                                                  const std::vector<Prediction>& gold) {
  std::unordered_map<std::string, const std::string*> by_id;
  for (const auto& p : preds) by_id[p.id] = &p.text;
  std::vector<std::string> out;
  out.reserve(gold.size());
  for (const auto& g : gold) {
    auto it = by_id.find(g.id);
    out.push_back(it == by_id.end() ? std::string() : *it->second);
  }
  return out;
}

struct SlotAgreement {
  KeyPath path;
  std::size_t items = 0;
  std::size_t agreements = 0;
  double kappa = 0.0;
};

struct AgreementReport {
  double kappa = 0.0;
  std::size_t items = 0;
  std::size_t agreements = 0;
  std::vector<SlotAgreement> per_slot;
};

namespace corpus_detail {

// Label of every schema slot path in one annotated report.
inline std::vector<std::string> slot_labels(const std::string& target,
                                            const std::vector<KeyPath>& paths) {
  std::map<std::vector<std::string>, std::vector<std::string>> values;
  for (const auto& pair : flatten(parse_report(target).doc).pairs) {
    std::vector<std::string> key;
    for (const auto& seg : pair.path) key.push_back(normalize(seg));
    values[key].push_back(normalize(pair.value));
  }
  std::vector<std::string> labels;
  labels.reserve(paths.size());
  for (const auto& path : paths) {
    std::vector<std::string> key;
    for (const auto& seg : path) key.push_back(normalize(seg));
    auto it = values.find(key);
    if (it == values.end()) {
      labels.emplace_back(kAbsentLabel);
    } else {
      auto v = it->second;
      std::sort(v.begin(), v.end());
      labels.push_back(join(v, " | "));
    }
  }
  return labels;
}

}  // namespace corpus_detail

// Cohen's kappa between two annotations of the same reports. The unit is
// one (report, schema slot path) decision; the label is the annotated value
// at that path, or ABSENT.
inline AgreementReport agreement(const std::vector<ReportRecord>& a,
                                 const std::vector<ReportRecord>& b,
                                 const SchemaSet& schema) {
  std::unordered_map<std::string, const ReportRecord*> b_by_id;
  for (const auto& r : b)
    if (!b_by_id.emplace(r.id, &r).second)
      throw InvalidArgument("agreement: duplicate id '" + r.id + "'");
  std::unordered_set<std::string> a_ids;
  for (const auto& r : a) {
    if (!a_ids.insert(r.id).second)
      throw InvalidArgument("agreement: duplicate id '" + r.id + "'");
    if (b_by_id.count(r.id) == 0)
      throw InvalidArgument("agreement: id '" + r.id + "' only in the first set");
  }
  for (const auto& r : b)
    if (a_ids.count(r.id) == 0)
      throw InvalidArgument("agreement: id '" + r.id + "' only in the second set");

  const std::vector<KeyPath> paths = list_slot_paths(schema);
  KappaInput pooled;
  std::vector<KappaInput> per_slot(paths.size());
  for (const auto& ra : a) {
    const ReportRecord& rb = *b_by_id.at(ra.id);
    if (!ra.target || !rb.target)
      throw InvalidArgument("agreement: report '" + ra.id + "' is not annotated by both");
    const auto la = corpus_detail::slot_labels(*ra.target, paths);
    const auto lb = corpus_detail::slot_labels(*rb.target, paths);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      pooled.labels_a.push_back(la[i]);
      pooled.labels_b.push_back(lb[i]);
      per_slot[i].labels_a.push_back(la[i]);
      per_slot[i].labels_b.push_back(lb[i]);
    }
  }
  if (pooled.labels_a.empty()) throw InvalidArgument("agreement: no reports");

  auto agree_count = [](const KappaInput& in) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < in.labels_a.size(); ++i)
      n += in.labels_a[i] == in.labels_b[i] ? 1 : 0;
    return n;
  };
  AgreementReport report;
  report.kappa = cohen_kappa(pooled);
  report.items = pooled.labels_a.size();
  report.agreements = agree_count(pooled);
  for (std::size_t i = 0; i < paths.size(); ++i)
    report.per_slot.push_back({paths[i], per_slot[i].labels_a.size(),
                               agree_count(per_slot[i]), cohen_kappa(per_slot[i])});
  return report;
}

// Flat JSON mirroring the reported tables.
inline Json score_to_json(const ScoreReport& r) {
  Json j;
  j["n_reports"] = r.n_reports;
  j["rouge1"] = r.rouge1.f1;
  j["rouge2"] = r.rouge2.f1;
  j["rougeL"] = r.rougeL.f1;
  j["bleu"] = r.bleu.score;
  j["bleu_canonical"] = r.bleu_canonical.score;
  j["brevity_penalty"] = r.bleu.brevity_penalty;
  j["length_ratio"] = r.bleu.length_ratio;
  j["precisions"] = r.bleu.precisions;
  j["exact_match_p"] = r.exact_match.precision;
  j["exact_match_r"] = r.exact_match.recall;
  j["exact_match_f1"] = r.exact_match.f1;
  return j;
}

}  // namespace rqlkit

#endif  // RQLKIT_CORPUS_HPP_
