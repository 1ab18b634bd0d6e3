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


// Command-line front end. run() is the whole program minus process setup,
// so tests can drive it with in-memory streams.
//
// Exit codes: 0 success, 1 findings (malformed or non-conforming input,
// differences), 2 usage or parse error, 3 I/O error.

#ifndef RQLKIT_CLI_HPP_
#define RQLKIT_CLI_HPP_

#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <unordered_set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rqlkit/corpus.hpp"
#include "rqlkit/corruption.hpp"
#include "rqlkit/error.hpp"
#include "rqlkit/metrics.hpp"
#include "rqlkit/reportql.hpp"
#include "rqlkit/schema.hpp"

namespace rqlkit::cli {

enum ExitStatus : int { kOk = 0, kFindings = 1, kUsage = 2, kIo = 3 };

namespace detail {

// Raised by subcommands that completed but found problems.
struct Findings {};

class Io {
 public:
  Io(std::istream& in, std::ostream& out, std::ostream& err)
      : in_(in), out_(out), err_(err) {}

  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

  // "-" or empty reads stdin.
  std::string slurp(const std::string& path) {
    if (path.empty() || path == "-")
      return {std::istreambuf_iterator<char>(in_), std::istreambuf_iterator<char>()};
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  }

  // Writes to `path`, or stdout when empty or "-".
  void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
      out_ << text;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw IoError("write to '" + path + "' failed");
  }

 private:
  std::istream& in_;
  std::ostream& out_;
  std::ostream& err_;
};

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::string name = collapse_whitespace(part);
    if (!name.empty()) out.push_back(std::move(name));
  }
  return out;
}

inline std::optional<std::vector<std::string>> organ_filter(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return split_list(s);
}

inline SchemaSet load_schema(Io& io, const std::string& path) {
  const std::string text = io.slurp(path);
  try {
    return parse_schema(text);
  } catch (const SchemaError& e) {
    throw SchemaError(e.kind(), path + ":" + e.what(), {});
  }
}

inline std::vector<ReportRecord> load_records(Io& io, const std::string& path) {
  std::istringstream in(io.slurp(path));
  return load_corpus(in);
}

inline Json entry_json(const Entry& e) {
  Json j;
  j["phrase"] = e.text();
  if (e.has_block) {
    Json children = Json::array();
    for (const auto& c : e.children) children.push_back(entry_json(c));
    j["block"] = std::move(children);
  }
  return j;
}

inline Json pairs_json(const std::vector<SlotPair>& pairs) {
  Json arr = Json::array();
  for (const auto& p : pairs) {
    Json j;
    j["path"] = path_string(p.path);
    j["value"] = p.value;
    arr.push_back(std::move(j));
  }
  return arr;
}

// Parses ReportQL, printing diagnostics as name:line:col. Throws Findings
// on a parse error.
inline ParseResult parse_or_report(Io& io, const std::string& name,
                                   const std::string& text) {
  try {
    ParseResult r = parse_report(text);
    for (const auto& w : r.warnings)
      io.err() << name << ":" << w.pos.str() << ": warning: " << w.message << '\n';
    return r;
  } catch (const ReportParseError& e) {
    io.err() << name << ":" << e.pos().str() << ": error: " << e.message()
             << " (offset " << e.offset() << ")\n";
    throw Findings{};
  }
}

inline std::string display_name(const std::string& path) {
  return path.empty() || path == "-" ? "<stdin>" : path;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::istream& in,
               std::ostream& out, std::ostream& err) {
  using detail::Io;
  Io io(in, out, err);

  CLI::App app{"rqlkit: structured radiology report toolkit"};
  app.name("rqlkit");
  app.require_subcommand(1);

  // schema
  auto* schema_cmd = app.add_subcommand("schema", "Information schema tools");
  schema_cmd->require_subcommand(1);
  std::string schema_file;
  std::string organs;

  auto* schema_check = schema_cmd->add_subcommand("check", "Validate a schema file");
  schema_check->add_option("file", schema_file, "Schema file")->required();
  schema_check->callback([&] {
    SchemaSet s;
    try {
      s = parse_schema(io.slurp(schema_file));
    } catch (const SchemaError& e) {
      err << schema_file << ":" << e.what() << '\n';
      throw detail::Findings{};
    }
    out << "ok: " << s.organs.size() << " organs, " << list_slot_paths(s).size()
        << " slot paths\n";
  });

  auto* schema_lin = schema_cmd->add_subcommand("linearize", "Render a schema as model context");
  schema_lin->add_option("file", schema_file, "Schema file")->required();
  schema_lin->add_option("--organs", organs, "Comma-separated organ filter");
  schema_lin->callback([&] {
    out << linearize_schema(detail::load_schema(io, schema_file),
                            detail::organ_filter(organs))
        << '\n';
  });

  auto* schema_paths = schema_cmd->add_subcommand("paths", "List leaf slot paths");
  schema_paths->add_option("file", schema_file, "Schema file")->required();
  schema_paths->callback([&] {
    for (const auto& p : list_slot_paths(detail::load_schema(io, schema_file)))
      out << path_string(p) << '\n';
  });

  // rql
  auto* rql_cmd = app.add_subcommand("rql", "ReportQL tools");
  rql_cmd->require_subcommand(1);
  std::string rql_file = "-";
  std::string schema_path;
  std::string pred_path, gold_path;

  auto* rql_parse = rql_cmd->add_subcommand("parse", "Parse ReportQL and print the tree as JSON");
  rql_parse->add_option("file", rql_file, "Input file (default stdin)");
  rql_parse->add_option("--schema", schema_path, "Also validate against this schema");
  rql_parse->callback([&] {
    const std::string name = detail::display_name(rql_file);
    std::optional<SchemaSet> schema;
    if (!schema_path.empty()) schema = detail::load_schema(io, schema_path);
    const ParseResult r = detail::parse_or_report(io, name, io.slurp(rql_file));
    Json entries = Json::array();
    for (const auto& e : r.doc.entries) entries.push_back(detail::entry_json(e));
    Json j;
    j["entries"] = std::move(entries);
    out << j.dump() << '\n';
    if (schema) {
      const auto violations = validate_against_schema(r.doc, *schema);
      for (const auto& v : violations)
        err << name << ": " << violation_name(v.kind) << ": " << v.message << '\n';
      if (!violations.empty()) throw detail::Findings{};
    }
  });

  auto* rql_fmt = rql_cmd->add_subcommand("fmt", "Print the canonical form");
  rql_fmt->add_option("file", rql_file, "Input file (default stdin)");
  rql_fmt->callback([&] {
    const ParseResult r =
        detail::parse_or_report(io, detail::display_name(rql_file), io.slurp(rql_file));
    out << serialize_canonical(r.doc) << '\n';
  });

  auto* rql_flatten = rql_cmd->add_subcommand("flatten", "Print path<TAB>value pairs");
  rql_flatten->add_option("file", rql_file, "Input file (default stdin)");
  rql_flatten->callback([&] {
    const ParseResult r =
        detail::parse_or_report(io, detail::display_name(rql_file), io.slurp(rql_file));
    for (const auto& p : flatten(r.doc).pairs)
      out << path_string(p.path) << '\t' << p.value << '\n';
  });

  auto* rql_diff = rql_cmd->add_subcommand("diff", "Compare predicted and gold pairs");
  rql_diff->add_option("--pred", pred_path, "Predicted ReportQL")->required();
  rql_diff->add_option("--gold", gold_path, "Gold ReportQL")->required();
  rql_diff->callback([&] {
    const ParseResult pred = detail::parse_or_report(io, pred_path, io.slurp(pred_path));
    const ParseResult gold = detail::parse_or_report(io, gold_path, io.slurp(gold_path));
    const ReportDiff d = diff_reports(pred.doc, gold.doc);
    const ExactMatchScore s = ExactMatchScore::from_counts(
        d.matched.size(), d.missing.size(), d.spurious.size());
    Json j;
    j["matched"] = detail::pairs_json(d.matched);
    j["missing"] = detail::pairs_json(d.missing);
    j["spurious"] = detail::pairs_json(d.spurious);
    j["exact_match_p"] = s.precision;
    j["exact_match_r"] = s.recall;
    j["exact_match_f1"] = s.f1;
    out << j.dump() << '\n';
    if (!d.missing.empty() || !d.spurious.empty()) throw detail::Findings{};
  });

  // mask
  std::string input_path, output_path;
  std::uint64_t seed = 0;
  double rate = kDefaultCorruptionRate;
  double mean_span = kDefaultMeanSpanLength;
  auto* mask_cmd = app.add_subcommand("mask", "Span-corrupt every report of a corpus");
  mask_cmd->add_option("--input", input_path, "Corpus JSON lines")->required();
  mask_cmd->add_option("--seed", seed, "Random seed")->required();
  mask_cmd->add_option("--rate", rate, "Fraction of tokens to mask")
      ->check(CLI::Range(0.0, 1.0));
  mask_cmd->add_option("--mean-span", mean_span, "Mean masked span length")
      ->check(CLI::PositiveNumber);
  mask_cmd->add_option("--output", output_path, "Output file (default stdout)");
  mask_cmd->callback([&] {
    const auto records = detail::load_records(io, input_path);
    std::vector<std::string> texts;
    for (const auto& r : records) texts.push_back(r.report_text);
    const auto masked = corrupt_corpus(texts, rate, mean_span, seed);
    std::string text;
    for (std::size_t i = 0; i < masked.size(); ++i)
      text += masked_to_json(masked[i], records[i].id).dump() + "\n";
    io.emit(output_path, text);
  });

  // split
  double fraction = kDefaultTrainFraction;
  auto* split_cmd = app.add_subcommand("split", "Seeded train/test split manifest");
  split_cmd->add_option("--input", input_path, "Corpus JSON lines")->required();
  split_cmd->add_option("--seed", seed, "Random seed")->required();
  split_cmd->add_option("--fraction", fraction, "Training fraction in (0, 1)");
  split_cmd->add_option("--output", output_path, "Output file (default stdout)");
  split_cmd->callback([&] {
    const auto m = split(detail::load_records(io, input_path), fraction, seed);
    io.emit(output_path, manifest_to_json(m).dump() + "\n");
  });

  // prepare
  std::string manifest_path, part = "all", separator = std::string(kReportSeparator);
  auto* prep_cmd = app.add_subcommand("prepare", "Assemble schema + report model inputs");
  prep_cmd->add_option("--input", input_path, "Corpus JSON lines")->required();
  prep_cmd->add_option("--schema", schema_path, "Schema file")->required();
  prep_cmd->add_option("--organs", organs, "Comma-separated organ filter");
  prep_cmd->add_option("--manifest", manifest_path, "Split manifest");
  prep_cmd->add_option("--part", part, "train, test or all")
      ->check(CLI::IsMember({"train", "test", "all"}));
  prep_cmd->add_option("--separator", separator, "Schema/report separator");
  prep_cmd->add_option("--output", output_path, "Output file (default stdout)");
  prep_cmd->callback([&] {
    const SchemaSet schema = detail::load_schema(io, schema_path);
    const auto records = detail::load_records(io, input_path);
    std::optional<std::unordered_set<std::string>> selected;
    if (part != "all") {
      if (manifest_path.empty())
        throw InvalidArgument("--part " + part + " needs --manifest");
      const SplitManifest m = manifest_from_json(Json::parse(io.slurp(manifest_path)));
      const auto& ids = part == "train" ? m.train_ids : m.test_ids;
      selected.emplace(ids.begin(), ids.end());
    }
    PrepareOptions opt;
    opt.organs = detail::organ_filter(organs);
    opt.separator = separator;
    std::vector<PreparedExample> examples;
    for (const auto& r : records) {
      if (selected && selected->count(r.id) == 0) continue;
      auto res = assemble_input(r, schema, opt);
      for (const auto& w : res.warnings) err << "warning: " << w.message << '\n';
      examples.push_back(std::move(res.example));
    }
    std::ostringstream text;
    export_prepared(examples, text);
    io.emit(output_path, text.str());
  });

  // score
  std::string metric = "all";
  bool pooled = false;
  unsigned threads = 1;
  auto* score_cmd = app.add_subcommand(
      "score", "Score line-aligned ReportQL text files (one report per line)");
  score_cmd->add_option("--pred", pred_path, "Predictions, one per line")->required();
  score_cmd->add_option("--gold", gold_path, "References, one per line")->required();
  score_cmd->add_option("--metric", metric, "Single metric to print")
      ->check(CLI::IsMember({"all", "rouge1", "rouge2", "rougeL", "bleu",
                             "bleu_canonical", "exact_match"}));
  score_cmd->add_flag("--pooled", pooled, "Pool ROUGE counts instead of macro-averaging");
  score_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto lines_of = [](const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
    return lines;
  };
  score_cmd->callback([&] {
    const auto preds = lines_of(io.slurp(pred_path));
    const auto golds = lines_of(io.slurp(gold_path));
    ScoreOptions opt;
    opt.pooled_rouge = pooled;
    opt.threads = threads;
    const Json j = score_to_json(score_corpus(preds, golds, opt));
    if (metric == "all") {
      out << j.dump() << '\n';
    } else {
      out << j.at(metric == "exact_match" ? "exact_match_f1" : metric).dump() << '\n';
    }
  });

  // evaluate
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "Score a predictions file against gold targets (JSON lines)");
  eval_cmd->add_option("--pred", pred_path, "Predictions {id, prediction}")->required();
  eval_cmd->add_option("--gold", gold_path, "Corpus or prepared file with targets")
      ->required();
  eval_cmd->add_flag("--pooled", pooled, "Pool ROUGE counts instead of macro-averaging");
  eval_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  eval_cmd->callback([&] {
    std::istringstream gold_in(io.slurp(gold_path));
    const auto gold = load_gold(gold_in);
    if (gold.empty()) throw InvalidArgument(gold_path + ": no records with a target");
    std::vector<std::string> ids;
    for (const auto& g : gold) ids.push_back(g.id);
    std::istringstream pred_in(io.slurp(pred_path));
    const auto preds = import_predictions(pred_in, &ids);
    if (preds.size() < gold.size())
      err << "warning: " << gold.size() - preds.size()
          << " gold records have no prediction; scored as empty\n";
    std::vector<std::string> gold_texts;
    for (const auto& g : gold) gold_texts.push_back(g.text);
    ScoreOptions opt;
    opt.pooled_rouge = pooled;
    opt.threads = threads;
    out << score_to_json(score_corpus(align_predictions(preds, gold), gold_texts, opt)).dump()
        << '\n';
  });

  // agree
  std::string a_path, b_path;
  auto* agree_cmd = app.add_subcommand("agree", "Cohen's kappa between two annotation sets");
  agree_cmd->add_option("--a", a_path, "First annotator's corpus")->required();
  agree_cmd->add_option("--b", b_path, "Second annotator's corpus")->required();
  agree_cmd->add_option("--schema", schema_path, "Schema file")->required();
  agree_cmd->callback([&] {
    const SchemaSet schema = detail::load_schema(io, schema_path);
    const AgreementReport r = agreement(detail::load_records(io, a_path),
                                        detail::load_records(io, b_path), schema);
    Json slots = Json::array();
    for (const auto& s : r.per_slot) {
      Json j;
      j["path"] = path_string(s.path);
      j["items"] = s.items;
      j["agreements"] = s.agreements;
      j["kappa"] = s.kappa;
      slots.push_back(std::move(j));
    }
    Json j;
    j["kappa"] = r.kappa;
    j["items"] = r.items;
    j["agreements"] = r.agreements;
    j["per_slot"] = std::move(slots);
    out << j.dump() << '\n';
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  } catch (const detail::Findings&) {
    return kFindings;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}

inline int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace rqlkit::cli

#endif  // RQLKIT_CLI_HPP_
