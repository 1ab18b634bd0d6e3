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


// Evaluation metrics for generated structured reports: ROUGE-1/2/L, corpus
// BLEU with its components, slot-level exact match and Cohen's kappa.

#ifndef RQLKIT_METRICS_HPP_
#define RQLKIT_METRICS_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rqlkit/error.hpp"
#include "rqlkit/reportql.hpp"
#include "rqlkit/tokenize.hpp"

namespace rqlkit {

using TokenSpan = std::span<const std::string>;

inline double safe_ratio(double num, double den, double if_zero) {
  return den == 0.0 ? if_zero : num / den;
}

inline double harmonic_mean(double p, double r) {
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static RougeScore from_counts(std::size_t overlap, std::size_t candidate,
                                std::size_t reference) {
    RougeScore s;
    s.precision = static_cast<double>(overlap) /
                  static_cast<double>(std::max<std::size_t>(1, candidate));
    s.recall = static_cast<double>(overlap) /
               static_cast<double>(std::max<std::size_t>(1, reference));
    s.f1 = harmonic_mean(s.precision, s.recall);
    return s;
  }
};

// Overlap counts behind a ROUGE score; sums of these give the pooled score.
struct OverlapCounts {
  std::size_t overlap = 0;
  std::size_t candidate = 0;
  std::size_t reference = 0;

  OverlapCounts& operator+=(const OverlapCounts& o) {
    overlap += o.overlap;
    candidate += o.candidate;
    reference += o.reference;
    return *this;
  }
  RougeScore score() const {
    return RougeScore::from_counts(overlap, candidate, reference);
  }
  friend bool operator==(const OverlapCounts&, const OverlapCounts&) = default;
};

namespace metrics_detail {

using NgramCounts = std::map<std::vector<std::string_view>, std::size_t>;

inline NgramCounts count_ngrams(TokenSpan tokens, std::size_t n) {
  NgramCounts counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string_view> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                       tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    ++counts[std::move(gram)];
  }
  return counts;
}

inline std::size_t ngram_total(std::size_t len, std::size_t n) {
  return len >= n ? len - n + 1 : 0;
}

// Sum over n-grams of min(candidate count, reference count).
inline std::size_t clipped_overlap(const NgramCounts& cand, const NgramCounts& ref) {
  std::size_t total = 0;
  for (const auto& [gram, c] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) total += std::min(c, it->second);
  }
  return total;
}

// Length of the longest common subsequence, bit-parallel over `a`
// (Hyyro's formulation). O(|a| * |b| / 64) word operations.
inline std::size_t lcs_length(TokenSpan a, TokenSpan b) {
  if (a.empty() || b.empty()) return 0;
  const std::size_t words = (a.size() + 63) / 64;
  std::unordered_map<std::string_view, std::vector<std::uint64_t>> match;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto& bits = match[a[i]];
    if (bits.empty()) bits.assign(words, 0);
    bits[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  // Zero bits of v mark LCS-increasing positions.
  std::vector<std::uint64_t> v(words, ~std::uint64_t{0});
  for (const auto& tok : b) {
    auto it = match.find(tok);
    if (it == match.end()) continue;
    const auto& m = it->second;
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < words; ++w) {
      const std::uint64_t u = v[w] & m[w];
      const std::uint64_t sum1 = v[w] + u;
      const std::uint64_t c1 = sum1 < v[w] ? 1 : 0;
      const std::uint64_t sum = sum1 + carry;
      const std::uint64_t c2 = sum < sum1 ? 1 : 0;
      carry = c1 | c2;
      v[w] = sum | (v[w] & ~u);
    }
  }
  std::size_t ones = 0;
  for (std::size_t w = 0; w < words; ++w) {
    std::uint64_t word = v[w];
    if (w + 1 == words && a.size() % 64 != 0)
      word &= (std::uint64_t{1} << (a.size() % 64)) - 1;
    ones += static_cast<std::size_t>(std::popcount(word));
  }
  return a.size() - ones;
}

}  // namespace metrics_detail

inline OverlapCounts rouge_n_counts(TokenSpan candidate, TokenSpan reference,
                                    std::size_t n) {
  if (n == 0) throw InvalidArgument("rouge_n: n must be at least 1");
  using namespace metrics_detail;
  return {clipped_overlap(count_ngrams(candidate, n), count_ngrams(reference, n)),
          ngram_total(candidate.size(), n), ngram_total(reference.size(), n)};
}

// Clipped n-gram overlap. P = C / max(1, #candidate n-grams), R likewise.
inline RougeScore rouge_n(TokenSpan candidate, TokenSpan reference, std::size_t n) {
  return rouge_n_counts(candidate, reference, n).score();
}

inline OverlapCounts rouge_l_counts(TokenSpan candidate, TokenSpan reference) {
  return {metrics_detail::lcs_length(candidate, reference), candidate.size(),
          reference.size()};
}

// LCS-based ROUGE. Zero-length sides give zero precision/recall.
inline RougeScore rouge_l(TokenSpan candidate, TokenSpan reference) {
  return rouge_l_counts(candidate, reference).score();
}

struct BleuScore {
  double score = 0.0;
  double brevity_penalty = 0.0;
  double length_ratio = 0.0;
  std::vector<double> precisions;  // raw clipped precisions, order 1..N
};

inline constexpr std::size_t kBleuMaxOrder = 4;
inline constexpr double kBleuEpsilon = 1e-9;

// BP * exp(mean(log p)). Callers pass positive precisions.
inline double recompose_bleu(double brevity_penalty,
                             std::span<const double> precisions) {
  if (precisions.empty()) return brevity_penalty;
  double log_sum = 0.0;
  for (double p : precisions) log_sum += std::log(p);
  return brevity_penalty * std::exp(log_sum / static_cast<double>(precisions.size()));
}

// 1 when the candidate is at least as long as the reference, else
// exp(1 - 1/ratio). An empty candidate gets 0.
inline double brevity_penalty(double length_ratio) {
  if (length_ratio >= 1.0) return 1.0;
  if (length_ratio <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / length_ratio);
}

// Sufficient statistics for corpus BLEU. Adding is associative and
// commutative, so shards can be accumulated independently and merged.
struct BleuStats {
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  explicit BleuStats(std::size_t max_order = kBleuMaxOrder)
      : matches(max_order, 0), totals(max_order, 0) {}

  void add(TokenSpan candidate, TokenSpan reference) {
    using namespace metrics_detail;
    for (std::size_t n = 1; n <= matches.size(); ++n) {
      matches[n - 1] +=
          clipped_overlap(count_ngrams(candidate, n), count_ngrams(reference, n));
      totals[n - 1] += ngram_total(candidate.size(), n);
    }
    candidate_length += candidate.size();
    reference_length += reference.size();
  }

  BleuStats& operator+=(const BleuStats& o) {
    if (o.matches.size() != matches.size())
      throw InvalidArgument("BleuStats: max_order mismatch");
    for (std::size_t i = 0; i < matches.size(); ++i) {
      matches[i] += o.matches[i];
      totals[i] += o.totals[i];
    }
    candidate_length += o.candidate_length;
    reference_length += o.reference_length;
    return *this;
  }

  // Zero match counts are replaced by `epsilon` before the log.
  BleuScore score(double epsilon = kBleuEpsilon) const {
    BleuScore s;
    std::vector<double> smoothed;
    for (std::size_t i = 0; i < matches.size(); ++i) {
      const double p = safe_ratio(static_cast<double>(matches[i]),
                                  static_cast<double>(totals[i]), 0.0);
      s.precisions.push_back(p);
      smoothed.push_back(p > 0.0 ? p : epsilon);
    }
    if (reference_length == 0) {
      s.length_ratio = candidate_length == 0 ? 1.0 : static_cast<double>(candidate_length);
    } else {
      s.length_ratio = static_cast<double>(candidate_length) /
                       static_cast<double>(reference_length);
    }
    s.brevity_penalty = brevity_penalty(s.length_ratio);
    s.score = recompose_bleu(s.brevity_penalty, smoothed);
    return s;
  }

  friend bool operator==(const BleuStats&, const BleuStats&) = default;
};

inline BleuScore bleu_corpus(std::span<const Tokens> candidates,
                             std::span<const Tokens> references,
                             std::size_t max_order = kBleuMaxOrder,
                             double epsilon = kBleuEpsilon) {
  if (candidates.size() != references.size())
    throw InvalidArgument("bleu_corpus: " + std::to_string(candidates.size()) +
                          " candidates vs " + std::to_string(references.size()) +
                          " references");
  if (candidates.empty()) throw InvalidArgument("bleu_corpus: empty corpus");
  if (max_order == 0) throw InvalidArgument("bleu_corpus: max_order must be >= 1");
  BleuStats stats(max_order);
  for (std::size_t i = 0; i < candidates.size(); ++i)
    stats.add(candidates[i], references[i]);
  return stats.score(epsilon);
}

struct ExactMatchScore {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
  std::size_t matched = 0;
  std::size_t missing = 0;
  std::size_t spurious = 0;

  // Empty denominators count as perfect (vacuous) precision/recall.
  static ExactMatchScore from_counts(std::size_t matched, std::size_t missing,
                                     std::size_t spurious) {
    ExactMatchScore s;
    s.matched = matched;
    s.missing = missing;
    s.spurious = spurious;
    s.precision = safe_ratio(static_cast<double>(matched),
                             static_cast<double>(matched + spurious), 1.0);
    s.recall = safe_ratio(static_cast<double>(matched),
                          static_cast<double>(matched + missing), 1.0);
    s.f1 = harmonic_mean(s.precision, s.recall);
    return s;
  }
};

inline ExactMatchScore exact_match(const ReportDoc& pred, const ReportDoc& gold) {
  const ReportDiff d = diff_reports(pred, gold);
  return ExactMatchScore::from_counts(d.matched.size(), d.missing.size(),
                                      d.spurious.size());
}

struct KappaInput {
  std::vector<std::string> labels_a;
  std::vector<std::string> labels_b;
};

// Cohen's kappa, (p_o - p_e) / (1 - p_e), evaluated on integer counts:
// (n * agree - sum_k a_k b_k) / (n^2 - sum_k a_k b_k). Returns 1 when both
// annotators used one and the same label throughout.
inline double cohen_kappa(const KappaInput& in) {
  if (in.labels_a.size() != in.labels_b.size())
    throw InvalidArgument("cohen_kappa: label sequences differ in length (" +
                          std::to_string(in.labels_a.size()) + " vs " +
                          std::to_string(in.labels_b.size()) + ")");
  if (in.labels_a.empty()) throw InvalidArgument("cohen_kappa: empty input");
  std::map<std::string_view, std::pair<std::uint64_t, std::uint64_t>> marginals;
  std::uint64_t agree = 0;
  for (std::size_t i = 0; i < in.labels_a.size(); ++i) {
    ++marginals[in.labels_a[i]].first;
    ++marginals[in.labels_b[i]].second;
    if (in.labels_a[i] == in.labels_b[i]) ++agree;
  }
  const auto n = static_cast<std::uint64_t>(in.labels_a.size());
  std::uint64_t chance = 0;
  for (const auto& [label, ab] : marginals) chance += ab.first * ab.second;
  if (chance == n * n) return 1.0;
  const double num = static_cast<double>(n * agree) - static_cast<double>(chance);
  const double den = static_cast<double>(n * n) - static_cast<double>(chance);
  return num / den;
}

struct ScoreReport {
  RougeScore rouge1;
  RougeScore rouge2;
  RougeScore rougeL;
  BleuScore bleu;
  BleuScore bleu_canonical;
  ExactMatchScore exact_match;
  std::size_t n_reports = 0;
};

struct ScoreOptions {
  // Pool ROUGE overlap counts over the corpus instead of macro-averaging
  // per-report scores.
  bool pooled_rouge = false;
  std::size_t max_order = kBleuMaxOrder;
  double epsilon = kBleuEpsilon;
  // Worker threads for score_corpus(); results do not depend on it.
  unsigned threads = 1;
};

// Per-corpus running totals. merge() is associative, and commutative on
// every pooled count. Per-report ROUGE counts are kept in insertion order
// so the macro average is summed in the same order however the corpus was
// sharded; reordering shards only moves that sum by rounding.
class ScoreAccumulator {
 public:
  explicit ScoreAccumulator(std::size_t max_order = kBleuMaxOrder)
      : bleu_(max_order), bleu_canonical_(max_order) {}

  // Adds one (prediction, gold) pair. The gold must be valid ReportQL; a
  // prediction that fails to parse contributes all gold pairs as missing.
  void add(std::string_view pred, std::string_view gold) {
    const Tokens p = tokenize_simple(pred);
    const Tokens g = tokenize_simple(gold);
    const std::array<OverlapCounts, 3> counts = {
        rouge_n_counts(p, g, 1), rouge_n_counts(p, g, 2), rouge_l_counts(p, g)};
    for (std::size_t i = 0; i < 3; ++i) pooled_[i] += counts[i];
    per_report_.push_back(counts);
    bleu_.add(p, g);
    bleu_canonical_.add(tokenize_canonical(pred), tokenize_canonical(gold));

    const auto gold_pairs = flatten(parse_report(gold).doc).pairs;
    try {
      const ReportDiff d = diff_pairs(flatten(parse_report(pred).doc).pairs, gold_pairs);
      matched_ += d.matched.size();
      missing_ += d.missing.size();
      spurious_ += d.spurious.size();
    } catch (const ReportParseError&) {
      missing_ += gold_pairs.size();
      ++unparseable_;
    }
    ++n_;
  }

  ScoreAccumulator& merge(const ScoreAccumulator& o) {
    for (std::size_t i = 0; i < 3; ++i) pooled_[i] += o.pooled_[i];
    per_report_.insert(per_report_.end(), o.per_report_.begin(),
                       o.per_report_.end());
    bleu_ += o.bleu_;
    bleu_canonical_ += o.bleu_canonical_;
    matched_ += o.matched_;
    missing_ += o.missing_;
    spurious_ += o.spurious_;
    unparseable_ += o.unparseable_;
    n_ += o.n_;
    return *this;
  }

  std::size_t size() const { return n_; }
  std::size_t unparseable() const { return unparseable_; }
  const BleuStats& bleu_stats() const { return bleu_; }
  const OverlapCounts& pooled(std::size_t metric) const { return pooled_[metric]; }

  ScoreReport report(const ScoreOptions& opt = {}) const {
    if (n_ == 0) throw InvalidArgument("score: empty corpus");
    ScoreReport r;
    RougeScore* outs[3] = {&r.rouge1, &r.rouge2, &r.rougeL};
    for (std::size_t i = 0; i < 3; ++i) {
      if (opt.pooled_rouge) {
        *outs[i] = pooled_[i].score();
      } else {
        double p = 0.0, rec = 0.0, f = 0.0;
        for (const auto& counts : per_report_) {
          const RougeScore s = counts[i].score();
          p += s.precision;
          rec += s.recall;
          f += s.f1;
        }
        const double n = static_cast<double>(n_);
        *outs[i] = {p / n, rec / n, f / n};
      }
    }
    r.bleu = bleu_.score(opt.epsilon);
    r.bleu_canonical = bleu_canonical_.score(opt.epsilon);
    r.exact_match = ExactMatchScore::from_counts(matched_, missing_, spurious_);
    r.n_reports = n_;
    return r;
  }

 private:
  OverlapCounts pooled_[3];
  std::vector<std::array<OverlapCounts, 3>> per_report_;
  BleuStats bleu_;
  BleuStats bleu_canonical_;
  std::size_t matched_ = 0, missing_ = 0, spurious_ = 0;
  std::size_t unparseable_ = 0;
  std::size_t n_ = 0;
};

// Scores a corpus of (prediction, gold) ReportQL texts. ROUGE is
// macro-averaged over reports unless opt.pooled_rouge; both BLEU variants
// and exact match are corpus-level.
inline ScoreReport score_corpus(std::span<const std::string> preds,
                                std::span<const std::string> golds,
                                const ScoreOptions& opt = {}) {
  if (preds.size() != golds.size())
    throw InvalidArgument("score_corpus: " + std::to_string(preds.size()) +
                          " predictions vs " + std::to_string(golds.size()) +
                          " references");
  if (preds.empty()) throw InvalidArgument("score_corpus: empty corpus");

  auto run = [&](std::size_t begin, std::size_t end) {
    ScoreAccumulator acc(opt.max_order);
    for (std::size_t i = begin; i < end; ++i) acc.add(preds[i], golds[i]);
    return acc;
  };
  const std::size_t workers =
      std::clamp<std::size_t>(opt.threads, 1, preds.size());
  if (workers == 1) return run(0, preds.size()).report(opt);

  std::vector<std::future<ScoreAccumulator>> parts;
  const std::size_t chunk = (preds.size() + workers - 1) / workers;
  for (std::size_t begin = 0; begin < preds.size(); begin += chunk)
    parts.push_back(std::async(std::launch::async, run, begin,
                               std::min(preds.size(), begin + chunk)));
  ScoreAccumulator total(opt.max_order);
  for (auto& part : parts) total.merge(part.get());
  return total.report(opt);
}

}  // namespace rqlkit

#endif  // RQLKIT_METRICS_HPP_
