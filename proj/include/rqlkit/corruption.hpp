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


// Span corruption for self-supervised pre-training data.
//
// A fraction of the tokens is removed in contiguous spans. Each span is
// replaced in the input by a sentinel token (<extra_id_0>, <extra_id_1>, ...)
// and the target lists every sentinel followed by the tokens it replaced:
//
//   tokens: the liver is normal in size
//   input:  the <extra_id_0> normal in <extra_id_1>
//   target: <extra_id_0> liver is <extra_id_1> size
//
// Span lengths are geometric with the requested mean, truncated to the
// remaining budget. All randomness comes from rqlkit::Rng, so an example
// is a pure function of (tokens, rate, mean_span_len, seed).

#ifndef RQLKIT_CORRUPTION_HPP_
#define RQLKIT_CORRUPTION_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rqlkit/error.hpp"
#include "rqlkit/random.hpp"
#include "rqlkit/tokenize.hpp"

namespace rqlkit {

inline constexpr std::string_view kSentinelPrefix = "<extra_id_";
inline constexpr double kDefaultCorruptionRate = 0.15;
inline constexpr double kDefaultMeanSpanLength = 3.0;

struct MaskedExample {
  Tokens input_tokens;
  Tokens target_tokens;
  std::size_t n_spans = 0;
  std::uint64_t seed = 0;
  double rate = 0.0;
  // Sentinels are sentinel_prefix + index + ">".
  std::string sentinel_prefix = std::string(kSentinelPrefix);

  friend bool operator==(const MaskedExample&, const MaskedExample&) = default;
};

inline std::string sentinel(std::string_view prefix, std::size_t index) {
  return std::string(prefix) + std::to_string(index) + ">";
}

// Index of `token` if it is a sentinel under `prefix`.
inline std::optional<std::size_t> sentinel_index(std::string_view token,
                                                 std::string_view prefix) {
  if (token.size() < prefix.size() + 2 || token.substr(0, prefix.size()) != prefix ||
      token.back() != '>')
    return std::nullopt;
  const std::string_view digits =
      token.substr(prefix.size(), token.size() - prefix.size() - 1);
  if (digits.size() > 1 && digits.front() == '0') return std::nullopt;
  std::size_t value = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  return value;
}

// Shortest prefix of the form "<extra_id_" + "_"* under which no token of
// the input reads as a sentinel.
inline std::string choose_sentinel_prefix(const Tokens& tokens) {
  std::string prefix(kSentinelPrefix);
  auto clashes = [&] {
    for (const auto& t : tokens)
      if (sentinel_index(t, prefix)) return true;
    return false;
  };
  while (clashes()) prefix += '_';
  return prefix;
}

namespace corruption_detail {

// Geometric on {1, 2, ...} with the given mean, capped at `cap`. Sampled by
// Bernoulli trials so the draw needs no transcendental functions.
inline std::size_t span_length(Rng& rng, double mean, std::size_t cap) {
  const double p = 1.0 / mean;
  std::size_t len = 1;
  if (p >= 1.0) return 1;
  while (len < cap && !rng.chance(p)) ++len;
  return len;
}

}  // namespace corruption_detail

// Number of tokens corrupt() removes from a sequence of length n.
inline std::size_t noise_budget(std::size_t n, double rate) {
  if (rate <= 0.0 || n == 0) return 0;
  const auto k = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n);
}

inline MaskedExample corrupt(const Tokens& tokens, double rate,
                             double mean_span_len, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw InvalidArgument("corrupt: rate must lie in [0, 1]");
  if (!(mean_span_len > 0.0) || std::isinf(mean_span_len))
    throw InvalidArgument("corrupt: mean_span_len must be positive");
  if (rate > 0.0 && tokens.empty())
    throw InvalidArgument("corrupt: empty token list with positive rate");

  MaskedExample ex;
  ex.seed = seed;
  ex.rate = rate;
  ex.sentinel_prefix = choose_sentinel_prefix(tokens);

  const std::size_t n = tokens.size();
  const std::size_t noise = noise_budget(n, rate);
  if (noise == 0) {
    ex.input_tokens = tokens;
    return ex;
  }
  if (noise == n) {
    const std::string s0 = sentinel(ex.sentinel_prefix, 0);
    ex.input_tokens = {s0};
    ex.target_tokens.reserve(n + 1);
    ex.target_tokens.push_back(s0);
    ex.target_tokens.insert(ex.target_tokens.end(), tokens.begin(), tokens.end());
    ex.n_spans = 1;
    return ex;
  }

  Rng rng(seed);
  std::vector<std::size_t> spans;
  for (std::size_t left = noise; left > 0;) {
    const std::size_t len = corruption_detail::span_length(rng, mean_span_len, left);
    spans.push_back(len);
    left -= len;
  }
  // k spans need k - 1 separating kept tokens; merge neighbours until the
  // kept tokens suffice.
  const std::size_t keep = n - noise;
  while (spans.size() - 1 > keep) {
    const std::size_t j = static_cast<std::size_t>(rng.below(spans.size() - 1));
    spans[j] += spans[j + 1];
    spans.erase(spans.begin() + static_cast<std::ptrdiff_t>(j) + 1);
  }
  rng.shuffle(spans);

  // Kept segments: before, between and after spans. Inner ones are >= 1.
  const std::size_t k = spans.size();
  std::vector<std::size_t> kept(k + 1, 0);
  for (std::size_t i = 1; i < k; ++i) kept[i] = 1;
  for (std::size_t extra = keep - (k - 1); extra > 0; --extra)
    ++kept[static_cast<std::size_t>(rng.below(k + 1))];

  std::size_t pos = 0;
  for (std::size_t i = 0; i <= k; ++i) {
    for (std::size_t j = 0; j < kept[i]; ++j) ex.input_tokens.push_back(tokens[pos++]);
    if (i == k) break;
    const std::string s = sentinel(ex.sentinel_prefix, i);
    ex.input_tokens.push_back(s);
    ex.target_tokens.push_back(s);
    for (std::size_t j = 0; j < spans[i]; ++j) ex.target_tokens.push_back(tokens[pos++]);
  }
  ex.n_spans = k;
  return ex;
}

// Splices target spans back in at their sentinels. Throws InvalidArgument
// if the sentinels of input and target do not line up as 0, 1, 2, ...
inline Tokens reconstruct(const MaskedExample& ex) {
  const std::string& prefix = ex.sentinel_prefix;
  std::vector<Tokens> spans;
  for (const auto& t : ex.target_tokens) {
    if (auto idx = sentinel_index(t, prefix)) {
      if (*idx != spans.size())
        throw InvalidArgument("reconstruct: target sentinel " + t + " out of order");
      spans.emplace_back();
    } else if (spans.empty()) {
      throw InvalidArgument("reconstruct: target does not start with a sentinel");
    } else {
      spans.back().push_back(t);
    }
  }
  Tokens out;
  std::size_t next = 0;
  for (const auto& t : ex.input_tokens) {
    if (auto idx = sentinel_index(t, prefix)) {
      if (*idx != next || next >= spans.size())
        throw InvalidArgument("reconstruct: sentinel mismatch at " + t);
      out.insert(out.end(), spans[next].begin(), spans[next].end());
      ++next;
    } else {
      out.push_back(t);
    }
  }
  if (next != spans.size())
    throw InvalidArgument("reconstruct: target has " + std::to_string(spans.size()) +
                          " spans but input only " + std::to_string(next) +
                          " sentinels");
  return out;
}

// Seed for report `index` of a corpus corrupted with `seed`.
inline std::uint64_t sub_seed(std::uint64_t seed, std::size_t index) {
  return seed + mix64(static_cast<std::uint64_t>(index));
}

// Word-level corruption of each report (tokenize_simple), in input order.
inline std::vector<MaskedExample> corrupt_corpus(const std::vector<std::string>& reports,
                                                 double rate, double mean_span_len,
                                                 std::uint64_t seed) {
  std::vector<MaskedExample> out;
  out.reserve(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i)
    out.push_back(corrupt(tokenize_simple(reports[i]), rate, mean_span_len,
                          sub_seed(seed, i)));
  return out;
}

// One line of the masked corpus file: {id, input, target, seed, rate}.
inline nlohmann::ordered_json masked_to_json(const MaskedExample& ex,
                                             std::string_view id) {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["input"] = join(ex.input_tokens, " ");
  j["target"] = join(ex.target_tokens, " ");
  j["seed"] = ex.seed;
  j["rate"] = ex.rate;
  return j;
}

}  // namespace rqlkit

#endif  // RQLKIT_CORRUPTION_HPP_
