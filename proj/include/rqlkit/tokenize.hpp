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


#ifndef RQLKIT_TOKENIZE_HPP_
#define RQLKIT_TOKENIZE_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "rqlkit/text.hpp"

namespace rqlkit {

using Tokens = std::vector<std::string>;

// Lowercase, then split on whitespace runs.
inline Tokens tokenize_simple(std::string_view text) {
  return split_whitespace(lowercase(text));
}

// Like tokenize_simple(), but every ASCII character that is neither
// alphanumeric nor whitespace becomes a token of its own:
// "7 mm." -> [7, mm, .]. Non-ASCII bytes count as word characters.
inline Tokens tokenize_canonical(std::string_view text) {
  Tokens out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  for (char c : text) {
    if (is_space(c)) {
      flush();
    } else if (is_ascii(c) && !is_alnum(c)) {
      flush();
      out.emplace_back(1, c);
    } else {
      word += to_lower(c);
    }
  }
  flush();
  return out;
}

}  // namespace rqlkit

#endif  // RQLKIT_TOKENIZE_HPP_
