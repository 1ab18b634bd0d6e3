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

#ifndef RQLKIT_ERROR_HPP_
#define RQLKIT_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rqlkit {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad argument to an operation (rate out of range, length mismatch, ...).
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(what) {}
};

// I/O failure: a file could not be opened, read or written.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

// 1-based line/column into some text source. Zero means unknown.
struct SourcePos {
  std::size_t line = 0;
  std::size_t column = 0;

  std::string str() const {
    return std::to_string(line) + ":" + std::to_string(column);
  }
};

// Error tied to a location inside a parsed source.
class SourceError : public Error {
 public:
  SourceError(const std::string& message, SourcePos pos)
      : Error(pos.line == 0 ? message : pos.str() + ": " + message),
        message_(message),
        pos_(pos) {}

  const std::string& message() const { return message_; }
  const SourcePos& pos() const { return pos_; }

 private:
  std::string message_;
  SourcePos pos_;
};

}  // namespace rqlkit

#endif  // RQLKIT_ERROR_HPP_
