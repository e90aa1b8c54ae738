// Copyright 2026 seqks authors.
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

#ifndef SEQKS_ERROR_HPP_
#define SEQKS_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace seqks {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two objects that must share a channel count do not.
class DimensionError : public Error {
 public:
  DimensionError(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) +
              " channels, got " + std::to_string(got)) {}
};

/// A statistic was requested over a window holding zero observations.
class EmptyWindowError : public Error {
 public:
  EmptyWindowError() : Error("window holds no observations") {}
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// File/stream content error; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(long line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Invalid experiment configuration; names the offending field.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& field, const std::string& what)
      : Error("config field '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace seqks

#endif  // SEQKS_ERROR_HPP_
