// Copyright 2026 The Fogtrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fogtrace {

// Value-domain violations (out-of-range probabilities, negative durations,
// non-finite signal readings) use std::domain_error directly.

// Invalid configuration: bad thresholds, bands, malformed config files.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid payloads or files supplied at runtime.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Parse failure in a data file; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Lookup of an unknown entity (user id, snapshot key).
class NotFoundError : public std::runtime_error {
 public:
  explicit NotFoundError(const std::string& what) : std::runtime_error(what) {}
};

// Re-registration of an existing id with different contents.
class ConflictError : public std::runtime_error {
 public:
  explicit ConflictError(const std::string& what) : std::runtime_error(what) {}
};

// Snapshot that fails its integrity check; nothing is loaded.
class IntegrityError : public std::runtime_error {
 public:
  explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

// Report sink that failed to acknowledge delivery; safe to retry.
class SinkError : public std::runtime_error {
 public:
  explicit SinkError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fogtrace
