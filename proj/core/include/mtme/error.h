// Copyright 2026 The MTME Authors.
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mtme {

// Base of every error the library throws. The CLI maps subclasses onto exit
// codes, so new error kinds should derive from one of the classes below.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Argument outside an operation's mathematical domain (e.g. log of 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data. `location` is a 1-based row or line
// number when one applies, 0 otherwise.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t location = 0)
      : Error(what), location_(location) {}
  std::size_t location() const { return location_; }

 private:
  std::size_t location_;
};

// Corrupt or truncated binary file. `offset` is the byte position at which
// decoding failed.
class FormatError : public DataError {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : DataError(what + " (at byte offset " + std::to_string(offset) + ")",
                  offset) {}
  std::size_t offset() const { return location(); }
};

// NaN/Inf encountered during training or a failed gradient check.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mtme
