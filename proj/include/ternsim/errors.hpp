// Copyright 2026 the ternsim authors
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

#include <stdexcept>
#include <string>

namespace ternsim {

/// Base class for all ternsim errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Data / format errors (CLI exit code 2).
class InvalidCodeError : public Error {
 public:
  using Error::Error;
};
class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};
class LengthMismatchError : public Error {
 public:
  using Error::Error;
};
class BadMagicError : public Error {
 public:
  using Error::Error;
};
class UnsupportedVersionError : public Error {
 public:
  using Error::Error;
};
class TruncatedPayloadError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};

// Capacity errors (CLI exit code 3).
class InsufficientCapacityError : public Error {
 public:
  using Error::Error;
};
class ModelTooLargeError : public Error {
 public:
  using Error::Error;
};

// Argument errors.
class InvalidCardsError : public Error {
 public:
  using Error::Error;
};
class InvalidBatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace ternsim
