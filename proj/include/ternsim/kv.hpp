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

#include <cstdint>
#include <map>
#include <string>

#include "ternsim/errors.hpp"

namespace ternsim {

/// `key = value` text file: one pair per line, '#' starts a comment, blank
/// lines ignored. Duplicate keys are errors.
class KvFile {
 public:
  static KvFile parse_file(const std::string& path);
  static KvFile parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key);
  std::int64_t get_int(const std::string& key);
  double get_double(const std::string& key);

  std::string get_string(const std::string& key, const std::string& fallback);
  std::int64_t get_int(const std::string& key, std::int64_t fallback);
  double get_double(const std::string& key, double fallback);

  /// Throws ConfigError if any key was never read.
  void require_all_consumed() const;

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> consumed_;
};

}  // namespace ternsim
