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

#include "ternsim/kv.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ternsim {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

KvFile KvFile::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path + " for reading");
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_text(buf.str(), path);
}

KvFile KvFile::parse_text(const std::string& text, const std::string& origin) {
  KvFile kv;
  kv.origin_ = origin;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << origin << ":" << lineno << ": expected `key = value`";
      throw ConfigError(msg.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      std::ostringstream msg;
      msg << origin << ":" << lineno << ": empty key";
      throw ConfigError(msg.str());
    }
    if (kv.values_.count(key)) {
      std::ostringstream msg;
      msg << origin << ":" << lineno << ": duplicate key \"" << key << "\"";
      throw ConfigError(msg.str());
    }
    kv.values_[key] = value;
    kv.consumed_[key] = false;
  }
  return kv;
}

bool KvFile::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KvFile::get_string(const std::string& key) {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError(origin_ + ": missing key \"" + key + "\"");
  consumed_[key] = true;
  return it->second;
}

std::int64_t KvFile::get_int(const std::string& key) {
  const std::string raw = get_string(key);
  char* end = nullptr;
  const long long v = std::strtoll(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0')
    throw ConfigError(origin_ + ": key \"" + key + "\" is not an integer: " +
                      raw);
  return v;
}

double KvFile::get_double(const std::string& key) {
  const std::string raw = get_string(key);
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0')
    throw ConfigError(origin_ + ": key \"" + key + "\" is not a number: " +
                      raw);
  return v;
}

std::string KvFile::get_string(const std::string& key,
                               const std::string& fallback) {
  return has(key) ? get_string(key) : fallback;
}

std::int64_t KvFile::get_int(const std::string& key, std::int64_t fallback) {
  return has(key) ? get_int(key) : fallback;
}

double KvFile::get_double(const std::string& key, double fallback) {
  return has(key) ? get_double(key) : fallback;
}

void KvFile::require_all_consumed() const {
  for (const auto& [key, consumed] : consumed_) {
    if (!consumed)
      throw ConfigError(origin_ + ": unknown key \"" + key + "\"");
  }
}

}  // namespace ternsim
