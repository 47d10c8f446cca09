// Copyright 2026 The vfi360 Authors
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

namespace vfi360::config {

// Plain-text key-value config: one `dotted.key=value` per line, '#' comments.
class KeyValues {
 public:
  static KeyValues from_file(const std::string& path);
  static KeyValues from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  int64_t get_int(const std::string& key, int64_t def) const;
  bool get_bool(const std::string& key, bool def) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  // Sorted key=value lines; the canonical form that gets fingerprinted.
  std::string canonical() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// SHA-256 hex digest of a canonicalized config.
std::string fingerprint(const std::string& canonical_text);

}  // namespace vfi360::config
