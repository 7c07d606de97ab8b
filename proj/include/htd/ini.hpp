/* Copyright 2026 The htd Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/// Minimal INI reader for run configuration files: [section] headers,
/// key = value pairs, # or ; comments.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace htd {

class IniConfig {
 public:
  IniConfig() = default;

  static IniConfig parse(const std::string& text);
  static IniConfig parse_file(const std::filesystem::path& path);

  bool has(const std::string& section, const std::string& key) const;

  /// Getters return `fallback` when the key is absent and throw ConfigError
  /// when a present value does not parse as the requested type.
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback = "") const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;

  std::vector<std::string> sections() const;
  std::vector<std::string> keys(const std::string& section) const;

  /// Throws ConfigError naming every section/key pair that is not in
  /// `allowed` (section -> allowed keys). Catches configuration typos before
  /// any work starts.
  void require_known_keys(
      const std::map<std::string, std::vector<std::string>>& allowed) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace htd

