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

#include "htd/ini.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "htd/errors.hpp"
#include "htd/fsio.hpp"

namespace htd {

namespace {

std::string trim(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
    --end;
  }
  return text.substr(begin, end - begin);
}

std::string lowercase(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return text;
}

}  // namespace

IniConfig IniConfig::parse(const std::string& text) {
  IniConfig config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']' || stripped.size() < 3) {
        throw ConfigError("config line " + std::to_string(number) +
                          ": malformed section header \"" + stripped + "\"");
      }
      section = trim(stripped.substr(1, stripped.size() - 2));
      config.values_[section];  // an empty section is legal
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) +
                        ": expected key = value, got \"" + stripped + "\"");
    }
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(number) +
                        ": empty key");
    }
    config.values_[section][key] = trim(stripped.substr(eq + 1));
  }
  return config;
}

IniConfig IniConfig::parse_file(const std::filesystem::path& path) {
  return parse(read_file(path));
}

bool IniConfig::has(const std::string& section, const std::string& key) const {
  const auto it = values_.find(section);
  return it != values_.end() && it->second.count(key) > 0;
}

std::string IniConfig::get(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  const auto it = values_.find(section);
  if (it == values_.end()) return fallback;
  const auto kv = it->second.find(key);
  return kv != it->second.end() ? kv->second : fallback;
}

std::int64_t IniConfig::get_int(const std::string& section,
                                const std::string& key,
                                std::int64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = get(section, key);
  try {
    std::size_t used = 0;
    const std::int64_t value = std::stoll(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return value;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + " = \"" + raw +
                      "\" is not an integer");
  }
}

double IniConfig::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = get(section, key);
  try {
    std::size_t used = 0;
    const double value = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return value;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + " = \"" + raw +
                      "\" is not a number");
  }
}

bool IniConfig::get_bool(const std::string& section, const std::string& key,
                         bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = lowercase(get(section, key));
  if (raw == "true" || raw == "yes" || raw == "on" || raw == "1") return true;
  if (raw == "false" || raw == "no" || raw == "off" || raw == "0") return false;
  throw ConfigError("[" + section + "] " + key + " = \"" + get(section, key) +
                    "\" is not a boolean");
}

std::vector<std::string> IniConfig::sections() const {
  std::vector<std::string> names;
  names.reserve(values_.size());
  for (const auto& [name, keys] : values_) names.push_back(name);
  return names;
}

std::vector<std::string> IniConfig::keys(const std::string& section) const {
  std::vector<std::string> names;
  const auto it = values_.find(section);
  if (it == values_.end()) return names;
  names.reserve(it->second.size());
  for (const auto& [key, value] : it->second) names.push_back(key);
  return names;
}

void IniConfig::require_known_keys(
    const std::map<std::string, std::vector<std::string>>& allowed) const {
  std::string complaints;
  for (const auto& [section, keys] : values_) {
    const auto entry = allowed.find(section);
    if (entry == allowed.end()) {
      complaints += " [" + section + "]";
      continue;
    }
    for (const auto& [key, value] : keys) {
      if (std::find(entry->second.begin(), entry->second.end(), key) ==
          entry->second.end()) {
        complaints += " [" + section + "] " + key;
      }
    }
  }
  if (!complaints.empty()) {
    throw ConfigError("unknown config entries:" + complaints);
  }
}

}  // namespace htd
