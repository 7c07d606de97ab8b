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

#include "htd/labels.hpp"

#include <cctype>

#include "htd/errors.hpp"

namespace htd {

namespace {

// Lowercases ASCII and drops separator characters so label and language
// strings compare on their letters only.
std::string canonical_key(std::string_view text) {
  std::string key;
  key.reserve(text.size());
  for (char c : text) {
    if (c == ' ' || c == '-' || c == '_' || c == '+' || c == '\t') continue;
    key.push_back(static_cast<char>(
        std::tolower(static_cast<unsigned char>(c))));
  }
  return key;
}

}  // namespace

std::string_view label_name(CategoryLabel label) {
  switch (label) {
    case CategoryLabel::kHomophobic:
      return "Homophobic";
    case CategoryLabel::kTransphobic:
      return "Transphobic";
    case CategoryLabel::kNonAntiLgbt:
      return "Non-anti-LGBT+content";
  }
  return "Unknown";
}

CategoryLabel parse_label(std::string_view text) {
  const std::string key = canonical_key(text);
  if (key == "homophobic") return CategoryLabel::kHomophobic;
  if (key == "transphobic") return CategoryLabel::kTransphobic;
  if (key == "nonantilgbtcontent" || key == "nonantilgbt") {
    return CategoryLabel::kNonAntiLgbt;
  }
  throw UnknownLabel(std::string(text));
}

std::string_view language_name(Language language) {
  switch (language) {
    case Language::kMalayalam:
      return "malayalam";
    case Language::kTamil:
      return "tamil";
  }
  return "unknown";
}

Language parse_language(std::string_view text) {
  const std::string key = canonical_key(text);
  if (key == "malayalam" || key == "ml") return Language::kMalayalam;
  if (key == "tamil" || key == "ta") return Language::kTamil;
  throw ConfigError("unknown language: \"" + std::string(text) +
                    "\" (expected malayalam or tamil)");
}

}  // namespace htd
