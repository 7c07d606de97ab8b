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

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace htd {

/// The three target classes. The enum order is the fixed report order and
/// the argmax tie-break order; do not reorder.
enum class CategoryLabel : int {
  kHomophobic = 0,
  kTransphobic = 1,
  kNonAntiLgbt = 2,
};

inline constexpr std::size_t kNumClasses = 3;

inline constexpr std::array<CategoryLabel, kNumClasses> kLabelOrder = {
    CategoryLabel::kHomophobic,
    CategoryLabel::kTransphobic,
    CategoryLabel::kNonAntiLgbt,
};

/// Canonical display string, as used in dataset files and reports.
std::string_view label_name(CategoryLabel label);

/// Parses a label string. Matching is case-insensitive and ignores spaces,
/// hyphens, underscores and '+', so "Non-anti-LGBT+content", "NONANTILGBT"
/// and "non anti lgbt content" all map to kNonAntiLgbt. Throws UnknownLabel
/// for anything outside the three classes.
CategoryLabel parse_label(std::string_view text);

inline int label_index(CategoryLabel label) { return static_cast<int>(label); }

enum class Language {
  kMalayalam = 0,
  kTamil = 1,
};

std::string_view language_name(Language language);

/// Accepts "malayalam" or "tamil" (case-insensitive); throws ConfigError.
Language parse_language(std::string_view text);

}  // namespace htd
