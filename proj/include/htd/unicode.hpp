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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace htd::uni {

struct CodepointRange {
  char32_t lo;
  char32_t hi;
};

// Tables generated from Unicode data; see tools/gen_unicode_tables.py.
extern const CodepointRange kDecimalDigitRanges[];
extern const std::size_t kDecimalDigitRanges_count;
extern const CodepointRange kPunctuationRanges[];
extern const std::size_t kPunctuationRanges_count;
extern const CodepointRange kWhitespaceRanges[];
extern const std::size_t kWhitespaceRanges_count;

/// True for codepoints of Unicode general category Nd (covers native-script
/// digits such as Malayalam and Tamil ones, not just ASCII 0-9).
bool is_decimal_digit(char32_t cp);

/// True for codepoints of the Unicode P* categories.
bool is_punctuation_category(char32_t cp);

/// True for whitespace codepoints (space separators plus the usual controls).
bool is_whitespace(char32_t cp);

/// Decodes UTF-8 into codepoints. Invalid byte sequences decode to U+FFFD so
/// the function is total.
std::vector<char32_t> decode_utf8(std::string_view text);

/// Encodes codepoints back to UTF-8.
std::string encode_utf8(const std::vector<char32_t>& cps);

}  // namespace htd::uni
