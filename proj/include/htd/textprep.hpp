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

#include <string>
#include <utility>
#include <vector>

#include "htd/corpus.hpp"

namespace htd {

// Comment cleaning applied before any tokenization, identically for every
// model family. Rules run in a fixed order:
//
//   1. URL removal: substrings starting with http://, https:// or www.
//      (ASCII case-insensitive) up to the next whitespace.
//   2. Punctuation removal: Unicode category P plus the ASCII symbols
//      $ + < = > ^ | ~.
//   3. Digit removal: Unicode category Nd, so native-script digits too.
//   4. Repeated-character collapse: any run of one codepoint longer than
//      two collapses to exactly two.
//   5. Whitespace normalization: every whitespace run becomes one ASCII
//      space; leading and trailing whitespace is dropped.
//
// The pipeline is total and idempotent. Latin script is not lowercased.

/// Applies the five cleaning rules in order.
std::string clean_text(std::string_view raw);

/// Cleans every record's text, preserving order and length. Records that
/// clean to the empty string are kept with empty text.
std::vector<std::pair<std::string, std::string>> clean_corpus(
    const std::vector<CommentRecord>& records);

/// True if the codepoint is removed by the punctuation rule.
bool is_punctuation(char32_t cp);

}  // namespace htd
