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

#include "htd/textprep.hpp"

#include <array>
#include <string_view>

#include "htd/unicode.hpp"

namespace htd {

namespace {

using Codepoints = std::vector<char32_t>;

char32_t ascii_lower(char32_t cp) {
  return (cp >= U'A' && cp <= U'Z') ? cp + 32 : cp;
}

bool matches_at(const Codepoints& text, std::size_t pos,
                std::string_view pattern) {
  if (pos + pattern.size() > text.size()) return false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (ascii_lower(text[pos + i]) != static_cast<char32_t>(pattern[i])) {
      return false;
    }
  }
  return true;
}

// Earliest position where a URL prefix starts, or npos.
std::size_t find_url(const Codepoints& text) {
  static constexpr std::array<std::string_view, 3> kPrefixes = {
      "http://", "https://", "www."};
  for (std::size_t i = 0; i < text.size(); ++i) {
    for (std::string_view prefix : kPrefixes) {
      if (matches_at(text, i, prefix)) return i;
    }
  }
  return static_cast<std::size_t>(-1);
}

void remove_urls(Codepoints& text) {
  for (;;) {
    const std::size_t start = find_url(text);
    if (start == static_cast<std::size_t>(-1)) return;
    std::size_t end = start;
    while (end < text.size() && !uni::is_whitespace(text[end])) ++end;
    text.erase(text.begin() + static_cast<std::ptrdiff_t>(start),
               text.begin() + static_cast<std::ptrdiff_t>(end));
  }
}

void collapse_runs(Codepoints& text) {
  Codepoints out;
  out.reserve(text.size());
  std::size_t run = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    run = (i > 0 && text[i] == text[i - 1]) ? run + 1 : 1;
    if (run <= 2) out.push_back(text[i]);
  }
  text.swap(out);
}

void normalize_whitespace(Codepoints& text) {
  Codepoints out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char32_t cp : text) {
    if (uni::is_whitespace(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    out.push_back(cp);
  }
  text.swap(out);
}

}  // namespace

bool is_punctuation(char32_t cp) {
  if (uni::is_punctuation_category(cp)) return true;
  switch (cp) {
    case U'$':
    case U'+':
    case U'<':
    case U'=':
    case U'>':
    case U'^':
    case U'|':
    case U'~':
      return true;
    default:
      return false;
  }
}

std::string clean_text(std::string_view raw) {
  Codepoints text = uni::decode_utf8(raw);

  remove_urls(text);

  Codepoints kept;
  kept.reserve(text.size());
  for (char32_t cp : text) {
    if (is_punctuation(cp)) continue;
    kept.push_back(cp);
  }
  text.swap(kept);

  kept.clear();
  for (char32_t cp : text) {
    if (uni::is_decimal_digit(cp)) continue;
    kept.push_back(cp);
  }
  text.swap(kept);

  collapse_runs(text);
  normalize_whitespace(text);
  return uni::encode_utf8(text);
}

std::vector<std::pair<std::string, std::string>> clean_corpus(
    const std::vector<CommentRecord>& records) {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(records.size());
  for (const CommentRecord& record : records) {
    out.emplace_back(record.id, clean_text(record.text));
  }
  return out;
}

}  // namespace htd
