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

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace htd {

/// Greedy longest-match-first subword tokenizer over a checkpoint's
/// vocab.txt (one piece per line; continuation pieces carry the "##"
/// prefix). Input is whitespace-split first; comments are already cleaned,
/// so no punctuation splitting is needed here.
class WordPieceTokenizer {
 public:
  static WordPieceTokenizer from_vocab_file(const std::filesystem::path& path);

  /// Piece ids for one text, without special markers.
  std::vector<int> encode(const std::string& text) const;

  int piece_id(const std::string& piece) const;  // -1 when absent
  int vocab_size() const { return static_cast<int>(pieces_.size()); }

  int pad_id() const { return pad_id_; }
  int unk_id() const { return unk_id_; }
  int cls_id() const { return cls_id_; }
  int sep_id() const { return sep_id_; }

 private:
  static constexpr std::size_t kMaxWordCodepoints = 100;

  std::vector<int> wordpiece(const std::string& word) const;

  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> ids_;
  int pad_id_ = -1;
  int unk_id_ = -1;
  int cls_id_ = -1;
  int sep_id_ = -1;
};

}  // namespace htd
