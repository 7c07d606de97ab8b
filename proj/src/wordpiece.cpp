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

#include "htd/wordpiece.hpp"

#include <sstream>

#include "htd/errors.hpp"
#include "htd/featurize.hpp"
#include "htd/fsio.hpp"
#include "htd/unicode.hpp"

namespace htd {

WordPieceTokenizer WordPieceTokenizer::from_vocab_file(
    const std::filesystem::path& path) {
  WordPieceTokenizer tok;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    tok.ids_.emplace(line, static_cast<int>(tok.pieces_.size()));
    tok.pieces_.push_back(line);
  }
  tok.pad_id_ = tok.piece_id("[PAD]");
  tok.unk_id_ = tok.piece_id("[UNK]");
  tok.cls_id_ = tok.piece_id("[CLS]");
  tok.sep_id_ = tok.piece_id("[SEP]");
  if (tok.pad_id_ < 0 || tok.unk_id_ < 0 || tok.cls_id_ < 0 || tok.sep_id_ < 0) {
    throw CheckpointUnavailable(
        path.string() +
        " must define the [PAD], [UNK], [CLS] and [SEP] pieces");
  }
  return tok;
}

int WordPieceTokenizer::piece_id(const std::string& piece) const {
  const auto it = ids_.find(piece);
  return it == ids_.end() ? -1 : it->second;
}

std::vector<int> WordPieceTokenizer::wordpiece(const std::string& word) const {
  const std::vector<char32_t> cps = uni::decode_utf8(word);
  if (cps.size() > kMaxWordCodepoints) return {unk_id_};

  std::vector<int> out;
  std::size_t start = 0;
  while (start < cps.size()) {
    int match = -1;
    std::size_t match_end = start;
    for (std::size_t end = cps.size(); end > start; --end) {
      std::vector<char32_t> slice(cps.begin() + static_cast<std::ptrdiff_t>(start),
                                  cps.begin() + static_cast<std::ptrdiff_t>(end));
      std::string piece = uni::encode_utf8(slice);
      if (start > 0) piece = "##" + piece;
      const int id = piece_id(piece);
      if (id >= 0) {
        match = id;
        match_end = end;
        break;
      }
    }
    if (match < 0) return {unk_id_};  // whole word falls back to [UNK]
    out.push_back(match);
    start = match_end;
  }
  return out;
}

std::vector<int> WordPieceTokenizer::encode(const std::string& text) const {
  std::vector<int> out;
  for (const std::string& word : tokenize(text)) {
    const std::vector<int> pieces = wordpiece(word);
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

}  // namespace htd
