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

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "htd/labels.hpp"

namespace htd {

/// Token-id mapping for the CNN/LSTM path. Id 0 is PAD, id 1 is OOV; real
/// tokens occupy [2, size).
class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kOovId = 1;

  Vocabulary();

  /// Id for a token, or kOovId when unknown.
  int id_of(const std::string& token) const;

  /// Token for an id ("<pad>"/"<oov>" for the specials). Throws
  /// ShapeMismatch for out-of-range ids.
  const std::string& token_of(int id) const;

  int size() const { return static_cast<int>(tokens_.size()); }

  /// Appends the next real token; internal to building and loading.
  void add_token(const std::string& token);

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct TokenSequence {
  std::vector<int> ids;
  std::size_t original_length = 0;
};

/// Fixed-width batch of token ids. Rows are sequences padded with zeros at
/// the end; sequences longer than the width keep their prefix.
struct PaddedBatch {
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> ids;  // N x L
  std::vector<CategoryLabel> labels;                       // optional, N or empty

  Eigen::Index rows() const { return ids.rows(); }
  Eigen::Index cols() const { return ids.cols(); }
};

using EmbeddingMatrix = Eigen::MatrixXd;  // V x D, row 0 all zeros (PAD)

struct LoadedEmbeddings {
  EmbeddingMatrix matrix;
  std::size_t matched_tokens = 0;  // vocab tokens found in the vectors file
  double coverage = 0.0;           // matched / (V - 2 specials)
};

/// Whitespace tokenization (cleaned text has single-space separators, but
/// any Unicode whitespace splits).
std::vector<std::string> tokenize(const std::string& text);

/// Builds a vocabulary from cleaned texts: tokens ranked by frequency,
/// ties broken by first occurrence, truncated to max_vocab total ids
/// including the two specials. max_vocab must be >= 3.
Vocabulary build_vocabulary(const std::vector<std::string>& texts,
                            int max_vocab);

/// Encodes one cleaned text; unknown tokens map to the OOV id.
TokenSequence encode(const std::string& text, const Vocabulary& vocab);

/// Pads/truncates sequences to width `max_length` (>= 1) with trailing
/// zeros. An empty input yields a 0 x max_length batch.
PaddedBatch pad_batch(const std::vector<TokenSequence>& sequences,
                      int max_length);

/// Smallest width covering `percentile` of the sequence lengths
/// (nearest-rank), clamped to [1, cap]. Used to pick the default L.
int suggest_max_length(const std::vector<TokenSequence>& sequences,
                       double percentile = 0.95, int cap = 128);

/// Loads a textual word-vector file (token followed by D decimals per
/// line). Vocabulary tokens found in the file receive their pretrained
/// vector; missing tokens receive a uniform [-0.25, 0.25] row drawn from
/// `seed`; the PAD row is zero. Coverage is reported in the result and
/// logged to stderr.
LoadedEmbeddings load_embeddings(const std::filesystem::path& vectors_path,
                                 const Vocabulary& vocab, int dimension,
                                 std::uint64_t seed);

/// Fresh uniform [-0.25, 0.25] embeddings for every non-PAD token — the
/// corpus-local fallback when no pretrained vector file is supplied.
EmbeddingMatrix random_embeddings(int vocab_size, int dimension,
                                  std::uint64_t seed);

}  // namespace htd
