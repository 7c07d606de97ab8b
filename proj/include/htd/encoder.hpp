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
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "htd/safetensors.hpp"
#include "htd/wordpiece.hpp"

namespace htd {

using IdMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// Token-id rows with the classification marker first and the separator
/// closing every row, plus the attention mask (1 on real tokens) and
/// segment ids. Positional ids are the encoder's own affair.
struct EncodedTransformerBatch {
  IdMatrix ids;       // N x T
  IdMatrix mask;      // N x T, 0/1
  IdMatrix segments;  // N x T, all zeros for single-sentence input

  Eigen::Index rows() const { return ids.rows(); }
  Eigen::Index cols() const { return ids.cols(); }
};

/// Architecture description read from a checkpoint's config.json.
struct EncoderConfig {
  std::string model_type = "bert";  // "bert" or "albert"
  int vocab_size = 0;
  int hidden_size = 0;
  int embedding_size = 0;  // == hidden_size for BERT; smaller for ALBERT
  int num_layers = 0;
  int num_heads = 0;
  int intermediate_size = 0;
  int max_position = 512;
  int type_vocab_size = 2;
  double layer_norm_eps = 1e-12;
  bool shared_layers = false;  // ALBERT reuses one layer's weights

  void validate() const;
  static EncoderConfig from_json_file(const std::filesystem::path& path);
  void save_json(const std::filesystem::path& path) const;
};

/// The pretrained-encoder backend the transformer classifiers delegate to.
/// Implementations turn an encoded batch into one feature vector per row
/// (the classification-marker representation).
class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;
  virtual const EncoderConfig& config() const = 0;
  /// N x hidden_size matrix of per-row features. Must be const: frozen
  /// encoders serve concurrent readers.
  virtual Eigen::MatrixXd encode_cls(const EncodedTransformerBatch& batch) const = 0;
  /// The subword tokenizer matching the encoder's vocabulary.
  virtual const WordPieceTokenizer& tokenizer() const = 0;
  /// Total scalar weights held by the backend.
  virtual std::size_t parameter_count() const = 0;
};

/// Bundled backend: loads a checkpoint directory (config.json, vocab.txt,
/// model.safetensors) and runs the encoder stack on the CPU. Supports
/// post-layer-norm BERT weights and ALBERT-style shared layers with a
/// factorized embedding projection. When the checkpoint provides pooler
/// weights, encode_cls returns tanh(cls W + b), otherwise the raw
/// classification-marker state.
class CheckpointEncoder : public EncoderBackend {
 public:
  static std::shared_ptr<CheckpointEncoder> load(
      const std::filesystem::path& directory);

  const EncoderConfig& config() const override { return config_; }
  Eigen::MatrixXd encode_cls(const EncodedTransformerBatch& batch) const override;

  const WordPieceTokenizer& tokenizer() const override { return tokenizer_; }
  std::size_t parameter_count() const override;

 private:
  struct Layer {
    Eigen::MatrixXd wq, wk, wv, wo;  // hidden x hidden, y = x W + b
    Eigen::VectorXd bq, bk, bv, bo;
    Eigen::VectorXd attn_norm_gain, attn_norm_bias;
    Eigen::MatrixXd w_inter, w_out;  // hidden x inter, inter x hidden
    Eigen::VectorXd b_inter, b_out;
    Eigen::VectorXd ffn_norm_gain, ffn_norm_bias;
  };

  EncoderConfig config_;
  WordPieceTokenizer tokenizer_;
  Eigen::MatrixXd word_embeddings_;      // vocab x embedding_size
  Eigen::MatrixXd position_embeddings_;  // max_position x embedding_size
  Eigen::MatrixXd type_embeddings_;      // type_vocab x embedding_size
  Eigen::VectorXd emb_norm_gain_, emb_norm_bias_;
  Eigen::MatrixXd emb_projection_;  // embedding_size x hidden (identity-free when absent)
  Eigen::VectorXd emb_projection_bias_;
  bool has_projection_ = false;
  std::vector<Layer> layers_;
  Eigen::MatrixXd pooler_w_;
  Eigen::VectorXd pooler_b_;
  bool has_pooler_ = false;
};

/// Resolves a checkpoint name to a directory: an existing path wins;
/// otherwise the name is looked up under $HTD_CHECKPOINT_DIR (falling back
/// to ./checkpoints). Throws CheckpointUnavailable with a remediation hint.
std::filesystem::path resolve_checkpoint(const std::string& name);

/// Environment variable naming the checkpoint cache directory.
inline constexpr const char* kCheckpointDirEnv = "HTD_CHECKPOINT_DIR";

/// Builds the marker-framed batch for a list of cleaned texts: every row is
/// [CLS] pieces... [SEP] followed by padding, truncated so rows never exceed
/// max_tokens while keeping the separator.
EncodedTransformerBatch encode_with_tokenizer(
    const std::vector<std::string>& texts, const WordPieceTokenizer& tokenizer,
    int max_tokens);

}  // namespace htd
