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

/// Classifier interface shared by the four model families, plus the model
/// specification that selects and sizes one of them.

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "htd/encoder.hpp"
#include "htd/featurize.hpp"
#include "htd/labels.hpp"
#include "htd/rng.hpp"
#include "htd/safetensors.hpp"

namespace htd {

enum class ModelVariant {
  kCnn,
  kLstm,
  kMBert,
  kIndicBert,
};

/// Parses "cnn" / "lstm" / "mbert" / "indicbert" (case-insensitive).
ModelVariant parse_variant(const std::string& text);
std::string variant_name(ModelVariant variant);

/// Human-facing name used in result tables: CNN, LSTM, mBERT, IndicBERT.
std::string display_name(ModelVariant variant);

/// Hyperparameters that size a classifier. Defaults reproduce the reference
/// configuration for each family; validate() rejects inconsistent overrides.
struct ModelSpec {
  ModelVariant variant = ModelVariant::kCnn;

  /// Shared by CNN / LSTM.
  int vocab_size = 0;        // filled from the training vocabulary
  int embedding_dim = 100;   // GloVe-style vector width
  int sequence_length = 0;   // filled from the training corpus
  bool trainable_embeddings = true;

  /// CNN.
  int filters = 128;
  int kernel_width = 5;

  /// LSTM.
  int hidden_units = 128;

  /// Transformer fine-tuning.
  std::string checkpoint;    // directory name resolved via resolve_checkpoint()
  int max_tokens = 128;

  int num_classes = kNumClasses;

  bool is_transformer() const {
    return variant == ModelVariant::kMBert || variant == ModelVariant::kIndicBert;
  }

  void validate() const;
  std::string to_json() const;
  static ModelSpec from_json(const std::string& text);
};

/// One learnable tensor. train_backward() fills grad with the current batch's
/// gradient (discarding previous contents); frozen parameters keep it zero.
struct Parameter {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
  bool trainable = true;

  Parameter(std::string param_name, Eigen::MatrixXd initial, bool is_trainable = true)
      : name(std::move(param_name)),
        value(std::move(initial)),
        grad(Eigen::MatrixXd::Zero(value.rows(), value.cols())),
        trainable(is_trainable) {}
};

/// A trainable text classifier producing a probability simplex per example.
//
/// Sequence models (CNN, LSTM) consume PaddedBatch; transformer fine-tunes
/// consume EncodedTransformerBatch. Calling the wrong overload throws
/// SpecMismatch. train_forward() caches activations for the matching
/// train_backward(), which fills Parameter::grad.
class Classifier {
 public:
  virtual ~Classifier() = default;

  const ModelSpec& spec() const { return spec_; }

  virtual Eigen::MatrixXd predict_proba(const PaddedBatch& batch) const;
  virtual Eigen::MatrixXd predict_proba(const EncodedTransformerBatch& batch) const;

  virtual Eigen::MatrixXd train_forward(const PaddedBatch& batch);
  virtual Eigen::MatrixXd train_forward(const EncodedTransformerBatch& batch);

  /// dlogits has one row per example in the last train_forward() batch.
  virtual void train_backward(const Eigen::MatrixXd& dlogits) = 0;

  virtual std::vector<Parameter*> parameters() = 0;

  /// Total scalar weights, including frozen tables and any encoder backend.
  virtual std::size_t parameter_count();

  /// Weight persistence; tensors are keyed by Parameter::name.
  TensorMap export_weights() const;
  void import_weights(const TensorMap& tensors);

 protected:
  explicit Classifier(ModelSpec spec) : spec_(std::move(spec)) {}

  ModelSpec spec_;
};

/// Builds a freshly initialized classifier. Sequence models draw their
/// initial weights from `rng`; `embeddings` seeds the embedding table (pass
/// nullptr to fall back to random initialization). Transformer variants load
/// the checkpoint backend named by the spec and initialize only the
/// classification head from `rng`.
std::unique_ptr<Classifier> build_classifier(const ModelSpec& spec, Rng& rng,
                                             const EmbeddingMatrix* embeddings);

/// Argmax decode with ties broken toward the earlier label in kLabelOrder.
std::vector<CategoryLabel> predict(const Eigen::MatrixXd& probabilities);

/// Model artifact directory: spec.json + weights.safetensors + label_order.txt
/// (+ vocab.tsv for sequence models).
void save_classifier(const Classifier& classifier,
                     const std::filesystem::path& directory,
                     const Vocabulary* vocabulary);
std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& directory,
                                            Vocabulary* vocabulary_out);

namespace detail {

/// Row-wise softmax, numerically stabilized by max subtraction.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

/// Glorot/Xavier uniform initialization over [-limit, limit] with
/// limit = sqrt(6 / (fan_in + fan_out)).
Eigen::MatrixXd glorot_uniform(Eigen::Index rows, Eigen::Index cols,
                               double fan_in, double fan_out, Rng& rng);

}  // namespace detail

}  // namespace htd

