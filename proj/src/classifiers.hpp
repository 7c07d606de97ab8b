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

// Concrete classifier families. Internal to the library; construct through
// build_classifier() / load_classifier() in htd/model.hpp.

#pragma once

#include <memory>
#include <vector>

#include "htd/model.hpp"

namespace htd {
namespace detail {

// Validates a caller-supplied embedding table against the spec, or draws a
// random one when none is given.
Eigen::MatrixXd initial_embeddings(const ModelSpec& spec, Rng& rng,
                                   const EmbeddingMatrix* embeddings);

}  // namespace detail

// Embedding -> 1D convolution (valid padding) -> ReLU -> global max pooling
// -> dense softmax head.
class CnnClassifier : public Classifier {
 public:
  CnnClassifier(ModelSpec spec, Rng& rng, const EmbeddingMatrix* embeddings);

  Eigen::MatrixXd predict_proba(const PaddedBatch& batch) const override;
  Eigen::MatrixXd train_forward(const PaddedBatch& batch) override;
  void train_backward(const Eigen::MatrixXd& dlogits) override;
  std::vector<Parameter*> parameters() override;

 private:
  struct Cache {
    IdMatrix ids;                          // N x L
    std::vector<Eigen::MatrixXd> windows;  // per example: (L-K+1) x (K*D)
    std::vector<Eigen::MatrixXd> preact;   // per example: (L-K+1) x F
    Eigen::MatrixXd pooled;                // N x F
    IdMatrix argmax;                       // N x F window index of each max
  };

  Eigen::MatrixXd forward_impl(const PaddedBatch& batch, Cache* cache) const;

  Parameter embedding_;  // V x D
  Parameter conv_w_;     // (K*D) x F
  Parameter conv_b_;     // 1 x F
  Parameter dense_w_;    // F x C
  Parameter dense_b_;    // 1 x C
  Cache cache_;
  bool has_cache_ = false;
};

// Embedding -> LSTM (final state) -> dense ReLU -> dense softmax head.
// Padded steps are processed like any other step (the padding embedding is
// zero and frozen), matching the plain non-masked recurrent baseline.
class LstmClassifier : public Classifier {
 public:
  LstmClassifier(ModelSpec spec, Rng& rng, const EmbeddingMatrix* embeddings);

  Eigen::MatrixXd predict_proba(const PaddedBatch& batch) const override;
  Eigen::MatrixXd train_forward(const PaddedBatch& batch) override;
  void train_backward(const Eigen::MatrixXd& dlogits) override;
  std::vector<Parameter*> parameters() override;

 private:
  struct Cache {
    IdMatrix ids;  // N x L
    // Per example, rows indexed by timestep. Gate order is [i, f, g, o].
    std::vector<Eigen::MatrixXd> gate_i, gate_f, gate_g, gate_o;  // L x H
    std::vector<Eigen::MatrixXd> cell, cell_tanh;                 // L x H
    std::vector<Eigen::MatrixXd> hidden;                          // (L+1) x H
    Eigen::MatrixXd final_hidden;  // N x H
    Eigen::MatrixXd fc_out;        // N x H, after ReLU
  };

  Eigen::MatrixXd forward_impl(const PaddedBatch& batch, Cache* cache) const;

  Parameter embedding_;  // V x D
  Parameter wx_;         // D x 4H
  Parameter wh_;         // H x 4H
  Parameter b_;          // 1 x 4H
  Parameter fc_w_;       // H x H
  Parameter fc_b_;       // 1 x H
  Parameter out_w_;      // H x C
  Parameter out_b_;      // 1 x C
  Cache cache_;
  bool has_cache_ = false;
};

// Pretrained encoder backend + dense softmax head over the [CLS] vector.
// Fine-tuning trains the head; the backend stays frozen.
class TransformerClassifier : public Classifier {
 public:
  TransformerClassifier(ModelSpec spec, Rng& rng,
                        std::shared_ptr<const EncoderBackend> backend);

  Eigen::MatrixXd predict_proba(const EncodedTransformerBatch& batch) const override;
  Eigen::MatrixXd train_forward(const EncodedTransformerBatch& batch) override;
  void train_backward(const Eigen::MatrixXd& dlogits) override;
  std::vector<Parameter*> parameters() override;
  std::size_t parameter_count() override;

  const EncoderBackend& backend() const { return *backend_; }

 private:
  Eigen::MatrixXd forward_impl(const EncodedTransformerBatch& batch,
                               Eigen::MatrixXd* cls_cache) const;

  std::shared_ptr<const EncoderBackend> backend_;
  Parameter head_w_;  // H x C
  Parameter head_b_;  // 1 x C
  Eigen::MatrixXd cached_cls_;  // N x H from the last train_forward
  bool has_cache_ = false;
};

}  // namespace htd

