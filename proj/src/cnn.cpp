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

#include "classifiers.hpp"
#include "htd/errors.hpp"

namespace htd {

CnnClassifier::CnnClassifier(ModelSpec spec, Rng& rng,
                             const EmbeddingMatrix* embeddings)
    : Classifier(std::move(spec)),
      embedding_("embedding", detail::initial_embeddings(spec_, rng, embeddings),
                 spec_.trainable_embeddings),
      conv_w_("conv.weight",
              detail::glorot_uniform(
                  static_cast<Eigen::Index>(spec_.kernel_width) * spec_.embedding_dim,
                  spec_.filters,
                  static_cast<double>(spec_.kernel_width) * spec_.embedding_dim,
                  spec_.filters, rng)),
      conv_b_("conv.bias", Eigen::MatrixXd::Zero(1, spec_.filters)),
      dense_w_("dense.weight",
               detail::glorot_uniform(spec_.filters, spec_.num_classes,
                                      spec_.filters, spec_.num_classes, rng)),
      dense_b_("dense.bias", Eigen::MatrixXd::Zero(1, spec_.num_classes)) {
  spec_.validate();
  if (spec_.variant != ModelVariant::kCnn) {
    throw SpecMismatch("CnnClassifier requires a cnn model spec");
  }
}

Eigen::MatrixXd CnnClassifier::forward_impl(const PaddedBatch& batch,
                                            Cache* cache) const {
  const Eigen::Index n = batch.ids.rows();
  const Eigen::Index length = batch.ids.cols();
  if (n > 0 && length != spec_.sequence_length) {
    throw ShapeMismatch("batch is padded to length " + std::to_string(length) +
                        " but the model expects " +
                        std::to_string(spec_.sequence_length));
  }
  const Eigen::Index dim = spec_.embedding_dim;
  const Eigen::Index kernel = spec_.kernel_width;
  const Eigen::Index filters = spec_.filters;
  const Eigen::Index num_windows = length - kernel + 1;

  Eigen::MatrixXd pooled(n, filters);
  if (cache != nullptr) {
    cache->ids = batch.ids;
    cache->windows.assign(static_cast<std::size_t>(n), Eigen::MatrixXd());
    cache->preact.assign(static_cast<std::size_t>(n), Eigen::MatrixXd());
    cache->argmax.setZero(n, filters);
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::MatrixXd windows(num_windows, kernel * dim);
    for (Eigen::Index w = 0; w < num_windows; ++w) {
      for (Eigen::Index k = 0; k < kernel; ++k) {
        const int id = batch.ids(i, w + k);
        if (id < 0 || id >= spec_.vocab_size) {
          throw ShapeMismatch("token id " + std::to_string(id) +
                              " outside the model vocabulary");
        }
        windows.row(w).segment(k * dim, dim) = embedding_.value.row(id);
      }
    }
    Eigen::MatrixXd preact = (windows * conv_w_.value).rowwise() +
                             conv_b_.value.row(0);
    for (Eigen::Index f = 0; f < filters; ++f) {
      Eigen::Index best = 0;
      for (Eigen::Index w = 1; w < num_windows; ++w) {
        if (preact(w, f) > preact(best, f)) best = w;
      }
      pooled(i, f) = std::max(preact(best, f), 0.0);
      if (cache != nullptr) cache->argmax(i, f) = static_cast<int>(best);
    }
    if (cache != nullptr) {
      cache->windows[static_cast<std::size_t>(i)] = std::move(windows);
      cache->preact[static_cast<std::size_t>(i)] = std::move(preact);
    }
  }

  if (cache != nullptr) cache->pooled = pooled;
  const Eigen::MatrixXd logits =
      (pooled * dense_w_.value).rowwise() + dense_b_.value.row(0);
  return detail::softmax_rows(logits);
}

Eigen::MatrixXd CnnClassifier::predict_proba(const PaddedBatch& batch) const {
  return forward_impl(batch, nullptr);
}

Eigen::MatrixXd CnnClassifier::train_forward(const PaddedBatch& batch) {
  Eigen::MatrixXd probs = forward_impl(batch, &cache_);
  has_cache_ = true;
  return probs;
}

void CnnClassifier::train_backward(const Eigen::MatrixXd& dlogits) {
  if (!has_cache_) {
    throw ShapeMismatch("train_backward called without a preceding train_forward");
  }
  const Eigen::Index n = cache_.pooled.rows();
  if (dlogits.rows() != n || dlogits.cols() != spec_.num_classes) {
    throw ShapeMismatch("dlogits shape does not match the cached batch");
  }
  for (Parameter* parameter : parameters()) parameter->grad.setZero();

  dense_w_.grad = cache_.pooled.transpose() * dlogits;
  dense_b_.grad = dlogits.colwise().sum();

  const Eigen::MatrixXd dpooled = dlogits * dense_w_.value.transpose();  // N x F
  const Eigen::Index dim = spec_.embedding_dim;
  const Eigen::Index kernel = spec_.kernel_width;

  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd& windows = cache_.windows[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd& preact = cache_.preact[static_cast<std::size_t>(i)];
    Eigen::MatrixXd dinput;
    if (embedding_.trainable) {
      dinput = Eigen::MatrixXd::Zero(cache_.ids.cols(), dim);
    }
    for (Eigen::Index f = 0; f < spec_.filters; ++f) {
      const Eigen::Index w = cache_.argmax(i, f);
      if (preact(w, f) <= 0.0) continue;  // ReLU gate closed
      const double g = dpooled(i, f);
      if (g == 0.0) continue;
      conv_w_.grad.col(f) += g * windows.row(w).transpose();
      conv_b_.grad(0, f) += g;
      if (embedding_.trainable) {
        for (Eigen::Index k = 0; k < kernel; ++k) {
          dinput.row(w + k) +=
              g * conv_w_.value.col(f).segment(k * dim, dim).transpose();
        }
      }
    }
    if (embedding_.trainable) {
      for (Eigen::Index pos = 0; pos < cache_.ids.cols(); ++pos) {
        const int id = cache_.ids(i, pos);
        if (id == Vocabulary::kPadId) continue;  // padding row stays fixed
        embedding_.grad.row(id) += dinput.row(pos);
      }
    }
  }
}

std::vector<Parameter*> CnnClassifier::parameters() {
  return {&embedding_, &conv_w_, &conv_b_, &dense_w_, &dense_b_};
}

}  // namespace htd
