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

TransformerClassifier::TransformerClassifier(
    ModelSpec spec, Rng& rng, std::shared_ptr<const EncoderBackend> backend)
    : Classifier(std::move(spec)),
      backend_(std::move(backend)),
      head_w_("head.weight",
              detail::glorot_uniform(backend_->config().hidden_size,
                                     spec_.num_classes,
                                     backend_->config().hidden_size,
                                     spec_.num_classes, rng)),
      head_b_("head.bias", Eigen::MatrixXd::Zero(1, spec_.num_classes)) {
  spec_.validate();
  if (!spec_.is_transformer()) {
    throw SpecMismatch("TransformerClassifier requires an mbert or indicbert spec");
  }
}

Eigen::MatrixXd TransformerClassifier::forward_impl(
    const EncodedTransformerBatch& batch, Eigen::MatrixXd* cls_cache) const {
  const Eigen::MatrixXd cls = backend_->encode_cls(batch);
  if (cls_cache != nullptr) *cls_cache = cls;
  const Eigen::MatrixXd logits =
      (cls * head_w_.value).rowwise() + head_b_.value.row(0);
  return detail::softmax_rows(logits);
}

Eigen::MatrixXd TransformerClassifier::predict_proba(
    const EncodedTransformerBatch& batch) const {
  return forward_impl(batch, nullptr);
}

Eigen::MatrixXd TransformerClassifier::train_forward(
    const EncodedTransformerBatch& batch) {
  Eigen::MatrixXd probs = forward_impl(batch, &cached_cls_);
  has_cache_ = true;
  return probs;
}

void TransformerClassifier::train_backward(const Eigen::MatrixXd& dlogits) {
  if (!has_cache_) {
    throw ShapeMismatch("train_backward called without a preceding train_forward");
  }
  if (dlogits.rows() != cached_cls_.rows() ||
      dlogits.cols() != spec_.num_classes) {
    throw ShapeMismatch("dlogits shape does not match the cached batch");
  }
  head_w_.grad = cached_cls_.transpose() * dlogits;
  head_b_.grad = dlogits.colwise().sum();
}

std::vector<Parameter*> TransformerClassifier::parameters() {
  return {&head_w_, &head_b_};
}

std::size_t TransformerClassifier::parameter_count() {
  return Classifier::parameter_count() + backend_->parameter_count();
}

}  // namespace htd
