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

#include <cmath>

#include "classifiers.hpp"
#include "htd/errors.hpp"

namespace htd {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

LstmClassifier::LstmClassifier(ModelSpec spec, Rng& rng,
                               const EmbeddingMatrix* embeddings)
    : Classifier(std::move(spec)),
      embedding_("embedding", detail::initial_embeddings(spec_, rng, embeddings),
                 spec_.trainable_embeddings),
      wx_("lstm.wx",
          detail::glorot_uniform(spec_.embedding_dim, 4 * spec_.hidden_units,
                                 spec_.embedding_dim, 4.0 * spec_.hidden_units,
                                 rng)),
      wh_("lstm.wh",
          detail::glorot_uniform(spec_.hidden_units, 4 * spec_.hidden_units,
                                 spec_.hidden_units, 4.0 * spec_.hidden_units,
                                 rng)),
      b_("lstm.bias", Eigen::MatrixXd::Zero(1, 4 * spec_.hidden_units)),
      fc_w_("fc.weight",
            detail::glorot_uniform(spec_.hidden_units, spec_.hidden_units,
                                   spec_.hidden_units, spec_.hidden_units, rng)),
      fc_b_("fc.bias", Eigen::MatrixXd::Zero(1, spec_.hidden_units)),
      out_w_("output.weight",
             detail::glorot_uniform(spec_.hidden_units, spec_.num_classes,
                                    spec_.hidden_units, spec_.num_classes, rng)),
      out_b_("output.bias", Eigen::MatrixXd::Zero(1, spec_.num_classes)) {
  spec_.validate();
  if (spec_.variant != ModelVariant::kLstm) {
    throw SpecMismatch("LstmClassifier requires an lstm model spec");
  }
  // Open the forget gate at the start of training.
  b_.value.row(0).segment(spec_.hidden_units, spec_.hidden_units).setOnes();
}

Eigen::MatrixXd LstmClassifier::forward_impl(const PaddedBatch& batch,
                                             Cache* cache) const {
  const Eigen::Index n = batch.ids.rows();
  const Eigen::Index length = batch.ids.cols();
  if (n > 0 && length != spec_.sequence_length) {
    throw ShapeMismatch("batch is padded to length " + std::to_string(length) +
                        " but the model expects " +
                        std::to_string(spec_.sequence_length));
  }
  const Eigen::Index units = spec_.hidden_units;

  if (cache != nullptr) {
    cache->ids = batch.ids;
    const auto count = static_cast<std::size_t>(n);
    cache->gate_i.assign(count, Eigen::MatrixXd());
    cache->gate_f.assign(count, Eigen::MatrixXd());
    cache->gate_g.assign(count, Eigen::MatrixXd());
    cache->gate_o.assign(count, Eigen::MatrixXd());
    cache->cell.assign(count, Eigen::MatrixXd());
    cache->cell_tanh.assign(count, Eigen::MatrixXd());
    cache->hidden.assign(count, Eigen::MatrixXd());
  }

  Eigen::MatrixXd final_hidden = Eigen::MatrixXd::Zero(n, units);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::MatrixXd gi(length, units), gf(length, units), gg(length, units),
        go(length, units), tc(length, units);
    Eigen::MatrixXd cell = Eigen::MatrixXd::Zero(length + 1, units);
    Eigen::MatrixXd hidden = Eigen::MatrixXd::Zero(length + 1, units);

    for (Eigen::Index t = 0; t < length; ++t) {
      const int id = batch.ids(i, t);
      if (id < 0 || id >= spec_.vocab_size) {
        throw ShapeMismatch("token id " + std::to_string(id) +
                            " outside the model vocabulary");
      }
      const Eigen::RowVectorXd z = embedding_.value.row(id) * wx_.value +
                                   hidden.row(t) * wh_.value + b_.value.row(0);
      for (Eigen::Index u = 0; u < units; ++u) {
        gi(t, u) = sigmoid(z(u));
        gf(t, u) = sigmoid(z(units + u));
        gg(t, u) = std::tanh(z(2 * units + u));
        go(t, u) = sigmoid(z(3 * units + u));
        cell(t + 1, u) = gf(t, u) * cell(t, u) + gi(t, u) * gg(t, u);
        tc(t, u) = std::tanh(cell(t + 1, u));
        hidden(t + 1, u) = go(t, u) * tc(t, u);
      }
    }
    final_hidden.row(i) = hidden.row(length);
    if (cache != nullptr) {
      const auto idx = static_cast<std::size_t>(i);
      cache->gate_i[idx] = std::move(gi);
      cache->gate_f[idx] = std::move(gf);
      cache->gate_g[idx] = std::move(gg);
      cache->gate_o[idx] = std::move(go);
      cache->cell[idx] = std::move(cell);
      cache->cell_tanh[idx] = std::move(tc);
      cache->hidden[idx] = std::move(hidden);
    }
  }

  Eigen::MatrixXd fc_out =
      (((final_hidden * fc_w_.value).rowwise() + fc_b_.value.row(0)).array())
          .max(0.0)
          .matrix();
  if (cache != nullptr) {
    cache->final_hidden = final_hidden;
    cache->fc_out = fc_out;
  }
  const Eigen::MatrixXd logits =
      (fc_out * out_w_.value).rowwise() + out_b_.value.row(0);
  return detail::softmax_rows(logits);
}

Eigen::MatrixXd LstmClassifier::predict_proba(const PaddedBatch& batch) const {
  return forward_impl(batch, nullptr);
}

Eigen::MatrixXd LstmClassifier::train_forward(const PaddedBatch& batch) {
  Eigen::MatrixXd probs = forward_impl(batch, &cache_);
  has_cache_ = true;
  return probs;
}

void LstmClassifier::train_backward(const Eigen::MatrixXd& dlogits) {
  if (!has_cache_) {
    throw ShapeMismatch("train_backward called without a preceding train_forward");
  }
  const Eigen::Index n = cache_.final_hidden.rows();
  if (dlogits.rows() != n || dlogits.cols() != spec_.num_classes) {
    throw ShapeMismatch("dlogits shape does not match the cached batch");
  }
  for (Parameter* parameter : parameters()) parameter->grad.setZero();

  const Eigen::Index units = spec_.hidden_units;
  const Eigen::Index length = cache_.ids.cols();

  out_w_.grad = cache_.fc_out.transpose() * dlogits;
  out_b_.grad = dlogits.colwise().sum();

  // ReLU gate on the dense layer: fc_out stores post-activation values.
  Eigen::MatrixXd dfc = dlogits * out_w_.value.transpose();
  dfc = (dfc.array() * (cache_.fc_out.array() > 0.0).cast<double>()).matrix();

  fc_w_.grad = cache_.final_hidden.transpose() * dfc;
  fc_b_.grad = dfc.colwise().sum();
  const Eigen::MatrixXd dfinal = dfc * fc_w_.value.transpose();  // N x H

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const Eigen::MatrixXd& gi = cache_.gate_i[idx];
    const Eigen::MatrixXd& gf = cache_.gate_f[idx];
    const Eigen::MatrixXd& gg = cache_.gate_g[idx];
    const Eigen::MatrixXd& go = cache_.gate_o[idx];
    const Eigen::MatrixXd& cell = cache_.cell[idx];
    const Eigen::MatrixXd& tc = cache_.cell_tanh[idx];
    const Eigen::MatrixXd& hidden = cache_.hidden[idx];

    Eigen::RowVectorXd dh = dfinal.row(i);
    Eigen::RowVectorXd dc = Eigen::RowVectorXd::Zero(units);
    Eigen::RowVectorXd dz(4 * units);

    for (Eigen::Index t = length - 1; t >= 0; --t) {
      for (Eigen::Index u = 0; u < units; ++u) {
        const double d_out = dh(u) * tc(t, u);
        const double dc_u = dc(u) + dh(u) * go(t, u) * (1.0 - tc(t, u) * tc(t, u));
        const double d_in = dc_u * gg(t, u);
        const double d_new = dc_u * gi(t, u);
        const double d_forget = dc_u * cell(t, u);
        dz(u) = d_in * gi(t, u) * (1.0 - gi(t, u));
        dz(units + u) = d_forget * gf(t, u) * (1.0 - gf(t, u));
        dz(2 * units + u) = d_new * (1.0 - gg(t, u) * gg(t, u));
        dz(3 * units + u) = d_out * go(t, u) * (1.0 - go(t, u));
        dc(u) = dc_u * gf(t, u);
      }
      const int id = cache_.ids(i, t);
      wx_.grad += embedding_.value.row(id).transpose() * dz;
      wh_.grad += hidden.row(t).transpose() * dz;
      b_.grad += dz;
      if (embedding_.trainable && id != Vocabulary::kPadId) {
        embedding_.grad.row(id) += dz * wx_.value.transpose();
      }
      dh = dz * wh_.value.transpose();
    }
  }
}

std::vector<Parameter*> LstmClassifier::parameters() {
  return {&embedding_, &wx_, &wh_, &b_, &fc_w_, &fc_b_, &out_w_, &out_b_};
}

}  // namespace htd
