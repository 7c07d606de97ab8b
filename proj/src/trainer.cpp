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

#include "htd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include <json.hpp>

#include "htd/errors.hpp"
#include "htd/metrics.hpp"
#include "htd/rng.hpp"

namespace htd {

namespace {

constexpr double kProbFloor = 1e-7;

Eigen::MatrixXd one_hot(const std::vector<CategoryLabel>& labels) {
  Eigen::MatrixXd targets =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), kNumClasses);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    targets(static_cast<Eigen::Index>(i), static_cast<int>(labels[i])) = 1.0;
  }
  return targets;
}

Eigen::MatrixXd forward(Classifier& classifier, const TrainingData& data) {
  if (data.padded.has_value()) return classifier.train_forward(*data.padded);
  return classifier.train_forward(*data.encoded);
}

Eigen::MatrixXd infer(const Classifier& classifier, const TrainingData& data) {
  if (data.padded.has_value()) return classifier.predict_proba(*data.padded);
  return classifier.predict_proba(*data.encoded);
}

void restore_weights(Classifier& classifier,
                     const std::vector<Eigen::MatrixXd>& snapshot) {
  const auto parameters = classifier.parameters();
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    parameters[i]->value = snapshot[i];
  }
}

std::vector<Eigen::MatrixXd> snapshot_weights(Classifier& classifier) {
  std::vector<Eigen::MatrixXd> snapshot;
  for (const Parameter* parameter : classifier.parameters()) {
    snapshot.push_back(parameter->value);
  }
  return snapshot;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (optimizer != "adam") {
    throw ConfigError("unsupported optimizer \"" + optimizer +
                      "\" (only adam is available)");
  }
  if (loss != "categorical_cross_entropy") {
    throw ConfigError("unsupported loss \"" + loss +
                      "\" (only categorical_cross_entropy is available)");
  }
}

TrainConfig default_train_config(ModelVariant variant) {
  TrainConfig config;
  if (variant == ModelVariant::kMBert || variant == ModelVariant::kIndicBert) {
    config.epochs = 5;
    config.learning_rate = 3e-5;
  }
  return config;
}

std::size_t TrainingData::size() const { return labels.size(); }

void TrainingData::validate() const {
  if (padded.has_value() == encoded.has_value()) {
    throw ConfigError("training data must carry exactly one input kind");
  }
  const Eigen::Index rows =
      padded.has_value() ? padded->rows() : encoded->rows();
  if (rows != static_cast<Eigen::Index>(labels.size())) {
    throw LengthMismatch("training data has " + std::to_string(rows) +
                         " input rows but " + std::to_string(labels.size()) +
                         " labels");
  }
}

TrainingData TrainingData::take_rows(const std::vector<std::size_t>& rows) const {
  TrainingData subset;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  if (padded.has_value()) {
    PaddedBatch batch;
    batch.ids.resize(n, padded->ids.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      batch.ids.row(i) = padded->ids.row(static_cast<Eigen::Index>(rows[i]));
    }
    subset.padded = std::move(batch);
  } else {
    EncodedTransformerBatch batch;
    batch.ids.resize(n, encoded->ids.cols());
    batch.mask.resize(n, encoded->mask.cols());
    batch.segments.resize(n, encoded->segments.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(rows[i]);
      batch.ids.row(i) = encoded->ids.row(r);
      batch.mask.row(i) = encoded->mask.row(r);
      batch.segments.row(i) = encoded->segments.row(r);
    }
    subset.encoded = std::move(batch);
  }
  subset.labels.reserve(rows.size());
  for (std::size_t r : rows) subset.labels.push_back(labels.at(r));
  return subset;
}

double cross_entropy(const Eigen::MatrixXd& probabilities,
                     const std::vector<CategoryLabel>& labels) {
  if (probabilities.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw LengthMismatch("probability rows do not match label count");
  }
  if (labels.empty()) {
    throw EmptyEvaluation("cross entropy of an empty batch is undefined");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double p = probabilities(static_cast<Eigen::Index>(i),
                             static_cast<int>(labels[i]));
    p = std::min(std::max(p, kProbFloor), 1.0 - kProbFloor);
    total -= std::log(p);
  }
  return total / static_cast<double>(labels.size());
}

AdamOptimizer::AdamOptimizer(double learning_rate, double beta1, double beta2,
                             double epsilon)
    : learning_rate_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
}

void AdamOptimizer::step(const std::vector<Parameter*>& parameters) {
  if (first_moment_.empty()) {
    for (const Parameter* parameter : parameters) {
      first_moment_.emplace_back(
          Eigen::MatrixXd::Zero(parameter->value.rows(), parameter->value.cols()));
      second_moment_.emplace_back(
          Eigen::MatrixXd::Zero(parameter->value.rows(), parameter->value.cols()));
    }
  }
  if (parameters.size() != first_moment_.size()) {
    throw ShapeMismatch("optimizer was initialized with a different parameter list");
  }
  ++steps_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    Parameter& parameter = *parameters[i];
    if (!parameter.trainable) continue;
    Eigen::MatrixXd& m = first_moment_[i];
    Eigen::MatrixXd& v = second_moment_[i];
    m = beta1_ * m + (1.0 - beta1_) * parameter.grad;
    v = (beta2_ * v.array() +
         (1.0 - beta2_) * parameter.grad.array().square())
            .matrix();
    const Eigen::ArrayXXd m_hat = m.array() / correction1;
    const Eigen::ArrayXXd v_hat = v.array() / correction2;
    parameter.value.array() -=
        learning_rate_ * m_hat / (v_hat.sqrt() + epsilon_);
  }
}

TrainHistory train(Classifier& classifier, const TrainingData& training,
                   const TrainingData* validation, const TrainConfig& config) {
  config.validate();
  training.validate();
  if (validation != nullptr) validation->validate();
  const std::size_t n = training.size();
  if (n == 0) throw ConfigError("training partition is empty");

  Rng rng(config.seed);
  AdamOptimizer optimizer(config.learning_rate);
  TrainHistory history;
  history.reserve(static_cast<std::size_t>(config.epochs));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<Eigen::MatrixXd> snapshot = snapshot_weights(classifier);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(n, start + static_cast<std::size_t>(config.batch_size));
      const std::vector<std::size_t> rows(order.begin() + start,
                                          order.begin() + stop);
      const TrainingData batch = training.take_rows(rows);
      const Eigen::MatrixXd probabilities = forward(classifier, batch);
      loss_sum += cross_entropy(probabilities, batch.labels) *
                  static_cast<double>(batch.size());
      const Eigen::MatrixXd dlogits =
          (probabilities - one_hot(batch.labels)) /
          static_cast<double>(batch.size());
      classifier.train_backward(dlogits);
      optimizer.step(classifier.parameters());
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(n);
    if (!std::isfinite(stats.train_loss)) {
      restore_weights(classifier, snapshot);
      throw DivergenceDetected("training loss became non-finite in epoch " +
                               std::to_string(epoch) +
                               "; weights restored to epoch " +
                               std::to_string(epoch - 1));
    }

    if (validation != nullptr && validation->size() > 0) {
      const Eigen::MatrixXd probabilities = infer(classifier, *validation);
      stats.validation_loss = cross_entropy(probabilities, validation->labels);
      stats.validation_weighted_f1 =
          weighted_f1(confusion(validation->labels, predict(probabilities)));
    }

    std::clog << "epoch " << epoch << "/" << config.epochs
              << " train_loss=" << stats.train_loss;
    if (stats.validation_loss.has_value()) {
      std::clog << " val_loss=" << *stats.validation_loss
                << " val_weighted_f1=" << *stats.validation_weighted_f1;
    }
    std::clog << "\n";

    history.push_back(stats);
    snapshot = snapshot_weights(classifier);
  }
  return history;
}

std::string history_to_jsonl(const TrainHistory& history) {
  std::string out;
  for (const EpochStats& stats : history) {
    nlohmann::json j;
    j["epoch"] = stats.epoch;
    j["train_loss"] = stats.train_loss;
    if (stats.validation_loss.has_value()) {
      j["validation_loss"] = *stats.validation_loss;
      j["validation_weighted_f1"] = *stats.validation_weighted_f1;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace htd
