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

/// Mini-batch training loop: shuffled epochs, Adam updates, categorical
/// cross-entropy, optional per-epoch validation scoring.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "htd/model.hpp"

namespace htd {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::string optimizer = "adam";
  std::string loss = "categorical_cross_entropy";
  std::uint64_t seed = 42;

  void validate() const;
};

/// The reference recipe per family: sequence models run 100 epochs at 1e-3,
/// transformer fine-tunes run 5 epochs at 3e-5; both use batches of 32.
TrainConfig default_train_config(ModelVariant variant);

/// Inputs for one partition. Exactly one of `padded` / `encoded` is set,
/// matching the classifier family; `labels` has one entry per row.
struct TrainingData {
  std::optional<PaddedBatch> padded;
  std::optional<EncodedTransformerBatch> encoded;
  std::vector<CategoryLabel> labels;

  std::size_t size() const;
  void validate() const;
  TrainingData take_rows(const std::vector<std::size_t>& rows) const;
};

/// Mean categorical cross-entropy over rows; probabilities are clamped to
/// [1e-7, 1 - 1e-7] before the log.
double cross_entropy(const Eigen::MatrixXd& probabilities,
                     const std::vector<CategoryLabel>& labels);

/// Adam with bias correction (beta1 0.9, beta2 0.999, epsilon 1e-8).
/// Holds one moment pair per parameter; feed it the same parameter list
/// every step.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double learning_rate, double beta1 = 0.9,
                         double beta2 = 0.999, double epsilon = 1e-8);

  void step(const std::vector<Parameter*>& parameters);

 private:
  double learning_rate_;
  double beta1_;
  double beta2_;
  double epsilon_;
  long steps_ = 0;
  std::vector<Eigen::MatrixXd> first_moment_;
  std::vector<Eigen::MatrixXd> second_moment_;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> validation_loss;
  std::optional<double> validation_weighted_f1;
};

using TrainHistory = std::vector<EpochStats>;

/// Runs the full loop and returns one entry per completed epoch. Shuffling
/// and batch order are driven by config.seed only. When an epoch produces a
/// non-finite loss the weights are restored to the last finished epoch and
/// DivergenceDetected is thrown. `validation` may be nullptr.
TrainHistory train(Classifier& classifier, const TrainingData& training,
                   const TrainingData* validation, const TrainConfig& config);

/// history.jsonl serialization: one compact JSON object per line.
std::string history_to_jsonl(const TrainHistory& history);

}  // namespace htd

