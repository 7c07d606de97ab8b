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

/// The five toolkit commands behind the CLI. Each validates its options,
/// performs the work, writes deterministic artifacts, and throws
/// ValidationError (exit 2) or RuntimeFailure (exit 3) on problems.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace htd {

/// Cleans a labeled dataset, checks its class distribution against the
/// reference corpus counts when applicable, and writes a stratified
/// train/validation/test split plus manifest.
struct PrepareOptions {
  std::filesystem::path dataset;
  std::filesystem::path out_dir;
  std::string language;
  std::uint64_t seed = 42;
  double train_fraction = 0.8;
  double validation_fraction = 0.1;
  double test_fraction = 0.1;
  /// Check the per-class counts even when the total differs from the
  /// reference corpus size (by default the check runs only on full-size
  /// corpora).
  bool expect_reference_counts = false;
  /// Downgrade a distribution mismatch from an error to a warning.
  bool allow_count_mismatch = false;
};
void cmd_prepare(const PrepareOptions& options);

/// Trains one model family on a prepared split and saves the artifact
/// directory (spec.json, weights.safetensors, label_order.txt, vocab.tsv
/// for sequence models, history.jsonl, manifest.json).
struct TrainOptions {
  std::filesystem::path splits_dir;
  std::filesystem::path out_dir;
  std::string model;
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> vectors;
  std::optional<std::string> checkpoint;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> learning_rate;
};
void cmd_train(const TrainOptions& options);

/// Scores a saved model on labeled data and writes report.json + row.txt.
/// Reruns on identical inputs produce byte-identical files.
struct EvaluateOptions {
  std::filesystem::path model_dir;
  std::optional<std::filesystem::path> splits_dir;  // uses its test.tsv
  std::optional<std::filesystem::path> dataset;     // or an explicit TSV
  std::filesystem::path out_dir;
  /// Required with --dataset unless the model manifest names the language.
  std::optional<std::string> language;
};
void cmd_evaluate(const EvaluateOptions& options);

/// Labels new comments with a saved model; writes a TSV of id, category
/// and per-class probabilities.
struct PredictOptions {
  std::filesystem::path model_dir;
  std::filesystem::path input;
  std::filesystem::path out;
  std::string language = "malayalam";
};
void cmd_predict(const PredictOptions& options);

/// Aggregates evaluation reports into per-language result tables and
/// optionally compares weighted F1 against expected values.
struct ReportOptions {
  std::vector<std::filesystem::path> reports;
  std::optional<std::filesystem::path> expected;  // TSV: language model wf1
  double tolerance = 0.05;
  /// Fail (exit 3) when any weighted F1 is outside the tolerance instead
  /// of just reporting it.
  bool strict = false;
  std::optional<std::filesystem::path> out;
};
void cmd_report(const ReportOptions& options);

}  // namespace htd
