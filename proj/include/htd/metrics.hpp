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

/// Per-class precision/recall/F1 and support-weighted aggregates, plus the
/// plain-text and JSON renderings used by the evaluation reports.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "htd/labels.hpp"

namespace htd {

/// counts[gold][predicted].
using ConfusionMatrix =
    std::array<std::array<std::int64_t, kNumClasses>, kNumClasses>;

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct EvaluationReport {
  std::string model;     // display name, e.g. "CNN"
  std::string language;  // e.g. "malayalam"
  ConfusionMatrix matrix{};
  std::array<ClassMetrics, kNumClasses> classes{};
  double weighted_f1 = 0.0;
  double macro_f1 = 0.0;
};

/// Throws LengthMismatch when the two sequences differ in length.
ConfusionMatrix confusion(const std::vector<CategoryLabel>& gold,
                          const std::vector<CategoryLabel>& predicted);

/// Zero denominators yield zero scores rather than NaN.
std::array<ClassMetrics, kNumClasses> per_class(const ConfusionMatrix& matrix);

/// Support-weighted mean of per-class F1. Throws EmptyEvaluation when the
/// matrix holds no examples.
double weighted_f1(const ConfusionMatrix& matrix);

/// Unweighted mean of per-class F1 over all classes.
double macro_f1(const ConfusionMatrix& matrix);

/// Renders with exactly two decimals, rounding the decimal representation
/// half-up (0.855 -> "0.86").
std::string format_2dp(double value);

EvaluationReport evaluate_predictions(const std::string& model,
                                      const std::string& language,
                                      const std::vector<CategoryLabel>& gold,
                                      const std::vector<CategoryLabel>& predicted);

/// One result row: "P R F1 | P R F1 | P R F1 | WF1" with classes in label
/// order and every number formatted to two decimals.
std::string render_row(const EvaluationReport& report);

/// Aligned table of rows for one language, classes in label order.
std::string render_table(const std::string& title,
                         const std::vector<EvaluationReport>& reports);

/// Stable JSON form: model, language, per-class blocks keyed by label name,
/// weighted and macro F1. Callers may attach extra keys before writing.
nlohmann::json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& j);

}  // namespace htd

