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

#include "htd/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "htd/errors.hpp"

namespace htd {

ConfusionMatrix confusion(const std::vector<CategoryLabel>& gold,
                          const std::vector<CategoryLabel>& predicted) {
  if (gold.size() != predicted.size()) {
    throw LengthMismatch("got " + std::to_string(gold.size()) +
                         " gold labels but " + std::to_string(predicted.size()) +
                         " predictions");
  }
  ConfusionMatrix matrix{};
  for (std::size_t i = 0; i < gold.size(); ++i) {
    matrix[static_cast<std::size_t>(gold[i])]
          [static_cast<std::size_t>(predicted[i])]++;
  }
  return matrix;
}

std::array<ClassMetrics, kNumClasses> per_class(const ConfusionMatrix& matrix) {
  std::array<ClassMetrics, kNumClasses> metrics{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::int64_t tp = matrix[c][c];
    std::int64_t gold_total = 0;
    std::int64_t pred_total = 0;
    for (std::size_t other = 0; other < kNumClasses; ++other) {
      gold_total += matrix[c][other];
      pred_total += matrix[other][c];
    }
    ClassMetrics& m = metrics[c];
    m.support = gold_total;
    m.precision = pred_total > 0 ? static_cast<double>(tp) / pred_total : 0.0;
    m.recall = gold_total > 0 ? static_cast<double>(tp) / gold_total : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
  }
  return metrics;
}

double weighted_f1(const ConfusionMatrix& matrix) {
  const auto metrics = per_class(matrix);
  double weighted_sum = 0.0;
  std::int64_t total = 0;
  for (const ClassMetrics& m : metrics) {
    weighted_sum += static_cast<double>(m.support) * m.f1;
    total += m.support;
  }
  if (total == 0) {
    throw EmptyEvaluation("cannot score an evaluation with no examples");
  }
  return weighted_sum / static_cast<double>(total);
}

double macro_f1(const ConfusionMatrix& matrix) {
  const auto metrics = per_class(matrix);
  double sum = 0.0;
  for (const ClassMetrics& m : metrics) sum += m.f1;
  return sum / static_cast<double>(kNumClasses);
}

std::string format_2dp(double value) {
  const bool negative = value < 0.0;
  if (negative) value = -value;
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.12f", value);
  const std::string printed = buffer;
  const std::size_t dot = printed.find('.');
  // All digits with the dot removed; `keep` of them precede the cut.
  std::string digits = printed.substr(0, dot) + printed.substr(dot + 1);
  const std::size_t keep = dot + 2;
  const bool round_up = digits[keep] >= '5';
  digits.resize(keep);
  if (round_up) {
    std::size_t i = digits.size();
    while (i > 0) {
      --i;
      if (digits[i] == '9') {
        digits[i] = '0';
        if (i == 0) {
          digits.insert(digits.begin(), '1');
          break;
        }
      } else {
        ++digits[i];
        break;
      }
    }
  }
  std::string out = digits.substr(0, digits.size() - 2) + "." +
                    digits.substr(digits.size() - 2);
  return negative ? "-" + out : out;
}

EvaluationReport evaluate_predictions(const std::string& model,
                                      const std::string& language,
                                      const std::vector<CategoryLabel>& gold,
                                      const std::vector<CategoryLabel>& predicted) {
  EvaluationReport report;
  report.model = model;
  report.language = language;
  report.matrix = confusion(gold, predicted);
  report.classes = per_class(report.matrix);
  report.weighted_f1 = weighted_f1(report.matrix);
  report.macro_f1 = macro_f1(report.matrix);
  return report;
}

std::string render_row(const EvaluationReport& report) {
  std::string row;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const ClassMetrics& m = report.classes[c];
    row += format_2dp(m.precision) + " " + format_2dp(m.recall) + " " +
           format_2dp(m.f1) + " | ";
  }
  row += format_2dp(report.weighted_f1);
  return row;
}

namespace {

std::string padded(std::string text, std::size_t width) {
  if (text.size() < width) text.resize(width, ' ');
  return text;
}

}  // namespace

std::string render_table(const std::string& title,
                         const std::vector<EvaluationReport>& reports) {
  std::size_t name_width = 5;  // "Model"
  for (const EvaluationReport& report : reports) {
    name_width = std::max(name_width, report.model.size());
  }
  // Each class column must fit its label and a "P R F1" triple.
  std::array<std::size_t, kNumClasses> widths{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    widths[c] = std::max<std::size_t>(label_name(kLabelOrder[c]).size(), 14);
  }

  std::ostringstream out;
  out << "== " << title << " ==\n";
  out << padded("Model", name_width);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out << "  " << padded(std::string(label_name(kLabelOrder[c])), widths[c]);
  }
  out << "  Weighted F1\n";
  out << std::string(name_width, ' ');
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out << "  " << padded("P    R    F1", widths[c]);
  }
  out << "\n";
  for (const EvaluationReport& report : reports) {
    out << padded(report.model, name_width);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const ClassMetrics& m = report.classes[c];
      out << "  "
          << padded(format_2dp(m.precision) + " " + format_2dp(m.recall) +
                        " " + format_2dp(m.f1),
                    widths[c]);
    }
    out << "  " << format_2dp(report.weighted_f1) << "\n";
  }
  return out.str();
}

nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json j;
  j["model"] = report.model;
  j["language"] = report.language;
  nlohmann::json classes;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const ClassMetrics& m = report.classes[c];
    nlohmann::json block;
    block["precision"] = m.precision;
    block["recall"] = m.recall;
    block["f1"] = m.f1;
    block["support"] = m.support;
    classes[label_name(kLabelOrder[c])] = block;
  }
  j["per_class"] = classes;
  nlohmann::json matrix = nlohmann::json::array();
  for (std::size_t g = 0; g < kNumClasses; ++g) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t p = 0; p < kNumClasses; ++p) row.push_back(report.matrix[g][p]);
    matrix.push_back(row);
  }
  j["confusion"] = matrix;
  j["weighted_f1"] = report.weighted_f1;
  j["macro_f1"] = report.macro_f1;
  return j;
}

EvaluationReport report_from_json(const nlohmann::json& j) {
  EvaluationReport report;
  try {
    report.model = j.at("model").get<std::string>();
    report.language = j.at("language").get<std::string>();
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const nlohmann::json& block = j.at("per_class").at(label_name(kLabelOrder[c]));
      report.classes[c].precision = block.at("precision").get<double>();
      report.classes[c].recall = block.at("recall").get<double>();
      report.classes[c].f1 = block.at("f1").get<double>();
      report.classes[c].support = block.at("support").get<std::int64_t>();
    }
    const nlohmann::json& matrix = j.at("confusion");
    for (std::size_t g = 0; g < kNumClasses; ++g) {
      for (std::size_t p = 0; p < kNumClasses; ++p) {
        report.matrix[g][p] = matrix.at(g).at(p).get<std::int64_t>();
      }
    }
    report.weighted_f1 = j.at("weighted_f1").get<double>();
    report.macro_f1 = j.at("macro_f1").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("evaluation report JSON is malformed: ") +
                      e.what());
  }
  return report;
}

}  // namespace htd
