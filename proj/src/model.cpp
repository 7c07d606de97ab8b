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

#include "htd/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <json.hpp>

#include "classifiers.hpp"
#include "htd/errors.hpp"
#include "htd/fsio.hpp"

namespace htd {

namespace {

using nlohmann::json;

std::string lowercase_ascii(const std::string& text) {
  std::string out = text;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

}  // namespace

ModelVariant parse_variant(const std::string& text) {
  const std::string key = lowercase_ascii(text);
  if (key == "cnn") return ModelVariant::kCnn;
  if (key == "lstm") return ModelVariant::kLstm;
  if (key == "mbert") return ModelVariant::kMBert;
  if (key == "indicbert") return ModelVariant::kIndicBert;
  throw ConfigError("unknown model variant \"" + text +
                    "\" (expected cnn, lstm, mbert or indicbert)");
}

std::string variant_name(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::kCnn: return "cnn";
    case ModelVariant::kLstm: return "lstm";
    case ModelVariant::kMBert: return "mbert";
    case ModelVariant::kIndicBert: return "indicbert";
  }
  throw ConfigError("unhandled model variant");
}

std::string display_name(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::kCnn: return "CNN";
    case ModelVariant::kLstm: return "LSTM";
    case ModelVariant::kMBert: return "mBERT";
    case ModelVariant::kIndicBert: return "IndicBERT";
  }
  throw ConfigError("unhandled model variant");
}

void ModelSpec::validate() const {
  if (num_classes != kNumClasses) {
    throw ConfigError("num_classes must be " + std::to_string(kNumClasses));
  }
  if (is_transformer()) {
    if (checkpoint.empty()) {
      throw ConfigError(variant_name(variant) +
                        " requires a checkpoint directory name");
    }
    if (max_tokens < 2) {
      throw ConfigError("max_tokens must be at least 2");
    }
    return;
  }
  if (vocab_size < 3) {
    throw ConfigError("vocab_size must cover padding, OOV and one real token");
  }
  if (embedding_dim < 1) throw ConfigError("embedding_dim must be positive");
  if (sequence_length < 1) throw ConfigError("sequence_length must be positive");
  if (variant == ModelVariant::kCnn) {
    if (filters < 1) throw ConfigError("filters must be positive");
    if (kernel_width < 1) throw ConfigError("kernel_width must be positive");
    if (sequence_length < kernel_width) {
      throw ConfigError("sequence_length " + std::to_string(sequence_length) +
                        " is shorter than kernel_width " +
                        std::to_string(kernel_width));
    }
  } else if (hidden_units < 1) {
    throw ConfigError("hidden_units must be positive");
  }
}

std::string ModelSpec::to_json() const {
  json j;
  j["variant"] = variant_name(variant);
  j["vocab_size"] = vocab_size;
  j["embedding_dim"] = embedding_dim;
  j["sequence_length"] = sequence_length;
  j["trainable_embeddings"] = trainable_embeddings;
  j["filters"] = filters;
  j["kernel_width"] = kernel_width;
  j["hidden_units"] = hidden_units;
  j["checkpoint"] = checkpoint;
  j["max_tokens"] = max_tokens;
  j["num_classes"] = num_classes;
  return j.dump(2) + "\n";
}

ModelSpec ModelSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model spec is not valid JSON: ") + e.what());
  }
  ModelSpec spec;
  try {
    spec.variant = parse_variant(j.at("variant").get<std::string>());
    spec.vocab_size = j.value("vocab_size", spec.vocab_size);
    spec.embedding_dim = j.value("embedding_dim", spec.embedding_dim);
    spec.sequence_length = j.value("sequence_length", spec.sequence_length);
    spec.trainable_embeddings =
        j.value("trainable_embeddings", spec.trainable_embeddings);
    spec.filters = j.value("filters", spec.filters);
    spec.kernel_width = j.value("kernel_width", spec.kernel_width);
    spec.hidden_units = j.value("hidden_units", spec.hidden_units);
    spec.checkpoint = j.value("checkpoint", spec.checkpoint);
    spec.max_tokens = j.value("max_tokens", spec.max_tokens);
    spec.num_classes = j.value("num_classes", spec.num_classes);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model spec field is malformed: ") + e.what());
  }
  spec.validate();
  return spec;
}

Eigen::MatrixXd Classifier::predict_proba(const PaddedBatch&) const {
  throw SpecMismatch(variant_name(spec_.variant) +
                     " does not consume padded id batches");
}

Eigen::MatrixXd Classifier::predict_proba(const EncodedTransformerBatch&) const {
  throw SpecMismatch(variant_name(spec_.variant) +
                     " does not consume transformer batches");
}

Eigen::MatrixXd Classifier::train_forward(const PaddedBatch&) {
  throw SpecMismatch(variant_name(spec_.variant) +
                     " does not consume padded id batches");
}

Eigen::MatrixXd Classifier::train_forward(const EncodedTransformerBatch&) {
  throw SpecMismatch(variant_name(spec_.variant) +
                     " does not consume transformer batches");
}

std::size_t Classifier::parameter_count() {
  std::size_t count = 0;
  for (const Parameter* parameter : parameters()) {
    count += static_cast<std::size_t>(parameter->value.size());
  }
  return count;
}

TensorMap Classifier::export_weights() const {
  // Read-only traversal; parameters() is non-const because the optimizer
  // mutates through it.
  auto* self = const_cast<Classifier*>(this);
  TensorMap tensors;
  for (const Parameter* parameter : self->parameters()) {
    tensors.emplace(parameter->name, Tensor::from_matrix(parameter->value));
  }
  return tensors;
}

void Classifier::import_weights(const TensorMap& tensors) {
  for (Parameter* parameter : parameters()) {
    const auto it = tensors.find(parameter->name);
    if (it == tensors.end()) {
      throw ShapeMismatch("saved weights lack tensor \"" + parameter->name + "\"");
    }
    const Eigen::MatrixXd loaded = it->second.as_matrix();
    if (loaded.rows() != parameter->value.rows() ||
        loaded.cols() != parameter->value.cols()) {
      throw ShapeMismatch("tensor \"" + parameter->name +
                          "\" has the wrong shape for this model spec");
    }
    parameter->value = loaded;
  }
}

namespace detail {

Eigen::MatrixXd initial_embeddings(const ModelSpec& spec, Rng& rng,
                                   const EmbeddingMatrix* embeddings) {
  if (embeddings == nullptr) {
    return random_embeddings(spec.vocab_size, spec.embedding_dim, rng.next_u64());
  }
  if (embeddings->rows() != spec.vocab_size ||
      embeddings->cols() != spec.embedding_dim) {
    throw DimensionMismatch("embedding matrix does not match the model spec");
  }
  return *embeddings;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd probs(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    Eigen::ArrayXd e = (logits.row(r).array() - mx).exp();
    probs.row(r) = (e / e.sum()).matrix();
  }
  return probs;
}

Eigen::MatrixXd glorot_uniform(Eigen::Index rows, Eigen::Index cols,
                               double fan_in, double fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = rng.uniform(-limit, limit);
    }
  }
  return m;
}

}  // namespace detail

std::unique_ptr<Classifier> build_classifier(const ModelSpec& spec, Rng& rng,
                                             const EmbeddingMatrix* embeddings) {
  spec.validate();
  switch (spec.variant) {
    case ModelVariant::kCnn:
      return std::make_unique<CnnClassifier>(spec, rng, embeddings);
    case ModelVariant::kLstm:
      return std::make_unique<LstmClassifier>(spec, rng, embeddings);
    case ModelVariant::kMBert:
    case ModelVariant::kIndicBert: {
      auto backend = CheckpointEncoder::load(resolve_checkpoint(spec.checkpoint));
      return std::make_unique<TransformerClassifier>(spec, rng, std::move(backend));
    }
  }
  throw ConfigError("unhandled model variant");
}

std::vector<CategoryLabel> predict(const Eigen::MatrixXd& probabilities) {
  if (probabilities.cols() != kNumClasses) {
    throw ShapeMismatch("probability matrix must have one column per class");
  }
  std::vector<CategoryLabel> labels;
  labels.reserve(static_cast<std::size_t>(probabilities.rows()));
  for (Eigen::Index r = 0; r < probabilities.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probabilities.cols(); ++c) {
      if (probabilities(r, c) > probabilities(r, best)) best = c;
    }
    labels.push_back(static_cast<CategoryLabel>(best));
  }
  return labels;
}

void save_classifier(const Classifier& classifier,
                     const std::filesystem::path& directory,
                     const Vocabulary* vocabulary) {
  std::filesystem::create_directories(directory);
  write_file_atomic(directory / "spec.json", classifier.spec().to_json());
  save_safetensors(directory / "weights.safetensors", classifier.export_weights());
  std::string order;
  for (CategoryLabel label : kLabelOrder) {
    order += label_name(label);
    order += '\n';
  }
  write_file_atomic(directory / "label_order.txt", order);
  if (vocabulary != nullptr) {
    vocabulary->save(directory / "vocab.tsv");
  }
}

std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& directory,
                                            Vocabulary* vocabulary_out) {
  const auto spec_path = directory / "spec.json";
  if (!std::filesystem::exists(spec_path)) {
    throw MissingFile(spec_path.string());
  }
  const ModelSpec spec = ModelSpec::from_json(read_file(spec_path));

  std::string expected_order;
  for (CategoryLabel label : kLabelOrder) {
    expected_order += label_name(label);
    expected_order += '\n';
  }
  if (read_file(directory / "label_order.txt") != expected_order) {
    throw SpecMismatch("model artifact was trained with a different label order");
  }

  if (!spec.is_transformer()) {
    const auto vocab_path = directory / "vocab.tsv";
    if (!std::filesystem::exists(vocab_path)) {
      throw MissingFile(vocab_path.string());
    }
    if (vocabulary_out != nullptr) {
      *vocabulary_out = Vocabulary::load(vocab_path);
      if (vocabulary_out->size() != spec.vocab_size) {
        throw ShapeMismatch("vocab.tsv size does not match the model spec");
      }
    }
  }

  Rng rng(0);
  std::unique_ptr<Classifier> classifier = build_classifier(spec, rng, nullptr);
  classifier->import_weights(load_safetensors(directory / "weights.safetensors"));
  return classifier;
}

}  // namespace htd
