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

#include "htd/encoder.hpp"

#include <cmath>
#include <cstdlib>

#include <json.hpp>

#include "htd/errors.hpp"
#include "htd/fsio.hpp"

namespace htd {

namespace {

using nlohmann::json;

constexpr double kMaskPenalty = -1e9;

void layer_norm_rows(Eigen::MatrixXd& x, const Eigen::VectorXd& gain,
                     const Eigen::VectorXd& bias, double eps) {
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    const double inv = 1.0 / std::sqrt(var + eps);
    x.row(r) = (((x.row(r).array() - mean) * inv) * gain.transpose().array() +
                bias.transpose().array())
                   .matrix();
  }
}

double gelu(double v) { return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))); }

Eigen::MatrixXd require_matrix(const TensorMap& tensors, const std::string& name) {
  const auto it = tensors.find(name);
  if (it == tensors.end()) {
    throw CheckpointUnavailable("weights tensor \"" + name + "\" is missing");
  }
  return it->second.as_matrix();
}

Eigen::VectorXd require_vector(const TensorMap& tensors, const std::string& name) {
  const auto it = tensors.find(name);
  if (it == tensors.end()) {
    throw CheckpointUnavailable("weights tensor \"" + name + "\" is missing");
  }
  return it->second.as_vector();
}

}  // namespace

void EncoderConfig::validate() const {
  if (model_type != "bert" && model_type != "albert") {
    throw ConfigError("encoder model_type must be bert or albert, got " +
                      model_type);
  }
  if (vocab_size < 5 || hidden_size < 1 || embedding_size < 1 ||
      num_layers < 1 || num_heads < 1 || intermediate_size < 1 ||
      max_position < 2 || type_vocab_size < 1) {
    throw ConfigError("encoder config has non-positive dimensions");
  }
  if (hidden_size % num_heads != 0) {
    throw ConfigError("hidden_size must be divisible by num_heads");
  }
}

EncoderConfig EncoderConfig::from_json_file(const std::filesystem::path& path) {
  const json j = json::parse(read_file(path));
  EncoderConfig config;
  config.model_type = j.value("model_type", "bert");
  config.vocab_size = j.at("vocab_size").get<int>();
  config.hidden_size = j.at("hidden_size").get<int>();
  config.embedding_size = j.value("embedding_size", config.hidden_size);
  config.num_layers = j.at("num_hidden_layers").get<int>();
  config.num_heads = j.at("num_attention_heads").get<int>();
  config.intermediate_size = j.at("intermediate_size").get<int>();
  config.max_position = j.value("max_position_embeddings", 512);
  config.type_vocab_size = j.value("type_vocab_size", 2);
  config.layer_norm_eps = j.value("layer_norm_eps", 1e-12);
  config.shared_layers = j.value("shared_layers", config.model_type == "albert");
  config.validate();
  return config;
}

void EncoderConfig::save_json(const std::filesystem::path& path) const {
  json j;
  j["model_type"] = model_type;
  j["vocab_size"] = vocab_size;
  j["hidden_size"] = hidden_size;
  j["embedding_size"] = embedding_size;
  j["num_hidden_layers"] = num_layers;
  j["num_attention_heads"] = num_heads;
  j["intermediate_size"] = intermediate_size;
  j["max_position_embeddings"] = max_position;
  j["type_vocab_size"] = type_vocab_size;
  j["layer_norm_eps"] = layer_norm_eps;
  j["shared_layers"] = shared_layers;
  write_file_atomic(path, j.dump(2) + "\n");
}

std::shared_ptr<CheckpointEncoder> CheckpointEncoder::load(
    const std::filesystem::path& directory) {
  for (const char* file : {"config.json", "vocab.txt", "model.safetensors"}) {
    if (!std::filesystem::exists(directory / file)) {
      throw CheckpointUnavailable(
          (directory / file).string() +
          " not found; a checkpoint directory needs config.json, vocab.txt "
          "and model.safetensors");
    }
  }
  auto encoder = std::make_shared<CheckpointEncoder>();
  encoder->config_ = EncoderConfig::from_json_file(directory / "config.json");
  encoder->tokenizer_ = WordPieceTokenizer::from_vocab_file(directory / "vocab.txt");
  if (encoder->tokenizer_.vocab_size() != encoder->config_.vocab_size) {
    throw CheckpointUnavailable(
        "vocab.txt has " + std::to_string(encoder->tokenizer_.vocab_size()) +
        " pieces but config.json declares " +
        std::to_string(encoder->config_.vocab_size));
  }

  const TensorMap tensors = load_safetensors(directory / "model.safetensors");
  const EncoderConfig& cfg = encoder->config_;

  encoder->word_embeddings_ = require_matrix(tensors, "embeddings.word_embeddings");
  encoder->position_embeddings_ =
      require_matrix(tensors, "embeddings.position_embeddings");
  encoder->type_embeddings_ =
      require_matrix(tensors, "embeddings.token_type_embeddings");
  encoder->emb_norm_gain_ = require_vector(tensors, "embeddings.layer_norm.weight");
  encoder->emb_norm_bias_ = require_vector(tensors, "embeddings.layer_norm.bias");
  if (encoder->word_embeddings_.rows() != cfg.vocab_size ||
      encoder->word_embeddings_.cols() != cfg.embedding_size) {
    throw CheckpointUnavailable("word embedding tensor does not match config");
  }

  encoder->has_projection_ = tensors.count("embeddings.projection.weight") > 0;
  if (encoder->has_projection_) {
    encoder->emb_projection_ = require_matrix(tensors, "embeddings.projection.weight");
    encoder->emb_projection_bias_ =
        require_vector(tensors, "embeddings.projection.bias");
  } else if (cfg.embedding_size != cfg.hidden_size) {
    throw CheckpointUnavailable(
        "embedding_size != hidden_size requires embeddings.projection tensors");
  }

  const int stored_layers = cfg.shared_layers ? 1 : cfg.num_layers;
  for (int i = 0; i < stored_layers; ++i) {
    const std::string p = "encoder.layer." + std::to_string(i) + ".";
    Layer layer;
    layer.wq = require_matrix(tensors, p + "attention.query.weight");
    layer.bq = require_vector(tensors, p + "attention.query.bias");
    layer.wk = require_matrix(tensors, p + "attention.key.weight");
    layer.bk = require_vector(tensors, p + "attention.key.bias");
    layer.wv = require_matrix(tensors, p + "attention.value.weight");
    layer.bv = require_vector(tensors, p + "attention.value.bias");
    layer.wo = require_matrix(tensors, p + "attention.output.weight");
    layer.bo = require_vector(tensors, p + "attention.output.bias");
    layer.attn_norm_gain = require_vector(tensors, p + "attention.layer_norm.weight");
    layer.attn_norm_bias = require_vector(tensors, p + "attention.layer_norm.bias");
    layer.w_inter = require_matrix(tensors, p + "ffn.intermediate.weight");
    layer.b_inter = require_vector(tensors, p + "ffn.intermediate.bias");
    layer.w_out = require_matrix(tensors, p + "ffn.output.weight");
    layer.b_out = require_vector(tensors, p + "ffn.output.bias");
    layer.ffn_norm_gain = require_vector(tensors, p + "ffn.layer_norm.weight");
    layer.ffn_norm_bias = require_vector(tensors, p + "ffn.layer_norm.bias");
    encoder->layers_.push_back(std::move(layer));
  }

  encoder->has_pooler_ = tensors.count("pooler.weight") > 0;
  if (encoder->has_pooler_) {
    encoder->pooler_w_ = require_matrix(tensors, "pooler.weight");
    encoder->pooler_b_ = require_vector(tensors, "pooler.bias");
  }
  return encoder;
}

Eigen::MatrixXd CheckpointEncoder::encode_cls(
    const EncodedTransformerBatch& batch) const {
  const EncoderConfig& cfg = config_;
  const Eigen::Index n = batch.rows();
  const Eigen::Index t = batch.cols();
  if (batch.mask.rows() != n || batch.mask.cols() != t ||
      batch.segments.rows() != n || batch.segments.cols() != t) {
    throw ShapeMismatch("encoded batch ids/mask/segments disagree on shape");
  }
  if (t > cfg.max_position) {
    throw ShapeMismatch("sequence length " + std::to_string(t) +
                        " exceeds max_position_embeddings " +
                        std::to_string(cfg.max_position));
  }

  const int head_dim = cfg.hidden_size / cfg.num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Eigen::MatrixXd cls(n, cfg.hidden_size);

  // Rows are independent; process one sequence at a time to bound memory.
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::MatrixXd x(t, cfg.embedding_size);
    for (Eigen::Index pos = 0; pos < t; ++pos) {
      const int id = batch.ids(r, pos);
      if (id < 0 || id >= cfg.vocab_size) {
        throw ShapeMismatch("token id " + std::to_string(id) +
                            " outside checkpoint vocabulary");
      }
      const int segment = batch.segments(r, pos);
      if (segment < 0 || segment >= cfg.type_vocab_size) {
        throw ShapeMismatch("segment id outside type vocabulary");
      }
      x.row(pos) = word_embeddings_.row(id) + position_embeddings_.row(pos) +
                   type_embeddings_.row(segment);
    }
    layer_norm_rows(x, emb_norm_gain_, emb_norm_bias_, cfg.layer_norm_eps);
    Eigen::MatrixXd h = has_projection_
                            ? ((x * emb_projection_).rowwise() +
                               emb_projection_bias_.transpose())
                                  .eval()
                            : x;

    Eigen::VectorXd penalty(t);
    for (Eigen::Index pos = 0; pos < t; ++pos) {
      penalty(pos) = batch.mask(r, pos) != 0 ? 0.0 : kMaskPenalty;
    }

    for (int li = 0; li < cfg.num_layers; ++li) {
      const Layer& layer = layers_[cfg.shared_layers ? 0 : static_cast<std::size_t>(li)];
      const Eigen::MatrixXd q = (h * layer.wq).rowwise() + layer.bq.transpose();
      const Eigen::MatrixXd k = (h * layer.wk).rowwise() + layer.bk.transpose();
      const Eigen::MatrixXd v = (h * layer.wv).rowwise() + layer.bv.transpose();

      Eigen::MatrixXd context(t, cfg.hidden_size);
      for (int head = 0; head < cfg.num_heads; ++head) {
        const Eigen::Index off = static_cast<Eigen::Index>(head) * head_dim;
        const auto qh = q.middleCols(off, head_dim);
        const auto kh = k.middleCols(off, head_dim);
        const auto vh = v.middleCols(off, head_dim);
        Eigen::MatrixXd scores = (qh * kh.transpose()) * scale;  // t x t
        scores.rowwise() += penalty.transpose();
        for (Eigen::Index row = 0; row < t; ++row) {
          const double mx = scores.row(row).maxCoeff();
          Eigen::ArrayXd e = (scores.row(row).array() - mx).exp();
          scores.row(row) = (e / e.sum()).matrix();
        }
        context.middleCols(off, head_dim) = scores * vh;
      }

      Eigen::MatrixXd attn_out = (context * layer.wo).rowwise() + layer.bo.transpose();
      attn_out += h;
      layer_norm_rows(attn_out, layer.attn_norm_gain, layer.attn_norm_bias,
                      cfg.layer_norm_eps);

      Eigen::MatrixXd inter =
          (attn_out * layer.w_inter).rowwise() + layer.b_inter.transpose();
      inter = inter.unaryExpr([](double value) { return gelu(value); });
      Eigen::MatrixXd ffn_out = (inter * layer.w_out).rowwise() + layer.b_out.transpose();
      ffn_out += attn_out;
      layer_norm_rows(ffn_out, layer.ffn_norm_gain, layer.ffn_norm_bias,
                      cfg.layer_norm_eps);
      h = std::move(ffn_out);
    }

    cls.row(r) = h.row(0);
  }

  if (has_pooler_) {
    cls = ((cls * pooler_w_).rowwise() + pooler_b_.transpose())
              .unaryExpr([](double value) { return std::tanh(value); });
  }
  return cls;
}

std::size_t CheckpointEncoder::parameter_count() const {
  std::size_t count = 0;
  const auto add_m = [&count](const Eigen::MatrixXd& m) {
    count += static_cast<std::size_t>(m.size());
  };
  const auto add_v = [&count](const Eigen::VectorXd& v) {
    count += static_cast<std::size_t>(v.size());
  };
  add_m(word_embeddings_);
  add_m(position_embeddings_);
  add_m(type_embeddings_);
  add_v(emb_norm_gain_);
  add_v(emb_norm_bias_);
  if (has_projection_) {
    add_m(emb_projection_);
    add_v(emb_projection_bias_);
  }
  for (const Layer& layer : layers_) {
    add_m(layer.wq);
    add_m(layer.wk);
    add_m(layer.wv);
    add_m(layer.wo);
    add_v(layer.bq);
    add_v(layer.bk);
    add_v(layer.bv);
    add_v(layer.bo);
    add_v(layer.attn_norm_gain);
    add_v(layer.attn_norm_bias);
    add_m(layer.w_inter);
    add_m(layer.w_out);
    add_v(layer.b_inter);
    add_v(layer.b_out);
    add_v(layer.ffn_norm_gain);
    add_v(layer.ffn_norm_bias);
  }
  if (has_pooler_) {
    add_m(pooler_w_);
    add_v(pooler_b_);
  }
  return count;
}

std::filesystem::path resolve_checkpoint(const std::string& name) {
  namespace fs = std::filesystem;
  if (fs::exists(fs::path(name) / "config.json")) return name;

  const char* env = std::getenv(kCheckpointDirEnv);
  const fs::path cache = env != nullptr ? fs::path(env) : fs::path("checkpoints");
  const fs::path candidate = cache / name;
  if (fs::exists(candidate / "config.json")) return candidate;

  throw CheckpointUnavailable(
      "\"" + name + "\" is not a checkpoint directory and was not found under " +
      cache.string() + "; download or convert the checkpoint (config.json, "
      "vocab.txt, model.safetensors) into that directory, or point " +
      std::string(kCheckpointDirEnv) + " at your checkpoint cache");
}

EncodedTransformerBatch encode_with_tokenizer(
    const std::vector<std::string>& texts, const WordPieceTokenizer& tokenizer,
    int max_tokens) {
  if (max_tokens < 2) {
    throw ConfigError("max_tokens must be at least 2 for the [CLS]/[SEP] markers");
  }
  std::vector<std::vector<int>> rows;
  rows.reserve(texts.size());
  std::size_t width = 2;
  for (const std::string& text : texts) {
    std::vector<int> pieces = tokenizer.encode(text);
    const std::size_t body_limit = static_cast<std::size_t>(max_tokens) - 2;
    if (pieces.size() > body_limit) pieces.resize(body_limit);
    std::vector<int> row;
    row.reserve(pieces.size() + 2);
    row.push_back(tokenizer.cls_id());
    row.insert(row.end(), pieces.begin(), pieces.end());
    row.push_back(tokenizer.sep_id());
    width = std::max(width, row.size());
    rows.push_back(std::move(row));
  }

  EncodedTransformerBatch batch;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index t = static_cast<Eigen::Index>(width);
  batch.ids.setConstant(n, t, tokenizer.pad_id());
  batch.mask.setZero(n, t);
  batch.segments.setZero(n, t);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::vector<int>& row = rows[static_cast<std::size_t>(r)];
    for (std::size_t pos = 0; pos < row.size(); ++pos) {
      batch.ids(r, static_cast<Eigen::Index>(pos)) = row[pos];
      batch.mask(r, static_cast<Eigen::Index>(pos)) = 1;
    }
  }
  return batch;
}

}  // namespace htd
