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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "htd/encoder.hpp"
#include "htd/errors.hpp"
#include "htd/safetensors.hpp"
#include "htd/wordpiece.hpp"
#include "testutil.hpp"

using htd::EncodedTransformerBatch;
using htd::EncoderConfig;
using htd::WordPieceTokenizer;

namespace {

/// Vocabulary with overlapping prefixes, to pin down longest-match-first.
WordPieceTokenizer overlap_tokenizer(const testutil::TempDir& tmp) {
  testutil::spit(tmp.path() / "vocab.txt",
                 "[PAD]\n[UNK]\n[CLS]\n[SEP]\nfo\nfoo\n##o\n##bar\nbar\n");
  return WordPieceTokenizer::from_vocab_file(tmp.path() / "vocab.txt");
}

WordPieceTokenizer synthetic_tokenizer(const testutil::TempDir& tmp) {
  std::string text;
  for (const std::string& piece : testutil::synthetic_checkpoint_vocab()) {
    text += piece;
    text += '\n';
  }
  testutil::spit(tmp.path() / "vocab.txt", text);
  return WordPieceTokenizer::from_vocab_file(tmp.path() / "vocab.txt");
}

/// Total scalar count of a synthetic checkpoint, written out term by term.
std::size_t expected_parameter_count(
    const testutil::SyntheticCheckpointOptions& options) {
  const std::size_t v = testutil::synthetic_checkpoint_vocab().size();
  const std::size_t e = static_cast<std::size_t>(options.embedding);
  const std::size_t h = static_cast<std::size_t>(options.hidden);
  const std::size_t inter = static_cast<std::size_t>(options.intermediate);
  std::size_t count = v * e +                                        // words
                      static_cast<std::size_t>(options.max_position) * e +
                      2 * e +        // token types
                      2 * e;         // embedding layer norm
  if (e != h) count += e * h + h;    // factorized projection
  const std::size_t stored = options.shared_layers
                                 ? 1
                                 : static_cast<std::size_t>(options.layers);
  count += stored * (4 * (h * h + h) + 2 * h +         // attention + norm
                     h * inter + inter + inter * h + h + 2 * h);  // ffn + norm
  if (options.with_pooler) count += h * h + h;
  return count;
}

}  // namespace

// ---------------------------------------------------------------------------
// WordPiece tokenizer.
// ---------------------------------------------------------------------------

TEST_CASE("wordpiece picks the longest matching piece first") {
  testutil::TempDir tmp;
  const WordPieceTokenizer tok = overlap_tokenizer(tmp);
  // "foo" wins over the shorter prefix "fo"; the tail continues with "##bar".
  CHECK(tok.encode("foobar") ==
        std::vector<int>{tok.piece_id("foo"), tok.piece_id("##bar")});
  CHECK(tok.encode("foo") == std::vector<int>{tok.piece_id("foo")});
  CHECK(tok.encode("fooo") ==
        std::vector<int>{tok.piece_id("foo"), tok.piece_id("##o")});
  CHECK(tok.encode("bar") == std::vector<int>{tok.piece_id("bar")});
}

TEST_CASE("wordpiece falls back to the unknown piece for the whole word") {
  testutil::TempDir tmp;
  const WordPieceTokenizer tok = overlap_tokenizer(tmp);
  // "barf" starts with "bar" but the remainder "##f" has no piece; the whole
  // word collapses to [UNK] rather than a partial match.
  CHECK(tok.encode("barf") == std::vector<int>{tok.unk_id()});
  CHECK(tok.encode("xyz") == std::vector<int>{tok.unk_id()});
}

TEST_CASE("wordpiece rejects words longer than one hundred codepoints") {
  testutil::TempDir tmp;
  const WordPieceTokenizer tok = overlap_tokenizer(tmp);
  const std::string at_limit = "fo" + std::string(98, 'o');    // 100 cps
  const std::string over_limit = "fo" + std::string(99, 'o');  // 101 cps
  const std::vector<int> pieces = tok.encode(at_limit);
  CHECK(pieces.size() == 98);  // "foo" + 97x"##o", greedy from the front
  CHECK(pieces.front() == tok.piece_id("foo"));
  CHECK(tok.encode(over_limit) == std::vector<int>{tok.unk_id()});
}

TEST_CASE("wordpiece encodes whitespace-separated words independently") {
  testutil::TempDir tmp;
  const WordPieceTokenizer tok = synthetic_tokenizer(tmp);
  const std::vector<int> ids = tok.encode("the bolts and");
  CHECK(ids == std::vector<int>{tok.piece_id("the"), tok.piece_id("bolt"),
                                tok.piece_id("##s"), tok.piece_id("and")});
  CHECK(tok.encode("").empty());
}

TEST_CASE("wordpiece exposes the special marker ids") {
  testutil::TempDir tmp;
  const WordPieceTokenizer tok = synthetic_tokenizer(tmp);
  CHECK(tok.pad_id() == 0);
  CHECK(tok.unk_id() == 1);
  CHECK(tok.cls_id() == 2);
  CHECK(tok.sep_id() == 3);
  CHECK(tok.vocab_size() == 20);
  CHECK(tok.piece_id("no-such-piece") == -1);
}

TEST_CASE("wordpiece vocab files may use crlf endings but need the markers") {
  testutil::TempDir tmp;
  testutil::spit(tmp.path() / "crlf.txt",
                 "[PAD]\r\n[UNK]\r\n[CLS]\r\n[SEP]\r\nword\r\n");
  const auto tok = WordPieceTokenizer::from_vocab_file(tmp.path() / "crlf.txt");
  CHECK(tok.vocab_size() == 5);
  CHECK(tok.piece_id("word") == 4);

  testutil::spit(tmp.path() / "bad.txt", "[PAD]\n[UNK]\n[CLS]\nword\n");
  CHECK_THROWS_AS(WordPieceTokenizer::from_vocab_file(tmp.path() / "bad.txt"),
                  htd::CheckpointUnavailable);
}

// ---------------------------------------------------------------------------
// Batch encoding.
// ---------------------------------------------------------------------------

TEST_CASE("encode_with_tokenizer frames rows with markers and masks padding") {
  testutil::TempDir tmp;
  const WordPieceTokenizer tok = synthetic_tokenizer(tmp);
  const EncodedTransformerBatch batch =
      htd::encode_with_tokenizer({"bolt cedar", "alfa"}, tok, 16);
  REQUIRE(batch.rows() == 2);
  REQUIRE(batch.cols() == 4);  // widest row: [CLS] bolt cedar [SEP]

  CHECK(batch.ids(0, 0) == tok.cls_id());
  CHECK(batch.ids(0, 1) == tok.piece_id("bolt"));
  CHECK(batch.ids(0, 2) == tok.piece_id("cedar"));
  CHECK(batch.ids(0, 3) == tok.sep_id());
  CHECK(batch.ids(1, 0) == tok.cls_id());
  CHECK(batch.ids(1, 1) == tok.piece_id("alfa"));
  CHECK(batch.ids(1, 2) == tok.sep_id());
  CHECK(batch.ids(1, 3) == tok.pad_id());

  for (int c = 0; c < 4; ++c) CHECK(batch.mask(0, c) == 1);
  CHECK(batch.mask(1, 2) == 1);
  CHECK(batch.mask(1, 3) == 0);
  CHECK(batch.segments.isZero());
}

TEST_CASE("encode_with_tokenizer truncates long rows but keeps the separator") {
  testutil::TempDir tmp;
  const WordPieceTokenizer tok = synthetic_tokenizer(tmp);
  const EncodedTransformerBatch batch = htd::encode_with_tokenizer(
      {"alfa axon amber apex bolt brine"}, tok, 4);
  REQUIRE(batch.cols() == 4);
  CHECK(batch.ids(0, 0) == tok.cls_id());
  CHECK(batch.ids(0, 1) == tok.piece_id("alfa"));
  CHECK(batch.ids(0, 2) == tok.piece_id("axon"));
  CHECK(batch.ids(0, 3) == tok.sep_id());
}

TEST_CASE("encode_with_tokenizer handles empty inputs") {
  testutil::TempDir tmp;
  const WordPieceTokenizer tok = synthetic_tokenizer(tmp);

  const EncodedTransformerBatch none = htd::encode_with_tokenizer({}, tok, 8);
  CHECK(none.rows() == 0);
  CHECK(none.cols() == 2);  // width never shrinks below the two markers

  const EncodedTransformerBatch blank = htd::encode_with_tokenizer({""}, tok, 8);
  REQUIRE(blank.rows() == 1);
  CHECK(blank.cols() == 2);
  CHECK(blank.ids(0, 0) == tok.cls_id());
  CHECK(blank.ids(0, 1) == tok.sep_id());

  CHECK_THROWS_AS(htd::encode_with_tokenizer({"alfa"}, tok, 1),
                  htd::ConfigError);
}

// ---------------------------------------------------------------------------
// Safetensors serialization.
// ---------------------------------------------------------------------------

TEST_CASE("safetensors round-trips doubles exactly") {
  testutil::TempDir tmp;
  htd::TensorMap tensors;
  htd::Tensor matrix;
  matrix.shape = {2, 3};
  matrix.values = {1.1, -2.25, 3.141592653589793, 1e-300, 0.0, -7.5};
  htd::Tensor vector;
  vector.shape = {4};
  vector.values = {0.25, -0.5, 0.75, 1.0 / 3.0};
  tensors["weights"] = matrix;
  tensors["bias"] = vector;

  const auto path = tmp.path() / "model.safetensors";
  htd::save_safetensors(path, tensors);
  const htd::TensorMap loaded = htd::load_safetensors(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded.at("weights").shape == matrix.shape);
  CHECK(loaded.at("weights").values == matrix.values);
  CHECK(loaded.at("bias").values == vector.values);
  CHECK(testutil::slurp(path).find("F64") != std::string::npos);
}

TEST_CASE("safetensors reads independently written f32 files") {
  testutil::TempDir tmp;
  const auto path = tmp.path() / "weights.safetensors";
  testutil::write_safetensors_f32(
      path, {{"a", {{2, 2}, {1.5f, -0.25f, 3.0f, 0.125f}}},
             {"b", {{3}, {0.5f, 1.0f, -2.0f}}}});
  const htd::TensorMap loaded = htd::load_safetensors(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded.at("a").shape == std::vector<std::int64_t>{2, 2});
  CHECK(loaded.at("a").values ==
        std::vector<double>{1.5, -0.25, 3.0, 0.125});
  CHECK(loaded.at("b").values == std::vector<double>{0.5, 1.0, -2.0});

  const Eigen::MatrixXd m = loaded.at("a").as_matrix();
  CHECK(m(0, 1) == -0.25);
  CHECK(m(1, 0) == 3.0);
  CHECK_THROWS_AS(loaded.at("b").as_matrix(), htd::ShapeMismatch);
  CHECK_THROWS_AS(loaded.at("a").as_vector(), htd::ShapeMismatch);
}

TEST_CASE("safetensors skips the metadata entry") {
  testutil::TempDir tmp;
  const std::string header =
      R"({"__metadata__":{"format":"pt"},)"
      R"("t":{"dtype":"F32","shape":[2],"data_offsets":[0,8]}})";
  std::string blob;
  const auto size = static_cast<std::uint64_t>(header.size());
  for (int b = 0; b < 8; ++b) blob += static_cast<char>((size >> (8 * b)) & 0xFF);
  blob += header;
  const float values[2] = {1.0f, 2.0f};
  char bytes[8];
  std::memcpy(bytes, values, 8);
  blob.append(bytes, 8);
  const auto path = tmp.path() / "meta.safetensors";
  testutil::spit(path, blob);

  const htd::TensorMap loaded = htd::load_safetensors(path);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded.at("t").values == std::vector<double>{1.0, 2.0});
}

TEST_CASE("safetensors rejects malformed files") {
  testutil::TempDir tmp;

  const auto tiny = tmp.path() / "tiny.safetensors";
  testutil::spit(tiny, "abc");
  CHECK_THROWS_AS(htd::load_safetensors(tiny), htd::IoFailure);

  // Header length claims more bytes than the file holds.
  const auto truncated = tmp.path() / "truncated.safetensors";
  std::string blob;
  const std::uint64_t huge = 1000;
  for (int b = 0; b < 8; ++b) blob += static_cast<char>((huge >> (8 * b)) & 0xFF);
  blob += "{}";
  testutil::spit(truncated, blob);
  CHECK_THROWS_AS(htd::load_safetensors(truncated), htd::IoFailure);

  const auto craft = [&](const std::string& header, const std::string& payload,
                         const char* name) {
    std::string out;
    const auto size = static_cast<std::uint64_t>(header.size());
    for (int b = 0; b < 8; ++b) out += static_cast<char>((size >> (8 * b)) & 0xFF);
    out += header;
    out += payload;
    const auto path = tmp.path() / name;
    testutil::spit(path, out);
    return path;
  };

  const auto bad_dtype = craft(
      R"({"t":{"dtype":"I64","shape":[1],"data_offsets":[0,8]}})",
      std::string(8, '\0'), "dtype.safetensors");
  CHECK_THROWS_AS(htd::load_safetensors(bad_dtype), htd::IoFailure);

  const auto bad_offsets = craft(
      R"({"t":{"dtype":"F32","shape":[4],"data_offsets":[0,16]}})",
      std::string(8, '\0'), "offsets.safetensors");
  CHECK_THROWS_AS(htd::load_safetensors(bad_offsets), htd::IoFailure);

  // Offsets in range but not matching shape * element size.
  const auto bad_size = craft(
      R"({"t":{"dtype":"F32","shape":[3],"data_offsets":[0,8]}})",
      std::string(8, '\0'), "size.safetensors");
  CHECK_THROWS_AS(htd::load_safetensors(bad_size), htd::IoFailure);
}

// ---------------------------------------------------------------------------
// Encoder configuration.
// ---------------------------------------------------------------------------

TEST_CASE("encoder config fills defaults from a minimal json file") {
  testutil::TempDir tmp;
  testutil::spit(tmp.path() / "config.json",
                 R"({"vocab_size": 20, "hidden_size": 16,
                     "num_hidden_layers": 2, "num_attention_heads": 2,
                     "intermediate_size": 32})");
  const EncoderConfig config =
      EncoderConfig::from_json_file(tmp.path() / "config.json");
  CHECK(config.model_type == "bert");
  CHECK(config.embedding_size == 16);  // defaults to hidden_size
  CHECK(config.max_position == 512);
  CHECK(config.type_vocab_size == 2);
  CHECK(config.layer_norm_eps == doctest::Approx(1e-12));
  CHECK_FALSE(config.shared_layers);
}

TEST_CASE("encoder config defaults shared layers on for albert") {
  testutil::TempDir tmp;
  testutil::spit(tmp.path() / "config.json",
                 R"({"model_type": "albert", "vocab_size": 20,
                     "hidden_size": 16, "embedding_size": 8,
                     "num_hidden_layers": 4, "num_attention_heads": 2,
                     "intermediate_size": 32})");
  const EncoderConfig config =
      EncoderConfig::from_json_file(tmp.path() / "config.json");
  CHECK(config.shared_layers);
  CHECK(config.embedding_size == 8);
}

TEST_CASE("encoder config save and reload preserve every field") {
  testutil::TempDir tmp;
  EncoderConfig config;
  config.model_type = "albert";
  config.vocab_size = 30;
  config.hidden_size = 24;
  config.embedding_size = 12;
  config.num_layers = 3;
  config.num_heads = 4;
  config.intermediate_size = 48;
  config.max_position = 128;
  config.type_vocab_size = 2;
  config.layer_norm_eps = 1e-10;
  config.shared_layers = true;
  config.save_json(tmp.path() / "config.json");
  const EncoderConfig loaded =
      EncoderConfig::from_json_file(tmp.path() / "config.json");
  CHECK(loaded.model_type == config.model_type);
  CHECK(loaded.vocab_size == config.vocab_size);
  CHECK(loaded.hidden_size == config.hidden_size);
  CHECK(loaded.embedding_size == config.embedding_size);
  CHECK(loaded.num_layers == config.num_layers);
  CHECK(loaded.num_heads == config.num_heads);
  CHECK(loaded.intermediate_size == config.intermediate_size);
  CHECK(loaded.max_position == config.max_position);
  CHECK(loaded.layer_norm_eps == doctest::Approx(config.layer_norm_eps));
  CHECK(loaded.shared_layers == config.shared_layers);
}

TEST_CASE("encoder config validation rejects impossible dimensions") {
  EncoderConfig config;
  config.vocab_size = 20;
  config.hidden_size = 16;
  config.embedding_size = 16;
  config.num_layers = 2;
  config.num_heads = 2;
  config.intermediate_size = 32;
  CHECK_NOTHROW(config.validate());

  EncoderConfig bad = config;
  bad.model_type = "gpt";
  CHECK_THROWS_AS(bad.validate(), htd::ConfigError);
  bad = config;
  bad.vocab_size = 4;
  CHECK_THROWS_AS(bad.validate(), htd::ConfigError);
  bad = config;
  bad.num_heads = 3;  // 16 % 3 != 0
  CHECK_THROWS_AS(bad.validate(), htd::ConfigError);
  bad = config;
  bad.max_position = 1;
  CHECK_THROWS_AS(bad.validate(), htd::ConfigError);
}

// ---------------------------------------------------------------------------
// Checkpoint encoder.
// ---------------------------------------------------------------------------

TEST_CASE("checkpoint encoder loads a bert-style directory") {
  testutil::TempDir tmp;
  const auto dir = tmp.path() / "bert";
  testutil::write_synthetic_checkpoint(dir);
  const auto encoder = htd::CheckpointEncoder::load(dir);
  CHECK(encoder->config().hidden_size == 16);
  CHECK(encoder->config().vocab_size == 20);
  CHECK(encoder->parameter_count() ==
        expected_parameter_count(testutil::SyntheticCheckpointOptions{}));

  const EncodedTransformerBatch batch = htd::encode_with_tokenizer(
      {"bolt cedar basil", "alfa axon"}, encoder->tokenizer(), 16);
  const Eigen::MatrixXd features = encoder->encode_cls(batch);
  CHECK(features.rows() == 2);
  CHECK(features.cols() == 16);
  CHECK(features.allFinite());
  // The default checkpoint carries a tanh pooler, so features are bounded.
  CHECK(features.array().abs().maxCoeff() <= 1.0);

  // Loading the same directory twice is bit-for-bit deterministic.
  const auto again = htd::CheckpointEncoder::load(dir);
  CHECK(again->encode_cls(batch) == features);
}

TEST_CASE("checkpoint encoder applies the albert projection and shared layers") {
  testutil::TempDir tmp;
  const auto dir = tmp.path() / "albert";
  const auto options = testutil::albert_checkpoint_options();
  testutil::write_synthetic_checkpoint(dir, options);
  const auto encoder = htd::CheckpointEncoder::load(dir);
  CHECK(encoder->config().model_type == "albert");
  CHECK(encoder->config().embedding_size == 8);
  CHECK(encoder->config().hidden_size == 16);
  CHECK(encoder->config().shared_layers);
  // Two configured layers, one stored weight set plus the projection.
  CHECK(encoder->parameter_count() == expected_parameter_count(options));

  const EncodedTransformerBatch batch = htd::encode_with_tokenizer(
      {"cedar coral", "burrow"}, encoder->tokenizer(), 16);
  const Eigen::MatrixXd features = encoder->encode_cls(batch);
  CHECK(features.rows() == 2);
  CHECK(features.cols() == 16);
  CHECK(features.allFinite());
}

TEST_CASE("the pooler changes the classification features") {
  testutil::TempDir tmp;
  testutil::SyntheticCheckpointOptions with_pooler;
  testutil::SyntheticCheckpointOptions without_pooler;
  without_pooler.with_pooler = false;
  testutil::write_synthetic_checkpoint(tmp.path() / "pooled", with_pooler);
  testutil::write_synthetic_checkpoint(tmp.path() / "raw", without_pooler);

  const auto pooled = htd::CheckpointEncoder::load(tmp.path() / "pooled");
  const auto raw = htd::CheckpointEncoder::load(tmp.path() / "raw");
  const EncodedTransformerBatch batch =
      htd::encode_with_tokenizer({"bolt cedar"}, pooled->tokenizer(), 16);
  const Eigen::MatrixXd a = pooled->encode_cls(batch);
  const Eigen::MatrixXd b = raw->encode_cls(batch);
  CHECK(a != b);
  CHECK(b.allFinite());
}

TEST_CASE("masked padding does not change a row's features") {
  testutil::TempDir tmp;
  const auto dir = tmp.path() / "bert";
  testutil::write_synthetic_checkpoint(dir);
  const auto encoder = htd::CheckpointEncoder::load(dir);

  // Batched with a longer neighbour, "alfa" gets two padded positions.
  const EncodedTransformerBatch padded = htd::encode_with_tokenizer(
      {"bolt cedar basil", "alfa"}, encoder->tokenizer(), 16);
  const EncodedTransformerBatch alone =
      htd::encode_with_tokenizer({"alfa"}, encoder->tokenizer(), 16);
  REQUIRE(padded.cols() > alone.cols());

  const Eigen::MatrixXd batched = encoder->encode_cls(padded);
  const Eigen::MatrixXd single = encoder->encode_cls(alone);
  for (Eigen::Index c = 0; c < batched.cols(); ++c) {
    CHECK(batched(1, c) == doctest::Approx(single(0, c)).epsilon(1e-9));
  }
}

TEST_CASE("checkpoint encoder reports missing pieces precisely") {
  testutil::TempDir tmp;

  const auto empty = tmp.path() / "empty";
  std::filesystem::create_directories(empty);
  CHECK_THROWS_WITH_AS(htd::CheckpointEncoder::load(empty),
                       doctest::Contains("config.json"),
                       htd::CheckpointUnavailable);

  // A declared vocabulary size that disagrees with vocab.txt.
  const auto mismatched = tmp.path() / "mismatched";
  testutil::write_synthetic_checkpoint(mismatched);
  std::string config = testutil::slurp(mismatched / "config.json");
  const std::string needle = "\"vocab_size\": 20";
  config.replace(config.find(needle), needle.size(), "\"vocab_size\": 21");
  testutil::spit(mismatched / "config.json", config);
  CHECK_THROWS_AS(htd::CheckpointEncoder::load(mismatched),
                  htd::CheckpointUnavailable);

  // A required tensor stripped from the weights file.
  const auto stripped = tmp.path() / "stripped";
  testutil::write_synthetic_checkpoint(stripped);
  htd::TensorMap tensors = htd::load_safetensors(stripped / "model.safetensors");
  tensors.erase("encoder.layer.0.attention.query.weight");
  htd::save_safetensors(stripped / "model.safetensors", tensors);
  CHECK_THROWS_WITH_AS(htd::CheckpointEncoder::load(stripped),
                       doctest::Contains("attention.query.weight"),
                       htd::CheckpointUnavailable);

  // Factorized embeddings demand the projection tensors.
  const auto unprojected = tmp.path() / "unprojected";
  testutil::write_synthetic_checkpoint(unprojected,
                                       testutil::albert_checkpoint_options());
  htd::TensorMap albert = htd::load_safetensors(unprojected / "model.safetensors");
  albert.erase("embeddings.projection.weight");
  albert.erase("embeddings.projection.bias");
  htd::save_safetensors(unprojected / "model.safetensors", albert);
  CHECK_THROWS_WITH_AS(htd::CheckpointEncoder::load(unprojected),
                       doctest::Contains("projection"),
                       htd::CheckpointUnavailable);
}

TEST_CASE("encode_cls validates ids, segments and widths") {
  testutil::TempDir tmp;
  const auto dir = tmp.path() / "bert";
  testutil::write_synthetic_checkpoint(dir);
  const auto encoder = htd::CheckpointEncoder::load(dir);

  EncodedTransformerBatch batch =
      htd::encode_with_tokenizer({"bolt cedar"}, encoder->tokenizer(), 16);
  batch.ids(0, 1) = encoder->config().vocab_size;  // one past the end
  CHECK_THROWS_AS(encoder->encode_cls(batch), htd::ShapeMismatch);

  batch = htd::encode_with_tokenizer({"bolt cedar"}, encoder->tokenizer(), 16);
  batch.segments(0, 1) = 2;  // type_vocab_size is 2
  CHECK_THROWS_AS(encoder->encode_cls(batch), htd::ShapeMismatch);

  batch = htd::encode_with_tokenizer({"bolt cedar"}, encoder->tokenizer(), 16);
  batch.mask.resize(1, 3);
  batch.mask.setOnes();
  CHECK_THROWS_AS(encoder->encode_cls(batch), htd::ShapeMismatch);

  // One column beyond max_position_embeddings.
  const int t = encoder->config().max_position + 1;
  EncodedTransformerBatch wide;
  wide.ids.setConstant(1, t, encoder->tokenizer().cls_id());
  wide.mask.setOnes(1, t);
  wide.segments.setZero(1, t);
  CHECK_THROWS_AS(encoder->encode_cls(wide), htd::ShapeMismatch);
}

// ---------------------------------------------------------------------------
// Checkpoint resolution.
// ---------------------------------------------------------------------------

TEST_CASE("resolve_checkpoint prefers an existing directory") {
  testutil::TempDir tmp;
  const auto dir = tmp.path() / "local-checkpoint";
  testutil::write_synthetic_checkpoint(dir);
  CHECK(htd::resolve_checkpoint(dir.string()) == dir);
}

TEST_CASE("resolve_checkpoint searches the configured cache directory") {
  testutil::TempDir tmp;
  const auto cache = tmp.path() / "cache";
  testutil::write_synthetic_checkpoint(cache / "mini-bert");
  REQUIRE(::setenv(htd::kCheckpointDirEnv, cache.string().c_str(), 1) == 0);

  CHECK(htd::resolve_checkpoint("mini-bert") == cache / "mini-bert");
  CHECK_THROWS_WITH_AS(htd::resolve_checkpoint("absent-model"),
                       doctest::Contains(htd::kCheckpointDirEnv),
                       htd::CheckpointUnavailable);

  REQUIRE(::unsetenv(htd::kCheckpointDirEnv) == 0);
}

TEST_CASE("resolve_checkpoint explains the fallback cache on a miss") {
  REQUIRE(::unsetenv(htd::kCheckpointDirEnv) == 0);
  CHECK_THROWS_WITH_AS(htd::resolve_checkpoint("no-model-here"),
                       doctest::Contains("checkpoints"),
                       htd::CheckpointUnavailable);
}
