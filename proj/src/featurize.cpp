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

#include "htd/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "htd/errors.hpp"
#include "htd/fsio.hpp"
#include "htd/rng.hpp"
#include "htd/unicode.hpp"

namespace htd {

Vocabulary::Vocabulary() {
  tokens_ = {"<pad>", "<oov>"};
  ids_ = {{"<pad>", kPadId}, {"<oov>", kOovId}};
}

int Vocabulary::id_of(const std::string& token) const {
  const auto it = ids_.find(token);
  return it == ids_.end() ? kOovId : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  if (id < 0 || id >= size()) {
    throw ShapeMismatch("token id " + std::to_string(id) +
                        " outside vocabulary of size " + std::to_string(size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocabulary::add_token(const std::string& token) {
  if (ids_.count(token)) return;
  ids_.emplace(token, size());
  tokens_.push_back(token);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  for (int id = 0; id < size(); ++id) {
    out << tokens_[static_cast<std::size_t>(id)] << '\t' << id << '\n';
  }
  write_file_atomic(path, out.str());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  Vocabulary vocab;
  std::istringstream in(content);
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw MalformedRow(static_cast<std::size_t>(row + 1),
                         "vocabulary line has no tab");
    }
    const std::string token = line.substr(0, tab);
    const int id = std::stoi(line.substr(tab + 1));
    if (id != row) {
      throw MalformedRow(static_cast<std::size_t>(row + 1),
                         "vocabulary ids must be contiguous from 0");
    }
    if (row >= 2) vocab.add_token(token);
    ++row;
  }
  return vocab;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  const std::vector<char32_t> cps = uni::decode_utf8(text);
  std::vector<char32_t> current;
  for (char32_t cp : cps) {
    if (uni::is_whitespace(cp)) {
      if (!current.empty()) {
        tokens.push_back(uni::encode_utf8(current));
        current.clear();
      }
    } else {
      current.push_back(cp);
    }
  }
  if (!current.empty()) tokens.push_back(uni::encode_utf8(current));
  return tokens;
}

Vocabulary build_vocabulary(const std::vector<std::string>& texts,
                            int max_vocab) {
  if (max_vocab < 3) {
    throw ConfigError("max_vocab must be at least 3 (PAD, OOV and one token)");
  }
  struct Entry {
    std::size_t count = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> stats;
  std::size_t position = 0;
  for (const std::string& text : texts) {
    for (std::string& token : tokenize(text)) {
      auto [it, inserted] = stats.try_emplace(std::move(token));
      if (inserted) it->second.first_seen = position;
      ++it->second.count;
      ++position;
    }
  }
  std::vector<const std::pair<const std::string, Entry>*> ranked;
  ranked.reserve(stats.size());
  for (const auto& entry : stats) ranked.push_back(&entry);
  std::sort(ranked.begin(), ranked.end(), [](const auto* a, const auto* b) {
    if (a->second.count != b->second.count) return a->second.count > b->second.count;
    return a->second.first_seen < b->second.first_seen;
  });

  Vocabulary vocab;
  const std::size_t keep = std::min<std::size_t>(
      ranked.size(), static_cast<std::size_t>(max_vocab) - 2);
  for (std::size_t i = 0; i < keep; ++i) vocab.add_token(ranked[i]->first);
  return vocab;
}

TokenSequence encode(const std::string& text, const Vocabulary& vocab) {
  TokenSequence seq;
  for (const std::string& token : tokenize(text)) {
    seq.ids.push_back(vocab.id_of(token));
  }
  seq.original_length = seq.ids.size();
  return seq;
}

PaddedBatch pad_batch(const std::vector<TokenSequence>& sequences,
                      int max_length) {
  if (max_length < 1) throw ConfigError("max_length must be >= 1");
  PaddedBatch batch;
  batch.ids.setZero(static_cast<Eigen::Index>(sequences.size()), max_length);
  for (std::size_t n = 0; n < sequences.size(); ++n) {
    const std::vector<int>& ids = sequences[n].ids;
    const std::size_t limit = std::min<std::size_t>(ids.size(),
                                                    static_cast<std::size_t>(max_length));
    for (std::size_t t = 0; t < limit; ++t) {
      batch.ids(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t)) = ids[t];
    }
  }
  return batch;
}

int suggest_max_length(const std::vector<TokenSequence>& sequences,
                       double percentile, int cap) {
  if (sequences.empty()) return 1;
  std::vector<std::size_t> lengths;
  lengths.reserve(sequences.size());
  for (const TokenSequence& seq : sequences) lengths.push_back(seq.ids.size());
  std::sort(lengths.begin(), lengths.end());
  // Nearest-rank percentile.
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(percentile * static_cast<double>(lengths.size())));
  const std::size_t index = rank == 0 ? 0 : rank - 1;
  const std::size_t value = lengths[std::min(index, lengths.size() - 1)];
  return std::clamp(static_cast<int>(value), 1, cap);
}

namespace {

Eigen::RowVectorXd random_row(Rng& rng, int dimension) {
  Eigen::RowVectorXd row(dimension);
  for (int d = 0; d < dimension; ++d) row(d) = rng.uniform(-0.25, 0.25);
  return row;
}

}  // namespace

LoadedEmbeddings load_embeddings(const std::filesystem::path& vectors_path,
                                 const Vocabulary& vocab, int dimension,
                                 std::uint64_t seed) {
  if (dimension < 1) throw ConfigError("embedding dimension must be >= 1");
  const std::string content = read_file(vectors_path);

  std::unordered_map<std::string, Eigen::RowVectorXd> vectors;
  std::istringstream in(content);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<double> values;
    double v = 0.0;
    while (fields >> v) values.push_back(v);
    if (static_cast<int>(values.size()) != dimension) {
      throw DimensionMismatch("vectors file line " + std::to_string(row) +
                              " has " + std::to_string(values.size()) +
                              " values, expected " + std::to_string(dimension));
    }
    // Only vocabulary tokens are worth keeping in memory.
    if (vocab.id_of(token) != Vocabulary::kOovId || token == "<oov>") {
      Eigen::RowVectorXd rv(dimension);
      for (int d = 0; d < dimension; ++d) rv(d) = values[static_cast<std::size_t>(d)];
      vectors[token] = std::move(rv);
    }
  }

  LoadedEmbeddings result;
  result.matrix.setZero(vocab.size(), dimension);
  Rng rng(seed);
  for (int id = 1; id < vocab.size(); ++id) {
    const std::string& token = vocab.token_of(id);
    const auto it = vectors.find(token);
    if (it != vectors.end()) {
      result.matrix.row(id) = it->second;
      if (id >= 2) ++result.matched_tokens;
    } else {
      result.matrix.row(id) = random_row(rng, dimension);
    }
  }
  const int real_tokens = vocab.size() - 2;
  result.coverage = real_tokens > 0
                        ? static_cast<double>(result.matched_tokens) / real_tokens
                        : 0.0;
  std::clog << "embeddings: " << result.matched_tokens << "/" << real_tokens
            << " vocabulary tokens matched (" << result.coverage * 100.0
            << "%) in " << vectors_path.string() << "\n";
  return result;
}

EmbeddingMatrix random_embeddings(int vocab_size, int dimension,
                                  std::uint64_t seed) {
  if (dimension < 1) throw ConfigError("embedding dimension must be >= 1");
  if (vocab_size < 1) throw ConfigError("vocab_size must be >= 1");
  EmbeddingMatrix matrix;
  matrix.setZero(vocab_size, dimension);
  Rng rng(seed);
  for (int id = 1; id < vocab_size; ++id) {
    matrix.row(id) = random_row(rng, dimension);
  }
  return matrix;
}

}  // namespace htd
