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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "htd/labels.hpp"

namespace htd {

/// One labeled comment. `label` is absent for unlabeled prediction input.
struct CommentRecord {
  std::string id;
  std::string text;
  std::optional<CategoryLabel> label;
  Language language = Language::kMalayalam;
};

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;

  /// Throws ConfigError unless all ratios are positive and sum to 1
  /// within 1e-9.
  void validate() const;
};

struct DatasetSplit {
  std::vector<CommentRecord> train;
  std::vector<CommentRecord> validation;
  std::vector<CommentRecord> test;
  Language language = Language::kMalayalam;
  std::uint64_t seed = 0;
  SplitRatios ratios;
  bool stratified = true;
};

using ClassCounts = std::map<CategoryLabel, std::size_t>;

/// Loads a UTF-8 tab-separated dataset. The first row is a header naming
/// the columns; `comment` and `category` are required for labeled data,
/// an optional `id` column is preserved. Rows must be non-empty comments
/// with one of the three labels. A header-only file yields an empty list.
std::vector<CommentRecord> load_dataset(const std::filesystem::path& path,
                                        Language language);

/// Like load_dataset but the category column is optional: rows without it
/// become unlabeled records (prediction input).
std::vector<CommentRecord> load_unlabeled(const std::filesystem::path& path,
                                          Language language);

/// Counts records per class. Labels that are absent count toward nothing;
/// all three classes are present in the result (possibly zero).
ClassCounts class_distribution(const std::vector<CommentRecord>& records);

/// Deterministically splits records into train/validation/test. Stratified
/// mode shuffles and apportions within each class (largest-remainder, and
/// every split receives at least one record per class); it throws
/// EmptyClass when a class has fewer records than there are splits.
DatasetSplit split_dataset(const std::vector<CommentRecord>& records,
                           const SplitRatios& ratios, std::uint64_t seed,
                           bool stratified);

/// Published per-class distribution for the full corpus of a language.
ClassCounts published_distribution(Language language);

/// Total comment count for the full corpus of a language.
std::size_t published_total(Language language);

/// Compares `counts` against the published distribution and returns one
/// human-readable delta line per mismatching class (empty when exact).
std::vector<std::string> distribution_deltas(Language language,
                                             const ClassCounts& counts);

/// Writes records as TSV (id, comment, category columns; category omitted
/// for unlabeled records). Tabs and newlines inside comments are replaced
/// by spaces so the file stays one row per record.
void save_records_tsv(const std::filesystem::path& path,
                      const std::vector<CommentRecord>& records);

/// Persists the three split TSVs plus split_meta.json into a directory.
void save_split(const std::filesystem::path& dir, const DatasetSplit& split);

/// Loads a split persisted by save_split.
DatasetSplit load_split(const std::filesystem::path& dir);

}  // namespace htd
