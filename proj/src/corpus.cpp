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

#include "htd/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "htd/errors.hpp"
#include "htd/fsio.hpp"
#include "htd/rng.hpp"

namespace htd {

namespace {

using nlohmann::json;

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      fields.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

std::string lower_ascii(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct HeaderLayout {
  int id = -1;
  int comment = -1;
  int category = -1;
  std::size_t columns = 0;
};

HeaderLayout parse_header(const std::string& line, bool require_category) {
  HeaderLayout layout;
  const std::vector<std::string> names = split_tabs(line);
  layout.columns = names.size();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string name = lower_ascii(names[i]);
    if (name == "id") layout.id = static_cast<int>(i);
    if (name == "comment" || name == "text") layout.comment = static_cast<int>(i);
    if (name == "category" || name == "label") layout.category = static_cast<int>(i);
  }
  if (layout.comment < 0) {
    throw MalformedRow(1, "header must name a comment column");
  }
  if (require_category && layout.category < 0) {
    throw MalformedRow(1, "header must name a category column");
  }
  return layout;
}

// Reads lines handling \n and \r\n, stripping a UTF-8 BOM on the first line.
std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::string content = read_file(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= content.size(); ++i) {
    if (i == content.size() || content[i] == '\n') {
      std::string line = content.substr(start, i - start);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
      start = i + 1;
    }
  }
  // The final split after a trailing newline is an empty tail, not a row.
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (!lines.empty() && lines.front().size() >= 3 &&
      static_cast<unsigned char>(lines.front()[0]) == 0xEF &&
      static_cast<unsigned char>(lines.front()[1]) == 0xBB &&
      static_cast<unsigned char>(lines.front()[2]) == 0xBF) {
    lines.front().erase(0, 3);
  }
  return lines;
}

std::vector<CommentRecord> load_tsv(const std::filesystem::path& path,
                                    Language language, bool require_label) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw MalformedRow(1, "file is empty (no header row)");
  const HeaderLayout layout = parse_header(lines.front(), require_label);

  std::vector<CommentRecord> records;
  records.reserve(lines.size() - 1);
  std::unordered_set<std::string> seen_ids;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    if (lines[row].empty()) {
      throw MalformedRow(row + 1, "blank line");
    }
    const std::vector<std::string> fields = split_tabs(lines[row]);
    if (fields.size() != layout.columns) {
      throw MalformedRow(row + 1, "expected " + std::to_string(layout.columns) +
                                      " columns, found " +
                                      std::to_string(fields.size()));
    }
    CommentRecord record;
    record.language = language;
    if (layout.id >= 0) {
      record.id = fields[static_cast<std::size_t>(layout.id)];
    } else {
      char buf[24];
      std::snprintf(buf, sizeof(buf), "r%06zu", row);
      record.id = buf;
    }
    record.text = fields[static_cast<std::size_t>(layout.comment)];
    if (record.text.empty()) {
      throw MalformedRow(row + 1, "empty comment");
    }
    if (layout.category >= 0) {
      const std::string& value = fields[static_cast<std::size_t>(layout.category)];
      if (!value.empty()) {
        record.label = parse_label(value);
      } else if (require_label) {
        throw MalformedRow(row + 1, "empty category");
      }
    }
    if (!seen_ids.insert(record.id).second) {
      throw MalformedRow(row + 1, "duplicate id \"" + record.id + "\"");
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::string sanitize_field(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

// Largest-remainder apportionment of n into three parts; ties go to the
// earlier split.
std::array<std::size_t, 3> apportion(std::size_t n, const SplitRatios& ratios) {
  const std::array<double, 3> quota = {n * ratios.train, n * ratios.validation,
                                       n * ratios.test};
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    sizes[static_cast<std::size_t>(i)] = static_cast<std::size_t>(quota[static_cast<std::size_t>(i)]);
    remainder[static_cast<std::size_t>(i)] = quota[static_cast<std::size_t>(i)] -
        static_cast<double>(sizes[static_cast<std::size_t>(i)]);
    assigned += sizes[static_cast<std::size_t>(i)];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return remainder[static_cast<std::size_t>(a)] > remainder[static_cast<std::size_t>(b)];
  });
  for (std::size_t k = 0; assigned < n; ++k) {
    ++sizes[static_cast<std::size_t>(order[k % 3])];
    ++assigned;
  }
  return sizes;
}

// Guarantees each split receives at least one element by stealing from the
// currently largest split. Caller ensures the total is >= 3.
void ensure_nonempty(std::array<std::size_t, 3>& sizes) {
  for (std::size_t i = 0; i < 3; ++i) {
    while (sizes[i] == 0) {
      const std::size_t donor = static_cast<std::size_t>(
          std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
      --sizes[donor];
      ++sizes[i];
    }
  }
}

json counts_to_json(const ClassCounts& counts) {
  json j = json::object();
  for (CategoryLabel label : kLabelOrder) {
    j[std::string(label_name(label))] = counts.at(label);
  }
  return j;
}

}  // namespace

void SplitRatios::validate() const {
  if (train <= 0.0 || validation <= 0.0 || test <= 0.0) {
    throw ConfigError("split ratios must all be positive");
  }
  const double sum = train + validation + test;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1 (got " +
                      std::to_string(sum) + ")");
  }
}

std::vector<CommentRecord> load_dataset(const std::filesystem::path& path,
                                        Language language) {
  return load_tsv(path, language, /*require_label=*/true);
}

std::vector<CommentRecord> load_unlabeled(const std::filesystem::path& path,
                                          Language language) {
  return load_tsv(path, language, /*require_label=*/false);
}

ClassCounts class_distribution(const std::vector<CommentRecord>& records) {
  ClassCounts counts;
  for (CategoryLabel label : kLabelOrder) counts[label] = 0;
  for (const CommentRecord& record : records) {
    if (record.label) ++counts[*record.label];
  }
  return counts;
}

DatasetSplit split_dataset(const std::vector<CommentRecord>& records,
                           const SplitRatios& ratios, std::uint64_t seed,
                           bool stratified) {
  ratios.validate();
  DatasetSplit split;
  split.language = records.empty() ? Language::kMalayalam : records.front().language;
  split.seed = seed;
  split.ratios = ratios;
  split.stratified = stratified;

  Rng rng(seed);
  const auto assign = [&](const std::vector<std::size_t>& indices,
                          const std::array<std::size_t, 3>& sizes) {
    std::size_t pos = 0;
    for (std::size_t k = 0; k < sizes[0]; ++k) split.train.push_back(records[indices[pos++]]);
    for (std::size_t k = 0; k < sizes[1]; ++k) split.validation.push_back(records[indices[pos++]]);
    for (std::size_t k = 0; k < sizes[2]; ++k) split.test.push_back(records[indices[pos++]]);
  };

  if (!stratified) {
    std::vector<std::size_t> indices(records.size());
    std::iota(indices.begin(), indices.end(), 0);
    rng.shuffle(indices);
    assign(indices, apportion(records.size(), ratios));
    return split;
  }

  for (const CommentRecord& record : records) {
    if (!record.label) {
      throw ConfigError("stratified split requires labeled records (id \"" +
                        record.id + "\" has no label)");
    }
  }
  for (CategoryLabel label : kLabelOrder) {
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].label && *records[i].label == label) indices.push_back(i);
    }
    if (indices.size() < 3) {
      throw EmptyClass(std::string(label_name(label)) + " has " +
                       std::to_string(indices.size()) +
                       " records, need at least one per split");
    }
    rng.shuffle(indices);
    std::array<std::size_t, 3> sizes = apportion(indices.size(), ratios);
    ensure_nonempty(sizes);
    assign(indices, sizes);
  }
  return split;
}

ClassCounts published_distribution(Language language) {
  ClassCounts counts;
  if (language == Language::kMalayalam) {
    counts[CategoryLabel::kHomophobic] = 2434;
    counts[CategoryLabel::kTransphobic] = 491;
    counts[CategoryLabel::kNonAntiLgbt] = 189;
  } else {
    counts[CategoryLabel::kHomophobic] = 2022;
    counts[CategoryLabel::kTransphobic] = 485;
    counts[CategoryLabel::kNonAntiLgbt] = 155;
  }
  return counts;
}

std::size_t published_total(Language language) {
  std::size_t total = 0;
  for (const auto& [label, count] : published_distribution(language)) total += count;
  return total;
}

std::vector<std::string> distribution_deltas(Language language,
                                             const ClassCounts& counts) {
  std::vector<std::string> deltas;
  const ClassCounts expected = published_distribution(language);
  std::size_t total = 0;
  for (CategoryLabel label : kLabelOrder) {
    const std::size_t want = expected.at(label);
    const std::size_t got = counts.count(label) ? counts.at(label) : 0;
    total += got;
    if (want != got) {
      std::ostringstream line;
      line << label_name(label) << ": expected " << want << ", found " << got
           << " (delta " << (static_cast<long long>(got) - static_cast<long long>(want))
           << ")";
      deltas.push_back(line.str());
    }
  }
  const std::size_t want_total = published_total(language);
  if (total != want_total) {
    std::ostringstream line;
    line << "total: expected " << want_total << ", found " << total << " (delta "
         << (static_cast<long long>(total) - static_cast<long long>(want_total))
         << ")";
    deltas.push_back(line.str());
  }
  return deltas;
}

void save_records_tsv(const std::filesystem::path& path,
                      const std::vector<CommentRecord>& records) {
  std::ostringstream out;
  out << "id\tcomment\tcategory\n";
  for (const CommentRecord& record : records) {
    out << sanitize_field(record.id) << '\t' << sanitize_field(record.text)
        << '\t' << (record.label ? label_name(*record.label) : "") << '\n';
  }
  write_file_atomic(path, out.str());
}

void save_split(const std::filesystem::path& dir, const DatasetSplit& split) {
  save_records_tsv(dir / "train.tsv", split.train);
  save_records_tsv(dir / "validation.tsv", split.validation);
  save_records_tsv(dir / "test.tsv", split.test);

  json meta;
  meta["language"] = language_name(split.language);
  meta["seed"] = split.seed;
  meta["ratios"] = {split.ratios.train, split.ratios.validation, split.ratios.test};
  meta["stratified"] = split.stratified;
  meta["counts"] = {
      {"train", counts_to_json(class_distribution(split.train))},
      {"validation", counts_to_json(class_distribution(split.validation))},
      {"test", counts_to_json(class_distribution(split.test))},
  };
  meta["totals"] = {
      {"train", split.train.size()},
      {"validation", split.validation.size()},
      {"test", split.test.size()},
  };
  write_file_atomic(dir / "split_meta.json", meta.dump(2) + "\n");
}

DatasetSplit load_split(const std::filesystem::path& dir) {
  const json meta = json::parse(read_file(dir / "split_meta.json"));
  DatasetSplit split;
  split.language = parse_language(meta.at("language").get<std::string>());
  split.seed = meta.at("seed").get<std::uint64_t>();
  split.ratios.train = meta.at("ratios").at(0).get<double>();
  split.ratios.validation = meta.at("ratios").at(1).get<double>();
  split.ratios.test = meta.at("ratios").at(2).get<double>();
  split.stratified = meta.at("stratified").get<bool>();
  split.train = load_dataset(dir / "train.tsv", split.language);
  split.validation = load_dataset(dir / "validation.tsv", split.language);
  split.test = load_dataset(dir / "test.tsv", split.language);
  return split;
}

}  // namespace htd
