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

#include "htd/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "classifiers.hpp"
#include "htd/corpus.hpp"
#include "htd/errors.hpp"
#include "htd/featurize.hpp"
#include "htd/fsio.hpp"
#include "htd/ini.hpp"
#include "htd/metrics.hpp"
#include "htd/model.hpp"
#include "htd/textprep.hpp"
#include "htd/trainer.hpp"

namespace htd {

namespace {

using nlohmann::json;

json file_entry(const std::filesystem::path& path) {
  json entry;
  entry["file"] = path.filename().string();
  entry["sha256"] = sha256_file(path);
  entry["bytes"] = std::filesystem::file_size(path);
  return entry;
}

/// Applies the cleaning pipeline in place and reports how many comments
/// it emptied.
std::size_t clean_records(std::vector<CommentRecord>& records) {
  std::size_t emptied = 0;
  for (CommentRecord& record : records) {
    record.text = clean_text(record.text);
    if (record.text.empty()) ++emptied;
  }
  return emptied;
}

std::vector<std::string> texts_of(const std::vector<CommentRecord>& records) {
  std::vector<std::string> texts;
  texts.reserve(records.size());
  for (const CommentRecord& record : records) texts.push_back(record.text);
  return texts;
}

std::vector<CategoryLabel> labels_of(const std::vector<CommentRecord>& records) {
  std::vector<CategoryLabel> labels;
  labels.reserve(records.size());
  for (const CommentRecord& record : records) {
    if (!record.label.has_value()) {
      throw ConfigError("record " + record.id + " has no label");
    }
    labels.push_back(*record.label);
  }
  return labels;
}

std::string counts_line(const ClassCounts& counts) {
  std::string line;
  for (CategoryLabel label : kLabelOrder) {
    if (!line.empty()) line += ", ";
    line += std::string(label_name(label)) + " " +
            std::to_string(counts.at(label));
  }
  return line;
}

std::string capitalized(std::string text) {
  if (!text.empty() && text[0] >= 'a' && text[0] <= 'z') {
    text[0] = static_cast<char>(text[0] - 'a' + 'A');
  }
  return text;
}

PaddedBatch encode_padded(const std::vector<CommentRecord>& records,
                          const Vocabulary& vocab, int length) {
  std::vector<TokenSequence> sequences;
  sequences.reserve(records.size());
  for (const CommentRecord& record : records) {
    sequences.push_back(encode(record.text, vocab));
  }
  return pad_batch(sequences, length);
}

/// Default checkpoint directory name per transformer family.
std::string default_checkpoint(ModelVariant variant) {
  return variant == ModelVariant::kMBert ? "bert-base-multilingual-cased"
                                         : "ai4bharat/indic-bert";
}

const WordPieceTokenizer& tokenizer_of(const Classifier& classifier) {
  const auto* transformer = dynamic_cast<const TransformerClassifier*>(&classifier);
  if (transformer == nullptr) {
    throw SpecMismatch("model has no subword tokenizer");
  }
  return transformer->backend().tokenizer();
}

/// Builds the per-family trainer inputs for one partition.
TrainingData featurize_partition(const std::vector<CommentRecord>& records,
                                 const Classifier& classifier,
                                 const Vocabulary* vocab) {
  TrainingData data;
  const ModelSpec& spec = classifier.spec();
  if (spec.is_transformer()) {
    data.encoded = encode_with_tokenizer(texts_of(records),
                                         tokenizer_of(classifier),
                                         spec.max_tokens);
  } else {
    data.padded = encode_padded(records, *vocab, spec.sequence_length);
  }
  data.labels = labels_of(records);
  data.validate();
  return data;
}

json read_manifest_if_any(const std::filesystem::path& model_dir) {
  const auto path = model_dir / "manifest.json";
  if (!std::filesystem::exists(path)) return json::object();
  return json::parse(read_file(path));
}

}  // namespace

void cmd_prepare(const PrepareOptions& options) {
  const Language language = parse_language(options.language);
  SplitRatios ratios;
  ratios.train = options.train_fraction;
  ratios.validation = options.validation_fraction;
  ratios.test = options.test_fraction;
  ratios.validate();

  std::vector<CommentRecord> records = load_dataset(options.dataset, language);
  const std::size_t emptied = clean_records(records);

  const ClassCounts counts = class_distribution(records);
  std::string reference_check = "skipped (corpus size differs from the reference)";
  const bool check = options.expect_reference_counts ||
                     records.size() == published_total(language);
  if (check) {
    const std::vector<std::string> deltas = distribution_deltas(language, counts);
    if (deltas.empty()) {
      reference_check = "ok";
    } else {
      std::string detail = "class distribution differs from the reference corpus:";
      for (const std::string& line : deltas) detail += "\n  " + line;
      if (!options.allow_count_mismatch) {
        throw ValidationError(detail +
                              "\n(--allow-count-mismatch downgrades this to a "
                              "warning)");
      }
      std::clog << "warning: " << detail << "\n";
      reference_check = "mismatch (allowed)";
    }
  }

  const DatasetSplit split =
      split_dataset(records, ratios, options.seed, /*stratified=*/true);
  save_split(options.out_dir, split);

  json manifest;
  manifest["command"] = "prepare";
  manifest["dataset"] = file_entry(options.dataset);
  manifest["language"] = std::string(language_name(language));
  manifest["seed"] = options.seed;
  manifest["ratios"] = {ratios.train, ratios.validation, ratios.test};
  manifest["records"] = records.size();
  manifest["empty_after_cleaning"] = emptied;
  manifest["reference_check"] = reference_check;
  write_file_atomic(options.out_dir / "manifest.json", manifest.dump(2) + "\n");

  std::cout << "language: " << language_name(language) << "\n"
            << "records: " << records.size() << " (" << emptied
            << " cleaned to empty)\n"
            << "reference distribution: " << reference_check << "\n"
            << "train: " << split.train.size() << " ("
            << counts_line(class_distribution(split.train)) << ")\n"
            << "validation: " << split.validation.size() << " ("
            << counts_line(class_distribution(split.validation)) << ")\n"
            << "test: " << split.test.size() << " ("
            << counts_line(class_distribution(split.test)) << ")\n"
            << "wrote " << options.out_dir.string() << "\n";
}

namespace {

struct TrainSetup {
  ModelSpec spec;
  TrainConfig config;
  std::optional<std::filesystem::path> vectors;
  int max_vocab = 20000;
  int requested_length = 0;  // 0 = derive from the training corpus
};

TrainSetup resolve_train_setup(const TrainOptions& options) {
  TrainSetup setup;
  setup.spec.variant = parse_variant(options.model);
  setup.config = default_train_config(setup.spec.variant);

  IniConfig ini;
  if (options.config.has_value()) {
    ini = IniConfig::parse_file(*options.config);
    ini.require_known_keys({
        {"model",
         {"filters", "kernel_width", "hidden_units", "embedding_dim",
          "max_vocab", "sequence_length", "max_tokens", "checkpoint",
          "trainable_embeddings", "vectors"}},
        {"train", {"epochs", "batch_size", "learning_rate", "seed"}},
    });
  }

  ModelSpec& spec = setup.spec;
  spec.filters = static_cast<int>(ini.get_int("model", "filters", spec.filters));
  spec.kernel_width =
      static_cast<int>(ini.get_int("model", "kernel_width", spec.kernel_width));
  spec.hidden_units =
      static_cast<int>(ini.get_int("model", "hidden_units", spec.hidden_units));
  spec.embedding_dim =
      static_cast<int>(ini.get_int("model", "embedding_dim", spec.embedding_dim));
  spec.max_tokens =
      static_cast<int>(ini.get_int("model", "max_tokens", spec.max_tokens));
  spec.trainable_embeddings =
      ini.get_bool("model", "trainable_embeddings", spec.trainable_embeddings);
  spec.checkpoint = ini.get("model", "checkpoint", "");
  setup.max_vocab =
      static_cast<int>(ini.get_int("model", "max_vocab", setup.max_vocab));
  setup.requested_length =
      static_cast<int>(ini.get_int("model", "sequence_length", 0));
  if (ini.has("model", "vectors")) {
    setup.vectors = std::filesystem::path(ini.get("model", "vectors"));
  }

  TrainConfig& config = setup.config;
  config.epochs = static_cast<int>(ini.get_int("train", "epochs", config.epochs));
  config.batch_size =
      static_cast<int>(ini.get_int("train", "batch_size", config.batch_size));
  config.learning_rate =
      ini.get_double("train", "learning_rate", config.learning_rate);
  config.seed = static_cast<std::uint64_t>(
      ini.get_int("train", "seed", static_cast<std::int64_t>(config.seed)));

  // Command-line flags win over the config file.
  if (options.epochs.has_value()) config.epochs = *options.epochs;
  if (options.batch_size.has_value()) config.batch_size = *options.batch_size;
  if (options.learning_rate.has_value()) {
    config.learning_rate = *options.learning_rate;
  }
  if (options.seed.has_value()) config.seed = *options.seed;
  if (options.vectors.has_value()) setup.vectors = options.vectors;
  if (options.checkpoint.has_value()) spec.checkpoint = *options.checkpoint;
  if (spec.is_transformer() && spec.checkpoint.empty()) {
    spec.checkpoint = default_checkpoint(spec.variant);
  }

  config.validate();
  if (setup.requested_length < 0) {
    throw ConfigError("sequence_length must be positive");
  }
  if (setup.max_vocab < 3) throw ConfigError("max_vocab must be at least 3");
  return setup;
}

}  // namespace

void cmd_train(const TrainOptions& options) {
  TrainSetup setup = resolve_train_setup(options);
  ModelSpec& spec = setup.spec;

  const DatasetSplit split = load_split(options.splits_dir);
  std::vector<CommentRecord> train_records = split.train;
  std::vector<CommentRecord> validation_records = split.validation;
  // Splits written by `prepare` are already clean; cleaning is idempotent,
  // so this only matters for hand-made split directories.
  clean_records(train_records);
  clean_records(validation_records);
  if (train_records.empty()) throw ConfigError("training split is empty");

  json manifest;
  manifest["command"] = "train";
  manifest["model"] = variant_name(spec.variant);
  manifest["display"] = display_name(spec.variant);
  manifest["language"] = std::string(language_name(split.language));
  manifest["seed"] = setup.config.seed;
  manifest["train_config"] = {{"epochs", setup.config.epochs},
                              {"batch_size", setup.config.batch_size},
                              {"learning_rate", setup.config.learning_rate},
                              {"optimizer", setup.config.optimizer},
                              {"loss", setup.config.loss}};
  manifest["splits"] = {
      {"train", file_entry(options.splits_dir / "train.tsv")},
      {"validation", file_entry(options.splits_dir / "validation.tsv")},
      {"test", file_entry(options.splits_dir / "test.tsv")},
  };

  std::unique_ptr<Classifier> classifier;
  Vocabulary vocab;
  Rng rng(setup.config.seed);
  if (spec.is_transformer()) {
    const std::filesystem::path checkpoint_dir = resolve_checkpoint(spec.checkpoint);
    manifest["checkpoint"] = {
        {"name", spec.checkpoint},
        {"config_sha256", sha256_file(checkpoint_dir / "config.json")},
    };
    classifier = build_classifier(spec, rng, nullptr);
  } else {
    vocab = build_vocabulary(texts_of(train_records), setup.max_vocab);
    spec.vocab_size = vocab.size();

    std::vector<TokenSequence> sequences;
    sequences.reserve(train_records.size());
    for (const CommentRecord& record : train_records) {
      sequences.push_back(encode(record.text, vocab));
    }
    spec.sequence_length = setup.requested_length > 0
                               ? setup.requested_length
                               : suggest_max_length(sequences);
    if (spec.variant == ModelVariant::kCnn) {
      spec.sequence_length = std::max(spec.sequence_length, spec.kernel_width);
    }

    if (setup.vectors.has_value()) {
      const LoadedEmbeddings loaded = load_embeddings(
          *setup.vectors, vocab, spec.embedding_dim, setup.config.seed);
      manifest["embeddings"] = {{"source", setup.vectors->string()},
                                {"dimension", spec.embedding_dim},
                                {"matched_tokens", loaded.matched_tokens},
                                {"coverage", loaded.coverage}};
      classifier = build_classifier(spec, rng, &loaded.matrix);
    } else {
      manifest["embeddings"] = {{"source", "random (corpus-local)"},
                                {"dimension", spec.embedding_dim}};
      classifier = build_classifier(spec, rng, nullptr);
    }
    manifest["vocab_size"] = spec.vocab_size;
    manifest["sequence_length"] = spec.sequence_length;
  }

  const Vocabulary* vocab_ptr = spec.is_transformer() ? nullptr : &vocab;
  const TrainingData training =
      featurize_partition(train_records, *classifier, vocab_ptr);
  std::optional<TrainingData> validation;
  if (!validation_records.empty()) {
    validation = featurize_partition(validation_records, *classifier, vocab_ptr);
  }

  const TrainHistory history =
      train(*classifier, training,
            validation.has_value() ? &*validation : nullptr, setup.config);

  manifest["parameter_count"] = classifier->parameter_count();
  const EpochStats& last = history.back();
  json final_stats;
  final_stats["train_loss"] = last.train_loss;
  if (last.validation_loss.has_value()) {
    final_stats["validation_loss"] = *last.validation_loss;
    final_stats["validation_weighted_f1"] = *last.validation_weighted_f1;
  }
  manifest["final"] = final_stats;

  save_classifier(*classifier, options.out_dir, vocab_ptr);
  write_file_atomic(options.out_dir / "history.jsonl", history_to_jsonl(history));
  write_file_atomic(options.out_dir / "manifest.json", manifest.dump(2) + "\n");

  std::cout << "trained " << display_name(spec.variant) << " on "
            << train_records.size() << " examples ("
            << language_name(split.language) << ")\n"
            << "final train loss: " << last.train_loss << "\n";
  if (last.validation_weighted_f1.has_value()) {
    std::cout << "validation weighted F1: "
              << format_2dp(*last.validation_weighted_f1) << "\n";
  }
  std::cout << "wrote " << options.out_dir.string() << "\n";
}

void cmd_evaluate(const EvaluateOptions& options) {
  if (options.splits_dir.has_value() == options.dataset.has_value()) {
    throw ConfigError("pass exactly one of --splits-dir or --dataset");
  }

  Vocabulary vocab;
  std::unique_ptr<Classifier> classifier =
      load_classifier(options.model_dir, &vocab);
  const json model_manifest = read_manifest_if_any(options.model_dir);

  std::filesystem::path data_path;
  Language language = Language::kMalayalam;
  if (options.splits_dir.has_value()) {
    const DatasetSplit split = load_split(*options.splits_dir);
    language = split.language;
    data_path = *options.splits_dir / "test.tsv";
  } else {
    data_path = *options.dataset;
    if (options.language.has_value()) {
      language = parse_language(*options.language);
    } else if (model_manifest.contains("language")) {
      language = parse_language(model_manifest.at("language").get<std::string>());
    } else {
      throw ConfigError("pass --language: the model manifest does not name one");
    }
  }

  std::vector<CommentRecord> records = load_dataset(data_path, language);
  if (records.empty()) {
    throw EmptyEvaluation("no labeled records in " + data_path.string());
  }
  clean_records(records);

  const ModelSpec& spec = classifier->spec();
  const std::vector<CategoryLabel> gold = labels_of(records);
  Eigen::MatrixXd probabilities;
  if (spec.is_transformer()) {
    probabilities = classifier->predict_proba(encode_with_tokenizer(
        texts_of(records), tokenizer_of(*classifier), spec.max_tokens));
  } else {
    probabilities = classifier->predict_proba(
        encode_padded(records, vocab, spec.sequence_length));
  }

  const EvaluationReport report = evaluate_predictions(
      display_name(spec.variant), std::string(language_name(language)), gold,
      predict(probabilities));

  json j = report_to_json(report);
  j["manifest"] = {
      {"command", "evaluate"},
      {"weights_sha256", sha256_file(options.model_dir / "weights.safetensors")},
      {"data", file_entry(data_path)},
      {"rows", records.size()},
  };
  std::filesystem::create_directories(options.out_dir);
  write_file_atomic(options.out_dir / "report.json", j.dump(2) + "\n");
  write_file_atomic(options.out_dir / "row.txt", render_row(report) + "\n");

  std::cout << render_table(capitalized(report.language), {report})
            << "wrote " << (options.out_dir / "report.json").string() << "\n";
}

void cmd_predict(const PredictOptions& options) {
  Vocabulary vocab;
  std::unique_ptr<Classifier> classifier =
      load_classifier(options.model_dir, &vocab);
  const Language language = parse_language(options.language);

  std::vector<CommentRecord> records = load_unlabeled(options.input, language);
  clean_records(records);

  std::string out =
      "id\tcategory\tp_homophobic\tp_transphobic\tp_non_anti_lgbt\n";
  if (!records.empty()) {
    const ModelSpec& spec = classifier->spec();
    Eigen::MatrixXd probabilities;
    if (spec.is_transformer()) {
      probabilities = classifier->predict_proba(encode_with_tokenizer(
          texts_of(records), tokenizer_of(*classifier), spec.max_tokens));
    } else {
      probabilities = classifier->predict_proba(
          encode_padded(records, vocab, spec.sequence_length));
    }
    const std::vector<CategoryLabel> labels = predict(probabilities);
    for (std::size_t i = 0; i < records.size(); ++i) {
      char numbers[64];
      const auto row = static_cast<Eigen::Index>(i);
      std::snprintf(numbers, sizeof numbers, "%.6f\t%.6f\t%.6f",
                    probabilities(row, 0), probabilities(row, 1),
                    probabilities(row, 2));
      out += records[i].id + "\t" + std::string(label_name(labels[i])) + "\t" +
             numbers + "\n";
    }
  }
  write_file_atomic(options.out, out);
  std::cout << "wrote " << records.size() << " predictions to "
            << options.out.string() << "\n";
}

namespace {

int model_rank(const std::string& display) {
  if (display == "CNN") return 0;
  if (display == "LSTM") return 1;
  if (display == "mBERT") return 2;
  if (display == "IndicBERT") return 3;
  return 4;
}

int language_rank(const std::string& language) {
  if (language == "malayalam") return 0;
  if (language == "tamil") return 1;
  return 2;
}

struct ExpectedScore {
  std::string language;
  std::string model;
  double weighted_f1 = 0.0;
};

std::vector<ExpectedScore> load_expected(const std::filesystem::path& path) {
  std::vector<ExpectedScore> expected;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    ExpectedScore score;
    std::string weighted;
    if (!std::getline(fields, score.language, '\t') ||
        !std::getline(fields, score.model, '\t') ||
        !std::getline(fields, weighted, '\t')) {
      throw ConfigError("expected-scores line " + std::to_string(number) +
                        " is not language<TAB>model<TAB>weighted_f1");
    }
    score.language = std::string(language_name(parse_language(score.language)));
    score.model = display_name(parse_variant(score.model));
    try {
      score.weighted_f1 = std::stod(weighted);
    } catch (const std::exception&) {
      throw ConfigError("expected-scores line " + std::to_string(number) +
                        ": \"" + weighted + "\" is not a number");
    }
    expected.push_back(std::move(score));
  }
  return expected;
}

}  // namespace

void cmd_report(const ReportOptions& options) {
  if (options.reports.empty()) {
    throw ConfigError("pass at least one report.json");
  }
  if (!(options.tolerance >= 0.0)) {
    throw ConfigError("tolerance must be non-negative");
  }

  std::vector<EvaluationReport> reports;
  reports.reserve(options.reports.size());
  for (const std::filesystem::path& path : options.reports) {
    reports.push_back(report_from_json(json::parse(read_file(path))));
  }

  std::stable_sort(reports.begin(), reports.end(),
                   [](const EvaluationReport& a, const EvaluationReport& b) {
                     if (a.language != b.language) {
                       const int ra = language_rank(a.language);
                       const int rb = language_rank(b.language);
                       return ra != rb ? ra < rb : a.language < b.language;
                     }
                     return model_rank(a.model) < model_rank(b.model);
                   });

  std::string output;
  std::size_t begin = 0;
  while (begin < reports.size()) {
    std::size_t end = begin;
    while (end < reports.size() &&
           reports[end].language == reports[begin].language) {
      ++end;
    }
    const std::vector<EvaluationReport> group(reports.begin() + begin,
                                              reports.begin() + end);
    if (!output.empty()) output += "\n";
    output += render_table(capitalized(group.front().language), group);
    begin = end;
  }

  std::size_t outside = 0;
  if (options.expected.has_value()) {
    const std::vector<ExpectedScore> expected = load_expected(*options.expected);
    output += "\n";
    for (const EvaluationReport& report : reports) {
      for (const ExpectedScore& score : expected) {
        if (score.language != report.language || score.model != report.model) {
          continue;
        }
        const double delta = std::abs(report.weighted_f1 - score.weighted_f1);
        const bool within = delta <= options.tolerance;
        if (!within) ++outside;
        char line[160];
        std::snprintf(line, sizeof line,
                      "%s %s: weighted F1 %s vs expected %s (delta %.3f) %s "
                      "tolerance %.2f\n",
                      report.model.c_str(), report.language.c_str(),
                      format_2dp(report.weighted_f1).c_str(),
                      format_2dp(score.weighted_f1).c_str(), delta,
                      within ? "within" : "OUTSIDE", options.tolerance);
        output += line;
      }
    }
  }

  if (options.out.has_value()) write_file_atomic(*options.out, output);
  std::cout << output;
  if (outside > 0) {
    if (options.strict) {
      throw RuntimeFailure(std::to_string(outside) +
                           " result(s) outside tolerance");
    }
    std::clog << "note: " << outside
              << " result(s) outside tolerance (informational; use --strict "
                 "to fail)\n";
  }
}

}  // namespace htd
