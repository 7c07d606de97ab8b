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

/// End-to-end coverage: every test drives the real binary through a shell,
/// exactly as a user would, and inspects only its exit codes, streams and
/// artifact files.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "htd/metrics.hpp"
#include "testutil.hpp"

using nlohmann::json;
using testutil::CliResult;
using testutil::run_cli;
using testutil::TempDir;

namespace {

/// Writes a 30-comment Malayalam corpus and prepares splits under `root`.
/// Returns the splits directory.
std::filesystem::path prepare_corpus(const TempDir& tmp) {
  const auto data = tmp.path() / "data.tsv";
  testutil::write_labeled_tsv(data, testutil::separable_corpus(10, htd::Language::kMalayalam));
  const auto splits = tmp.path() / "splits";
  const CliResult result = run_cli({"prepare", "--dataset", data.string(),
                                    "--out", splits.string(), "--language",
                                    "malayalam"},
                                   tmp.path());
  REQUIRE(result.exit_code == 0);
  return splits;
}

/// Trains a small sequence model on the prepared splits.
std::filesystem::path train_model(const TempDir& tmp,
                                  const std::filesystem::path& splits,
                                  const std::string& model,
                                  const std::string& out_name,
                                  const std::string& epochs) {
  const auto model_dir = tmp.path() / out_name;
  const CliResult result = run_cli(
      {"train", "--splits-dir", splits.string(), "--out", model_dir.string(),
       "--model", model, "--epochs", epochs, "--learning-rate", "0.01",
       "--seed", "9"},
      tmp.path());
  REQUIRE(result.exit_code == 0);
  return model_dir;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("the command line reports usage and argument errors cleanly") {
  TempDir tmp;

  const CliResult no_args = run_cli({}, tmp.path());
  CHECK(no_args.exit_code == 2);

  const CliResult help = run_cli({"--help"}, tmp.path());
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("prepare") != std::string::npos);
  CHECK(help.out.find("report") != std::string::npos);

  const CliResult unknown = run_cli({"frobnicate"}, tmp.path());
  CHECK(unknown.exit_code == 2);

  const CliResult missing = run_cli(
      {"prepare", "--out", (tmp.path() / "x").string(), "--language",
       "malayalam"},
      tmp.path());
  CHECK(missing.exit_code == 2);
  CHECK(missing.err.find("error") != std::string::npos);

  const CliResult bad_model = run_cli(
      {"train", "--splits-dir", (tmp.path() / "nope").string(), "--out",
       (tmp.path() / "model").string(), "--model", "gpt"},
      tmp.path());
  CHECK(bad_model.exit_code == 2);
}

TEST_CASE("prepare splits a labeled corpus deterministically") {
  TempDir tmp;
  const auto data = tmp.path() / "data.tsv";
  testutil::write_labeled_tsv(data, testutil::separable_corpus(10, htd::Language::kMalayalam));

  const auto splits = tmp.path() / "splits";
  const CliResult result = run_cli({"prepare", "--dataset", data.string(),
                                    "--out", splits.string(), "--language",
                                    "malayalam"},
                                   tmp.path());
  REQUIRE(result.exit_code == 0);
  CHECK(result.out.find("records: 30") != std::string::npos);
  CHECK(result.out.find("train: 24") != std::string::npos);
  CHECK(result.out.find("validation: 3") != std::string::npos);
  CHECK(result.out.find("test: 3") != std::string::npos);
  for (const char* file : {"train.tsv", "validation.tsv", "test.tsv",
                           "split_meta.json", "manifest.json"}) {
    CHECK(std::filesystem::exists(splits / file));
  }

  // A rerun with identical inputs reproduces every artifact byte for byte.
  const auto again = tmp.path() / "splits_again";
  const CliResult rerun = run_cli({"prepare", "--dataset", data.string(),
                                   "--out", again.string(), "--language",
                                   "malayalam"},
                                  tmp.path());
  REQUIRE(rerun.exit_code == 0);
  for (const char* file : {"train.tsv", "validation.tsv", "test.tsv",
                           "split_meta.json", "manifest.json"}) {
    CHECK(testutil::slurp(splits / file) == testutil::slurp(again / file));
  }

  const CliResult missing = run_cli(
      {"prepare", "--dataset", (tmp.path() / "absent.tsv").string(), "--out",
       (tmp.path() / "s2").string(), "--language", "malayalam"},
      tmp.path());
  CHECK(missing.exit_code == 2);
}

TEST_CASE("prepare checks the reference distribution on demand") {
  TempDir tmp;
  const auto data = tmp.path() / "data.tsv";
  testutil::write_labeled_tsv(data, testutil::separable_corpus(10, htd::Language::kMalayalam));

  // Thirty comments are nowhere near the reference corpus, so the check
  // fails loudly when forced...
  const CliResult strict = run_cli(
      {"prepare", "--dataset", data.string(), "--out",
       (tmp.path() / "s1").string(), "--language", "malayalam",
       "--expect-reference-counts"},
      tmp.path());
  CHECK(strict.exit_code == 2);
  CHECK(strict.err.find("expected 2434") != std::string::npos);

  // ...and degrades to a warning when the mismatch is allowed.
  const CliResult relaxed = run_cli(
      {"prepare", "--dataset", data.string(), "--out",
       (tmp.path() / "s2").string(), "--language", "malayalam",
       "--expect-reference-counts", "--allow-count-mismatch"},
      tmp.path());
  CHECK(relaxed.exit_code == 0);
  CHECK(relaxed.err.find("warning") != std::string::npos);
  CHECK(relaxed.out.find("mismatch (allowed)") != std::string::npos);
}

TEST_CASE("train writes a complete and reproducible model artifact") {
  TempDir tmp;
  const auto splits = prepare_corpus(tmp);
  const auto model_dir = train_model(tmp, splits, "cnn", "model_cnn", "6");

  for (const char* file : {"spec.json", "weights.safetensors",
                           "label_order.txt", "vocab.tsv", "history.jsonl",
                           "manifest.json"}) {
    CHECK(std::filesystem::exists(model_dir / file));
  }

  const json manifest = json::parse(testutil::slurp(model_dir / "manifest.json"));
  CHECK(manifest.at("command") == "train");
  CHECK(manifest.at("model") == "cnn");
  CHECK(manifest.at("display") == "CNN");
  CHECK(manifest.at("language") == "malayalam");
  CHECK(manifest.at("seed") == 9);
  CHECK(manifest.at("train_config").at("epochs") == 6);
  CHECK(manifest.at("train_config").at("optimizer") == "adam");
  CHECK(manifest.at("splits").contains("train"));
  CHECK(manifest.at("vocab_size").get<int>() >= 14);
  CHECK(manifest.at("parameter_count").get<std::int64_t>() > 0);
  CHECK(manifest.at("final").contains("validation_weighted_f1"));

  CHECK(split_lines(testutil::slurp(model_dir / "history.jsonl")).size() == 6);

  // Retraining with the same seed reproduces the weights bit for bit.
  const auto second = train_model(tmp, splits, "cnn", "model_cnn_again", "6");
  CHECK(testutil::slurp(model_dir / "weights.safetensors") ==
        testutil::slurp(second / "weights.safetensors"));
}

TEST_CASE("train honours the ini config and rejects unknown keys") {
  TempDir tmp;
  const auto splits = prepare_corpus(tmp);

  const auto config = tmp.path() / "config.ini";
  testutil::spit(config,
                 "[model]\n"
                 "filters = 5\n"
                 "embedding_dim = 12\n"
                 "sequence_length = 9\n"
                 "\n"
                 "[train]\n"
                 "epochs = 3\n"
                 "batch_size = 8\n"
                 "learning_rate = 0.01\n");
  const auto model_dir = tmp.path() / "model_ini";
  const CliResult result = run_cli(
      {"train", "--splits-dir", splits.string(), "--out", model_dir.string(),
       "--model", "cnn", "--config", config.string()},
      tmp.path());
  REQUIRE(result.exit_code == 0);

  const json spec = json::parse(testutil::slurp(model_dir / "spec.json"));
  CHECK(spec.at("filters") == 5);
  CHECK(spec.at("embedding_dim") == 12);
  CHECK(spec.at("sequence_length") == 9);
  const json manifest = json::parse(testutil::slurp(model_dir / "manifest.json"));
  CHECK(manifest.at("train_config").at("epochs") == 3);
  CHECK(manifest.at("train_config").at("batch_size") == 8);

  // Command-line flags beat the file.
  const auto overridden = tmp.path() / "model_ini2";
  const CliResult with_flag = run_cli(
      {"train", "--splits-dir", splits.string(), "--out", overridden.string(),
       "--model", "cnn", "--config", config.string(), "--epochs", "2"},
      tmp.path());
  REQUIRE(with_flag.exit_code == 0);
  CHECK(split_lines(testutil::slurp(overridden / "history.jsonl")).size() == 2);

  testutil::spit(tmp.path() / "bad.ini", "[model]\nbogus = 1\n");
  const CliResult bad = run_cli(
      {"train", "--splits-dir", splits.string(), "--out",
       (tmp.path() / "model_bad").string(), "--model", "cnn", "--config",
       (tmp.path() / "bad.ini").string()},
      tmp.path());
  CHECK(bad.exit_code == 2);
}

TEST_CASE("evaluate scores the test split and reruns byte-identically") {
  TempDir tmp;
  const auto splits = prepare_corpus(tmp);
  const auto model_dir = train_model(tmp, splits, "cnn", "model_cnn", "6");

  const auto eval_dir = tmp.path() / "eval";
  const CliResult result = run_cli(
      {"evaluate", "--model-dir", model_dir.string(), "--splits-dir",
       splits.string(), "--out", eval_dir.string()},
      tmp.path());
  REQUIRE(result.exit_code == 0);
  CHECK(std::filesystem::exists(eval_dir / "report.json"));
  CHECK(std::filesystem::exists(eval_dir / "row.txt"));
  CHECK(result.out.find("Malayalam") != std::string::npos);

  const json report = json::parse(testutil::slurp(eval_dir / "report.json"));
  CHECK(report.at("model") == "CNN");
  CHECK(report.at("language") == "malayalam");
  CHECK(report.at("per_class").size() == 3);
  const double weighted = report.at("weighted_f1").get<double>();
  CHECK(weighted >= 0.0);
  CHECK(weighted <= 1.0);
  CHECK(report.at("manifest").at("rows") == 3);

  const std::string row = testutil::slurp(eval_dir / "row.txt");
  CHECK(std::count(row.begin(), row.end(), '|') == 3);
  const std::size_t tail = row.find_last_of('|');
  std::istringstream last_field(row.substr(tail + 1));
  std::string rendered;
  last_field >> rendered;
  CHECK(rendered == htd::format_2dp(weighted));

  const auto eval_again = tmp.path() / "eval_again";
  const CliResult rerun = run_cli(
      {"evaluate", "--model-dir", model_dir.string(), "--splits-dir",
       splits.string(), "--out", eval_again.string()},
      tmp.path());
  REQUIRE(rerun.exit_code == 0);
  CHECK(testutil::slurp(eval_dir / "report.json") ==
        testutil::slurp(eval_again / "report.json"));
  CHECK(testutil::slurp(eval_dir / "row.txt") ==
        testutil::slurp(eval_again / "row.txt"));

  // An explicit dataset needs --language (or a manifest that names one).
  const CliResult full = run_cli(
      {"evaluate", "--model-dir", model_dir.string(), "--dataset",
       (tmp.path() / "data.tsv").string(), "--language", "malayalam", "--out",
       (tmp.path() / "eval_full").string()},
      tmp.path());
  REQUIRE(full.exit_code == 0);
  const json full_report =
      json::parse(testutil::slurp(tmp.path() / "eval_full" / "report.json"));
  CHECK(full_report.at("manifest").at("rows") == 30);

  const CliResult both = run_cli(
      {"evaluate", "--model-dir", model_dir.string(), "--splits-dir",
       splits.string(), "--dataset", (tmp.path() / "data.tsv").string(),
       "--out", (tmp.path() / "eval_both").string()},
      tmp.path());
  CHECK(both.exit_code == 2);

  testutil::spit(tmp.path() / "empty.tsv", "id\tcomment\tcategory\n");
  const CliResult empty = run_cli(
      {"evaluate", "--model-dir", model_dir.string(), "--dataset",
       (tmp.path() / "empty.tsv").string(), "--language", "malayalam", "--out",
       (tmp.path() / "eval_empty").string()},
      tmp.path());
  CHECK(empty.exit_code == 2);
}

TEST_CASE("predict labels unlabeled comments with six-digit probabilities") {
  TempDir tmp;
  const auto splits = prepare_corpus(tmp);
  const auto model_dir = train_model(tmp, splits, "cnn", "model_cnn", "6");

  const auto input = tmp.path() / "unlabeled.tsv";
  testutil::write_unlabeled_tsv(
      input, {{"u1", "bolt brine basil bolt"},
              {"u2", "cedar coral cumin"},
              {"u3", "zzz qqq unknown words"},
              {"u4", "123 456"}});  // cleans to an empty comment
  const auto out = tmp.path() / "predictions.tsv";
  const CliResult result = run_cli({"predict", "--model-dir",
                                    model_dir.string(), "--input",
                                    input.string(), "--out", out.string()},
                                   tmp.path());
  REQUIRE(result.exit_code == 0);

  const std::vector<std::string> lines = split_lines(testutil::slurp(out));
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] ==
        "id\tcategory\tp_homophobic\tp_transphobic\tp_non_anti_lgbt");
  const std::vector<std::string> ids = {"u1", "u2", "u3", "u4"};
  for (std::size_t i = 0; i < 4; ++i) {
    std::istringstream fields(lines[i + 1]);
    std::string id, category, p1, p2, p3;
    std::getline(fields, id, '\t');
    std::getline(fields, category, '\t');
    std::getline(fields, p1, '\t');
    std::getline(fields, p2, '\t');
    std::getline(fields, p3, '\t');
    CHECK(id == ids[i]);
    const bool known = category == "Homophobic" || category == "Transphobic" ||
                       category == "Non-anti-LGBT+content";
    CHECK(known);
    for (const std::string& p : {p1, p2, p3}) {
      CHECK(p.size() == 8);  // 0.xxxxxx
      CHECK(p.find('.') == 1);
    }
    const double total = std::stod(p1) + std::stod(p2) + std::stod(p3);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("transformers train and evaluate against a local checkpoint") {
  TempDir tmp;
  const auto splits = prepare_corpus(tmp);

  // The default mBERT checkpoint name, resolved through the cache variable.
  const auto cache = tmp.path() / "cache";
  testutil::write_synthetic_checkpoint(cache / "bert-base-multilingual-cased");
  const std::string env =
      "HTD_CHECKPOINT_DIR=" + testutil::shell_quote(cache.string()) + " ";

  const auto model_dir = tmp.path() / "model_mbert";
  const CliResult trained = run_cli(
      {"train", "--splits-dir", splits.string(), "--out", model_dir.string(),
       "--model", "mbert", "--epochs", "2", "--batch-size", "8"},
      tmp.path(), env);
  REQUIRE(trained.exit_code == 0);
  CHECK(std::filesystem::exists(model_dir / "weights.safetensors"));
  CHECK_FALSE(std::filesystem::exists(model_dir / "vocab.tsv"));
  const json manifest = json::parse(testutil::slurp(model_dir / "manifest.json"));
  CHECK(manifest.at("checkpoint").at("name") == "bert-base-multilingual-cased");
  CHECK(split_lines(testutil::slurp(model_dir / "history.jsonl")).size() == 2);

  const auto eval_dir = tmp.path() / "eval_mbert";
  const CliResult evaluated = run_cli(
      {"evaluate", "--model-dir", model_dir.string(), "--splits-dir",
       splits.string(), "--out", eval_dir.string()},
      tmp.path(), env);
  REQUIRE(evaluated.exit_code == 0);
  const json report = json::parse(testutil::slurp(eval_dir / "report.json"));
  CHECK(report.at("model") == "mBERT");

  // An explicit checkpoint directory needs no environment at all.
  const auto albert_dir = tmp.path() / "albert-checkpoint";
  testutil::write_synthetic_checkpoint(albert_dir,
                                       testutil::albert_checkpoint_options());
  const auto indic_dir = tmp.path() / "model_indicbert";
  const CliResult indic = run_cli(
      {"train", "--splits-dir", splits.string(), "--out", indic_dir.string(),
       "--model", "indicbert", "--checkpoint", albert_dir.string(),
       "--epochs", "2", "--batch-size", "8"},
      tmp.path());
  REQUIRE(indic.exit_code == 0);
  CHECK(json::parse(testutil::slurp(indic_dir / "manifest.json"))
            .at("display") == "IndicBERT");

  // Without a resolvable checkpoint the failure is a runtime error.
  const CliResult unavailable = run_cli(
      {"train", "--splits-dir", splits.string(), "--out",
       (tmp.path() / "model_none").string(), "--model", "mbert"},
      tmp.path());
  CHECK(unavailable.exit_code == 3);
  CHECK(unavailable.err.find("HTD_CHECKPOINT_DIR") != std::string::npos);
}

TEST_CASE("report merges evaluations and checks expected scores") {
  TempDir tmp;
  const auto splits = prepare_corpus(tmp);
  const auto cnn_dir = train_model(tmp, splits, "cnn", "model_cnn", "6");
  const auto lstm_dir = train_model(tmp, splits, "lstm", "model_lstm", "3");

  const auto eval_cnn = tmp.path() / "eval_cnn";
  const auto eval_lstm = tmp.path() / "eval_lstm";
  REQUIRE(run_cli({"evaluate", "--model-dir", cnn_dir.string(), "--splits-dir",
                   splits.string(), "--out", eval_cnn.string()},
                  tmp.path())
              .exit_code == 0);
  REQUIRE(run_cli({"evaluate", "--model-dir", lstm_dir.string(),
                   "--splits-dir", splits.string(), "--out",
                   eval_lstm.string()},
                  tmp.path())
              .exit_code == 0);

  // Reports are passed in the wrong order on purpose; the table sorts them.
  const auto table_path = tmp.path() / "tables.txt";
  const CliResult merged = run_cli(
      {"report", (eval_lstm / "report.json").string(),
       (eval_cnn / "report.json").string(), "--out", table_path.string()},
      tmp.path());
  REQUIRE(merged.exit_code == 0);
  CHECK(merged.out.find("Malayalam") != std::string::npos);
  const std::size_t cnn_at = merged.out.find("CNN");
  const std::size_t lstm_at = merged.out.find("LSTM");
  REQUIRE(cnn_at != std::string::npos);
  REQUIRE(lstm_at != std::string::npos);
  CHECK(cnn_at < lstm_at);
  CHECK(testutil::slurp(table_path) == merged.out);

  // Expected-score comparison: one exact match, one planted far away.
  const double cnn_f1 =
      json::parse(testutil::slurp(eval_cnn / "report.json"))
          .at("weighted_f1")
          .get<double>();
  const double lstm_f1 =
      json::parse(testutil::slurp(eval_lstm / "report.json"))
          .at("weighted_f1")
          .get<double>();
  std::ostringstream expected;
  expected << "# language\tmodel\tweighted_f1\n"
           << "malayalam\tcnn\t" << cnn_f1 << "\n"
           << "malayalam\tlstm\t" << lstm_f1 + 0.2 << "\n";
  const auto expected_path = tmp.path() / "expected.tsv";
  testutil::spit(expected_path, expected.str());

  const CliResult compared = run_cli(
      {"report", (eval_cnn / "report.json").string(),
       (eval_lstm / "report.json").string(), "--expected",
       expected_path.string()},
      tmp.path());
  CHECK(compared.exit_code == 0);  // informational by default
  CHECK(compared.out.find("within") != std::string::npos);
  CHECK(compared.out.find("OUTSIDE") != std::string::npos);
  CHECK(compared.err.find("informational") != std::string::npos);

  const CliResult strict = run_cli(
      {"report", (eval_cnn / "report.json").string(),
       (eval_lstm / "report.json").string(), "--expected",
       expected_path.string(), "--strict"},
      tmp.path());
  CHECK(strict.exit_code == 3);
  CHECK(strict.err.find("outside tolerance") != std::string::npos);

  // A generous tolerance brings the planted value back inside.
  const CliResult loose = run_cli(
      {"report", (eval_cnn / "report.json").string(),
       (eval_lstm / "report.json").string(), "--expected",
       expected_path.string(), "--tolerance", "0.5", "--strict"},
      tmp.path());
  CHECK(loose.exit_code == 0);
}
