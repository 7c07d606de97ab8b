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

#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "htd/commands.hpp"
#include "htd/errors.hpp"

namespace {

constexpr int kValidationExit = 2;
constexpr int kRuntimeExit = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "htd: trains and evaluates classifiers that flag homophobic and "
      "transphobic social-media comments in Malayalam and Tamil"};
  app.require_subcommand(1);

  htd::PrepareOptions prepare;
  CLI::App* prepare_cmd = app.add_subcommand(
      "prepare", "Clean a labeled dataset and write a stratified split");
  prepare_cmd->add_option("--dataset", prepare.dataset, "Labeled TSV input")
      ->required();
  prepare_cmd->add_option("--out", prepare.out_dir, "Split output directory")
      ->required();
  prepare_cmd
      ->add_option("--language", prepare.language, "malayalam or tamil")
      ->required();
  prepare_cmd->add_option("--seed", prepare.seed, "Shuffle seed (default 42)");
  prepare_cmd->add_option("--train-fraction", prepare.train_fraction,
                          "Training share (default 0.8)");
  prepare_cmd->add_option("--validation-fraction", prepare.validation_fraction,
                          "Validation share (default 0.1)");
  prepare_cmd->add_option("--test-fraction", prepare.test_fraction,
                          "Test share (default 0.1)");
  prepare_cmd->add_flag("--expect-reference-counts",
                        prepare.expect_reference_counts,
                        "Check class counts against the reference corpus even "
                        "for a different corpus size");
  prepare_cmd->add_flag("--allow-count-mismatch", prepare.allow_count_mismatch,
                        "Downgrade a reference-count mismatch to a warning");

  htd::TrainOptions train;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train one model family on a prepared split");
  train_cmd->add_option("--splits-dir", train.splits_dir,
                        "Directory written by prepare")
      ->required();
  train_cmd->add_option("--out", train.out_dir, "Model artifact directory")
      ->required();
  train_cmd
      ->add_option("--model", train.model, "cnn, lstm, mbert or indicbert")
      ->required();
  train_cmd->add_option("--config", train.config, "INI configuration file");
  train_cmd->add_option("--seed", train.seed,
                        "Initialization and shuffle seed (default 42)");
  train_cmd->add_option("--vectors", train.vectors,
                        "Pretrained word-vector file (sequence models)");
  train_cmd->add_option("--checkpoint", train.checkpoint,
                        "Checkpoint directory or name (transformers)");
  train_cmd->add_option("--epochs", train.epochs, "Override training epochs");
  train_cmd->add_option("--batch-size", train.batch_size,
                        "Override mini-batch size");
  train_cmd->add_option("--learning-rate", train.learning_rate,
                        "Override learning rate");

  htd::EvaluateOptions evaluate;
  CLI::App* evaluate_cmd = app.add_subcommand(
      "evaluate", "Score a saved model and write report.json + row.txt");
  evaluate_cmd->add_option("--model-dir", evaluate.model_dir,
                           "Trained model artifact directory")
      ->required();
  evaluate_cmd->add_option("--splits-dir", evaluate.splits_dir,
                           "Use the test partition of this split");
  evaluate_cmd->add_option("--dataset", evaluate.dataset,
                           "Score an explicit labeled TSV instead");
  evaluate_cmd->add_option("--out", evaluate.out_dir, "Report output directory")
      ->required();
  evaluate_cmd->add_option("--language", evaluate.language,
                           "Language of --dataset input");

  htd::PredictOptions predict;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "Label new comments with a saved model");
  predict_cmd->add_option("--model-dir", predict.model_dir,
                          "Trained model artifact directory")
      ->required();
  predict_cmd->add_option("--input", predict.input,
                          "TSV with a comment column (category optional)")
      ->required();
  predict_cmd->add_option("--out", predict.out, "Prediction TSV path")
      ->required();
  predict_cmd->add_option("--language", predict.language,
                          "Language tag for the records (default malayalam)");

  htd::ReportOptions report;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "Aggregate evaluation reports into result tables");
  report_cmd->add_option("reports", report.reports, "report.json files")
      ->required();
  report_cmd->add_option("--expected", report.expected,
                         "TSV of language<TAB>model<TAB>weighted_f1 to "
                         "compare against");
  report_cmd->add_option("--tolerance", report.tolerance,
                         "Allowed |actual - expected| (default 0.05)");
  report_cmd->add_flag("--strict", report.strict,
                       "Exit 3 when any weighted F1 is outside tolerance");
  report_cmd->add_option("--out", report.out, "Also write the tables here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::CallForAllHelp& help) {
    return app.exit(help);
  } catch (const CLI::CallForVersion& version) {
    return app.exit(version);
  } catch (const CLI::ParseError& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kValidationExit;
  }

  try {
    if (prepare_cmd->parsed()) {
      htd::cmd_prepare(prepare);
    } else if (train_cmd->parsed()) {
      htd::cmd_train(train);
    } else if (evaluate_cmd->parsed()) {
      htd::cmd_evaluate(evaluate);
    } else if (predict_cmd->parsed()) {
      htd::cmd_predict(predict);
    } else if (report_cmd->parsed()) {
      htd::cmd_report(report);
    }
    return 0;
  } catch (const htd::ValidationError& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kValidationExit;
  } catch (const htd::RuntimeFailure& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kRuntimeExit;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kRuntimeExit;
  }
}
