// logae: command-line front end for the telemetry autoencoder pipeline.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "logae/commands.hpp"

namespace {

using namespace logae;

struct Shared {
  std::string config_path;
  std::optional<std::uint64_t> seed;

  RunConfig resolve() const {
    RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) config.set_seed(*seed);
    return config;
  }
};

struct FilterFlags {
  std::string host, from, to;

  void add_to(CLI::App* app) {
    app->add_option("--host", host, "keep only this hostname");
    app->add_option("--from", from, "keep events at or after this time (ISO-8601 or epoch ms)");
    app->add_option("--to", to, "keep events before this time (ISO-8601 or epoch ms)");
  }
  CorpusFilter build() const {
    CorpusFilter f;
    if (!host.empty()) f.host = host;
    auto ts = [](const std::string& text, const char* flag) {
      auto v = parse_timestamp(text);
      if (!v) throw Error(std::string("bad timestamp for ") + flag + ": '" + text + "'");
      return *v;
    };
    if (!from.empty()) f.from_ms = ts(from, "--from");
    if (!to.empty()) f.to_ms = ts(to, "--to");
    return f;
  }
};

void print_counters(const char* what, const CorpusCounters& c) {
  std::fprintf(stderr, "%s: read %zu, kept %zu, skipped %zu, filtered %zu\n", what, c.read, c.yielded,
               c.skipped, c.filtered);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-embedding autoencoder anomaly detection for endpoint telemetry"};
  app.require_subcommand(1);
  Shared shared;
  app.add_option("--config", shared.config_path, "flat key = value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", shared.seed, "seed for every random draw (overrides the config file)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic train/test corpus with ground truth");
  std::string synth_out;
  bool synth_gzip = false;
  std::optional<std::size_t> synth_train, synth_test;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--train-records", synth_train, "training records across all hosts");
  synth->add_option("--test-records", synth_test, "test records across all hosts");
  synth->add_flag("--gzip", synth_gzip, "write gzip-compressed NDJSON");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "normalize raw NDJSON telemetry into canonical records");
  std::string ingest_in, ingest_out;
  FilterFlags ingest_filter;
  ingest->add_option("--input", ingest_in, "NDJSON, optionally .gz")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", ingest_out, "canonical NDJSON output")->required();
  ingest_filter.add_to(ingest);

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "turn telemetry into an unlabeled term stream");
  std::string prep_in, prep_out;
  FilterFlags prep_filter;
  prep->add_option("--input", prep_in, "NDJSON, optionally .gz")->required()->check(CLI::ExistingFile);
  prep->add_option("--out", prep_out, "term stream output")->required();
  prep_filter.add_to(prep);

  // build-vocab
  auto* vocab = app.add_subcommand("build-vocab", "count terms and write the vocabulary");
  std::string vocab_in, vocab_out;
  std::optional<std::uint64_t> vocab_floor;
  vocab->add_option("--input", vocab_in, "term stream")->required()->check(CLI::ExistingFile);
  vocab->add_option("--out", vocab_out, "vocabulary output")->required();
  vocab->add_option("--floor", vocab_floor, "terms seen fewer times fold into OBSCURE_TERM");

  // label
  auto* label = app.add_subcommand("label", "label telemetry from ground truth and emit a term stream");
  std::string label_in, label_truth, label_out;
  FilterFlags label_filter;
  label->add_option("--input", label_in, "NDJSON, optionally .gz")->required()->check(CLI::ExistingFile);
  label->add_option("--truth", label_truth, "ground-truth CSV")->required()->check(CLI::ExistingFile);
  label->add_option("--out", label_out, "labeled term stream output")->required();
  label_filter.add_to(label);

  // train
  auto* train = app.add_subcommand("train", "train the autoencoder on a term stream");
  std::string train_in, train_vocab, train_out, train_history;
  std::optional<std::int64_t> train_batches;
  train->add_option("--input", train_in, "term stream")->required()->check(CLI::ExistingFile);
  train->add_option("--vocab", train_vocab, "vocabulary")->required()->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "checkpoint output")->required();
  train->add_option("--loss-history", train_history, "loss history CSV output");
  train->add_option("--max-batches", train_batches, "number of minibatches (0 saves the initialization)");

  // score
  auto* score = app.add_subcommand("score", "score a term stream with a trained checkpoint");
  std::string score_in, score_ckpt, score_vocab, score_out, score_mode;
  score->add_option("--input", score_in, "term stream")->required()->check(CLI::ExistingFile);
  score->add_option("--checkpoint", score_ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  score->add_option("--vocab", score_vocab, "vocabulary the checkpoint was trained with")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--out", score_out, "scores CSV output")->required();
  score->add_option("--mode", score_mode, "ce (weighted cross entropy) or full (adds the reconstruction term)")
      ->check(CLI::IsMember({"ce", "full"}));

  // report
  auto* report = app.add_subcommand("report", "threshold, temporal, histogram and embedding reports");
  std::string report_test, report_train, report_out;
  std::optional<std::string> report_ckpt, report_vocab;
  report->add_option("--test-scores", report_test, "scores CSV for the test period")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--train-scores", report_train, "scores CSV for the training data")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--out-dir", report_out, "report directory")->required();
  report->add_option("--checkpoint", report_ckpt, "checkpoint for the embedding export")
      ->check(CLI::ExistingFile);
  report->add_option("--vocab", report_vocab, "vocabulary for the embedding export")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config = shared.resolve();
    if (synth->parsed()) {
      if (synth_train) config.scenario.train_records = *synth_train;
      if (synth_test) config.scenario.test_records = *synth_test;
      const auto paths = synth_command(config.scenario, synth_out, synth_gzip);
      std::cout << paths.train << '\n' << paths.test << '\n' << paths.truth << '\n' << paths.summary << '\n';
    } else if (ingest->parsed()) {
      print_counters("ingest", ingest_command(ingest_in, ingest_out, ingest_filter.build()));
    } else if (prep->parsed()) {
      print_counters("preprocess", preprocess_command(prep_in, prep_out, config.preprocess, prep_filter.build()));
    } else if (vocab->parsed()) {
      const auto v = build_vocab_command(vocab_in, vocab_out, vocab_floor.value_or(config.preprocess.rare_term_floor));
      std::fprintf(stderr, "build-vocab: %zu terms over %llu tokens\n", v.size(),
                   static_cast<unsigned long long>(v.total_tokens()));
    } else if (label->parsed()) {
      const auto s = label_command(label_in, label_truth, label_out, config.preprocess, label_filter.build());
      print_counters("label", s.counters);
      std::fprintf(stderr, "label: %zu malicious, %zu benign\n", s.malicious, s.benign);
    } else if (train->parsed()) {
      if (train_batches) config.model.max_batches = *train_batches;
      const auto r = train_command(train_in, train_vocab, config.model, train_out, train_history);
      if (!r.history.empty())
        std::fprintf(stderr, "train: %lld batches, final mean loss %.6g\n",
                     static_cast<long long>(r.batches_run), r.history.back().total);
    } else if (score->parsed()) {
      const ScoreMode mode = score_mode.empty() ? config.score_mode : parse_score_mode(score_mode);
      const auto s = score_command(score_in, score_ckpt, score_vocab, mode, score_out);
      std::fprintf(stderr, "score: %zu records\n", s.size());
    } else if (report->parsed()) {
      const auto r = report_command(report_test, report_train, report_out, config.report, report_ckpt, report_vocab);
      for (const auto& f : r.files) std::cout << f << '\n';
      const auto& row = r.thresholds.training_row();
      std::fprintf(stderr, "report: training threshold %.6g flags %zu records, precision %.4f%s\n",
                   row.threshold, row.predicted, row.precision, row.empty_prediction ? " (no predictions)" : "");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "logae: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
