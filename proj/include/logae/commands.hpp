#pragma once

// One function per CLI subcommand. Each reads only its inputs and writes only
// its outputs, so repeated runs with the same inputs and seed are identical.

#include <optional>
#include <string>
#include <vector>

#include "logae/config.hpp"
#include "logae/ingest.hpp"
#include "logae/scoring.hpp"
#include "logae/trainer.hpp"

namespace logae {

SynthPaths synth_command(const ScenarioConfig& scenario, const std::string& out_dir, bool gzip);

// Raw telemetry -> canonical NDJSON.
CorpusCounters ingest_command(const std::string& input, const std::string& out,
                              const CorpusFilter& filter);

// Raw or canonical NDJSON -> unlabeled term stream.
CorpusCounters preprocess_command(const std::string& input, const std::string& out,
                                  const PreprocConfig& config, const CorpusFilter& filter);

struct LabelSummary {
  CorpusCounters counters;
  std::size_t malicious = 0;
  std::size_t benign = 0;
};

// NDJSON + ground truth -> labeled term stream. The process forest is built
// from every event in the input, before the filter is applied.
LabelSummary label_command(const std::string& input, const std::string& truth_path,
                           const std::string& out, const PreprocConfig& config,
                           const CorpusFilter& filter);

Vocabulary build_vocab_command(const std::string& term_stream, const std::string& out,
                               std::uint64_t rare_floor);

std::vector<TokenizedRecord> load_tokenized(const std::string& term_stream, const Vocabulary& vocab);

// Trains on a term stream; vocab_size is taken from the vocabulary.
TrainResult train_command(const std::string& term_stream, const std::string& vocab_path,
                          ModelConfig config, const std::string& checkpoint_out,
                          const std::string& loss_history_out);

// Fails when the checkpoint was trained against a different vocabulary.
std::vector<ScoredRecord> score_command(const std::string& term_stream,
                                        const std::string& checkpoint_path,
                                        const std::string& vocab_path, ScoreMode mode,
                                        const std::string& out);

struct ReportOutputs {
  ThresholdReport thresholds;
  TemporalSeries temporal;
  Histogram histogram;
  std::vector<HostRate> hosts;  // at the training-quantile threshold
  std::vector<std::string> files;
};

ReportOutputs report_command(const std::string& test_scores, const std::string& train_scores,
                             const std::string& out_dir, const ReportConfig& config,
                             const std::optional<std::string>& checkpoint_path = std::nullopt,
                             const std::optional<std::string>& vocab_path = std::nullopt);

}  // namespace logae
