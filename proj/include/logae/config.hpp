#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "logae/model.hpp"
#include "logae/preprocess.hpp"
#include "logae/synthgen.hpp"

namespace logae {

struct ReportConfig {
  double train_quantile_percent = 99.9;
  int temporal_bucket_minutes = 60;
  int histogram_bins = 50;
  bool histogram_normalize = true;

  void validate() const;
};

// Everything a run can be configured with. Flags override file values.
struct RunConfig {
  PreprocConfig preprocess;
  ModelConfig model;
  ScenarioConfig scenario;
  ReportConfig report;
  ScoreMode score_mode = ScoreMode::kCrossEntropy;

  void set_seed(std::uint64_t seed);
  void validate() const;
};

// Flat "key = value" lines; '#' starts a comment. Unknown keys and repeated
// keys are errors. attack_windows takes "start_ms-end_ms" pairs separated by
// ';' (both ends inclusive).
RunConfig parse_run_config(std::string_view text, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});

// The same format, listing every key with its current value.
std::string format_run_config(const RunConfig& config);

}  // namespace logae
