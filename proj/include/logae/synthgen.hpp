#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logae/common.hpp"
#include "logae/labeler.hpp"

namespace logae {

struct AttackWindow {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;  // inclusive
};

// Desk-scale stand-in for a benign-week / red-team-days telemetry capture.
struct ScenarioConfig {
  std::size_t train_records = 200000;  // across all hosts
  std::size_t test_records = 100000;   // across all hosts, attack records included
  int hosts = 2;
  int attacked_hosts = 1;              // the first N hosts receive attack windows
  double attack_fraction = 0.004;      // malicious share of all test records
  double sweep_share = 0.15;           // malicious records caught by network rules
  std::int64_t start_ms = 1568678400000;  // 2019-09-17T00:00:00Z
  int train_days = 4;
  int test_days = 3;
  // Absolute windows; empty means three two-hour windows, one per test day.
  std::vector<AttackWindow> windows;
  std::uint64_t seed = 7;

  std::int64_t test_start_ms() const;
  std::int64_t test_end_ms() const;
  std::vector<AttackWindow> effective_windows() const;
  std::string host_name(int host) const;
  void validate() const;
};

struct HostSummary {
  std::string host;
  bool attacked = false;
  std::size_t train_records = 0;
  std::size_t test_records = 0;
  std::size_t test_malicious = 0;
};

struct SyntheticCorpus {
  std::vector<std::string> train_lines;  // NDJSON, benign only
  std::vector<std::string> test_lines;   // NDJSON
  std::vector<bool> test_malicious;      // generator bookkeeping, parallel to test_lines
  GroundTruth truth;
  std::vector<HostSummary> hosts;

  std::size_t malicious_count() const;
  std::string summary_text() const;
};

SyntheticCorpus generate_corpus(const ScenarioConfig& config);

struct SynthPaths {
  std::string train;
  std::string test;
  std::string truth;
  std::string summary;
};

// Writes train/test NDJSON (gzip-compressed when gzip is set), truth.csv and
// summary.txt into out_dir.
SynthPaths write_corpus(const SyntheticCorpus& corpus, const std::string& out_dir, bool gzip = false);

}  // namespace logae
