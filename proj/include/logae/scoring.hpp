#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logae/common.hpp"
#include "logae/model.hpp"
#include "logae/vocab.hpp"

namespace logae {

struct ScoredRecord {
  double score = 0;
  std::int64_t timestamp = 0;
  std::string hostname;
  Label label = Label::kUnlabeled;

  bool operator==(const ScoredRecord&) const = default;
};

// Scores CSV: "timestamp,host,label,score".
std::string scores_csv(std::span<const ScoredRecord> records);
std::vector<ScoredRecord> parse_scores_csv(std::string_view text);
std::vector<ScoredRecord> load_scores(const std::string& path);

// Nearest-rank quantile: element ceil(q * N) (1-based) of the sorted values.
double quantile(std::span<const double> values, double q);

// Ties at the threshold count as anomalous.
inline bool is_anomalous(double score, double threshold) { return score >= threshold; }

struct ThresholdRow {
  double q_percent = 0;
  bool from_training = false;  // threshold taken from the training distribution
  double threshold = 0;
  std::size_t predicted = 0;
  std::size_t true_positives = 0;
  double precision = 1.0;          // 1.0 by convention when nothing is predicted
  bool empty_prediction = false;   // set when that convention applied
  std::optional<double> recall;    // absent when there are no malicious records
};

struct ThresholdReport {
  std::vector<ThresholdRow> rows;  // test-quantile rows, then the training row
  std::size_t malicious_total = 0;

  const ThresholdRow& training_row() const;
  std::string to_csv() const;
};

// 95.0, 95.1, ..., 100.0
std::vector<double> default_quantile_grid();

// One row per grid percentile using the test score distribution, plus one
// row at the training distribution's train_q_percent.
ThresholdReport threshold_report(std::span<const ScoredRecord> test,
                                 std::span<const double> train_scores,
                                 std::span<const double> q_grid_percent,
                                 double train_q_percent = 99.9);

struct TemporalBucket {
  std::int64_t bucket_start = 0;
  std::size_t records = 0;
  std::size_t over_threshold = 0;
  double frac_over = 0;
  std::size_t malicious = 0;
};

struct TemporalSeries {
  std::int64_t bucket_ms = 0;
  double threshold = 0;
  double baseline = 0.001;  // expected over-threshold share at a 99.9th percentile cut
  std::vector<TemporalBucket> buckets;

  std::string to_csv() const;
};

// Buckets aligned to floor(timestamp / bucket). Buckets with no records
// between the first and last occupied one are emitted with zero counts.
TemporalSeries temporal_series(std::span<const ScoredRecord> test, double threshold,
                               int bucket_minutes = 60);

struct Histogram {
  double bin_width = 0;
  bool normalized = false;
  // Indexed by Label; each vector has one entry per bin.
  std::array<std::vector<double>, 3> mass;

  std::string to_csv() const;
};

// Equal-width bins over [0, max score].
Histogram histogram(std::span<const ScoredRecord> scored, int bins, bool normalize_per_class);

struct HostRate {
  std::string host;
  std::size_t records = 0;
  std::size_t over_threshold = 0;
  double rate = 0;
};

// Over-threshold share per host, hosts in lexicographic order.
std::vector<HostRate> host_rates(std::span<const ScoredRecord> scored, double threshold);
std::string host_rates_csv(std::span<const HostRate> rates);

// Mean score per class; nullopt when the class is absent.
std::optional<double> class_mean(std::span<const ScoredRecord> scored, Label label);

// "index\tterm\tcount\tv_1\t...\tv_d" per vocabulary term.
void export_embeddings(const ModelParams<double>& params, const Vocabulary& vocab,
                       const std::string& path);
std::string embeddings_text(const ModelParams<double>& params, const Vocabulary& vocab);

struct EmbeddingTable {
  std::vector<std::string> terms;
  std::vector<std::uint64_t> counts;
  Eigen::MatrixXd vectors;
};
EmbeddingTable parse_embeddings(std::string_view text);

}  // namespace logae
