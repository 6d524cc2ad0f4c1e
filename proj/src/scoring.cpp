#include "logae/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace logae {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string g10(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::string scores_csv(std::span<const ScoredRecord> records) {
  std::string out = "timestamp,host,label,score\n";
  for (const auto& r : records) {
    out += std::to_string(r.timestamp);
    out += ',';
    out += r.hostname;
    out += ',';
    out += to_string(r.label);
    out += ',';
    out += g17(r.score);
    out += '\n';
  }
  return out;
}

std::vector<ScoredRecord> parse_scores_csv(std::string_view text) {
  std::vector<ScoredRecord> out;
  auto lines = split(text, '\n');
  if (lines.empty() || lines[0] != "timestamp,host,label,score")
    throw Error("scores: missing header 'timestamp,host,label,score'");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cols = split(lines[i], ',');
    const auto ts = cols.size() == 4 ? parse_int(cols[0]) : std::nullopt;
    const auto sc = cols.size() == 4 ? parse_double(cols[3]) : std::nullopt;
    if (!ts || !sc || !std::isfinite(*sc))
      throw Error("scores: malformed line " + std::to_string(i + 1));
    out.push_back({*sc, *ts, std::string(cols[1]), parse_label(cols[2])});
  }
  return out;
}

std::vector<ScoredRecord> load_scores(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scores_csv(ss.str());
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw Error("quantile: empty input");
  if (!(q > 0 && q <= 1)) throw Error("quantile: q must lie in (0, 1]");
  const auto n = values.size();
  // Rank from the exact product; the epsilon absorbs q*N landing a hair above
  // an integer (0.999 * 1000 = 999.0000000000001).
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::vector<double> sorted(values.begin(), values.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
  return sorted[rank - 1];
}

const ThresholdRow& ThresholdReport::training_row() const {
  for (const auto& row : rows)
    if (row.from_training) return row;
  throw Error("threshold report has no training row");
}

std::string ThresholdReport::to_csv() const {
  std::string out = "q,source,threshold,predicted,true_positives,precision,recall,empty_prediction\n";
  char q[16];
  for (const auto& r : rows) {
    std::snprintf(q, sizeof q, "%.1f", r.q_percent);
    out += q;
    out += r.from_training ? ",train," : ",test,";
    out += g17(r.threshold) + ',' + std::to_string(r.predicted) + ',' +
           std::to_string(r.true_positives) + ',' + g10(r.precision) + ',' +
           (r.recall ? g10(*r.recall) : std::string("NA")) + ',' + (r.empty_prediction ? "1" : "0") +
           '\n';
  }
  return out;
}

std::vector<double> default_quantile_grid() {
  std::vector<double> grid;
  for (int k = 950; k <= 1000; ++k) grid.push_back(k / 10.0);
  return grid;
}

ThresholdReport threshold_report(std::span<const ScoredRecord> test,
                                 std::span<const double> train_scores,
                                 std::span<const double> q_grid_percent, double train_q_percent) {
  ThresholdReport report;
  for (const auto& r : test) report.malicious_total += r.label == Label::kMalicious;

  auto row_at = [&](double q, double threshold, bool from_training) {
    ThresholdRow row;
    row.q_percent = q;
    row.from_training = from_training;
    row.threshold = threshold;
    for (const auto& r : test) {
      if (!is_anomalous(r.score, threshold)) continue;
      ++row.predicted;
      row.true_positives += r.label == Label::kMalicious;
    }
    if (row.predicted == 0) {
      row.precision = 1.0;
      row.empty_prediction = true;
    } else {
      row.precision = static_cast<double>(row.true_positives) / static_cast<double>(row.predicted);
    }
    if (report.malicious_total > 0)
      row.recall = static_cast<double>(row.true_positives) / static_cast<double>(report.malicious_total);
    return row;
  };

  if (!test.empty()) {
    std::vector<double> test_scores;
    test_scores.reserve(test.size());
    for (const auto& r : test) test_scores.push_back(r.score);
    std::sort(test_scores.begin(), test_scores.end());
    for (double q : q_grid_percent) {
      // Sorted input makes each nearest-rank lookup O(1) instead of re-sorting.
      const auto n = test_scores.size();
      auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(n) - 1e-9));
      rank = std::clamp<std::size_t>(rank, 1, n);
      report.rows.push_back(row_at(q, test_scores[rank - 1], false));
    }
  }
  report.rows.push_back(row_at(train_q_percent, quantile(train_scores, train_q_percent / 100.0), true));
  return report;
}

std::string TemporalSeries::to_csv() const {
  std::string out = "# bucket_ms=" + std::to_string(bucket_ms) + " threshold=" + g17(threshold) +
                    " baseline=" + g10(baseline) + "\n";
  out += "bucket_start,records,over_threshold,frac_over,malicious\n";
  for (const auto& b : buckets)
    out += std::to_string(b.bucket_start) + ',' + std::to_string(b.records) + ',' +
           std::to_string(b.over_threshold) + ',' + g10(b.frac_over) + ',' +
           std::to_string(b.malicious) + '\n';
  return out;
}

TemporalSeries temporal_series(std::span<const ScoredRecord> test, double threshold,
                               int bucket_minutes) {
  if (bucket_minutes <= 0) throw Error("temporal_series: bucket_minutes must be > 0");
  TemporalSeries series;
  series.bucket_ms = static_cast<std::int64_t>(bucket_minutes) * 60000;
  series.threshold = threshold;
  if (test.empty()) return series;

  std::int64_t lo = floor_div(test[0].timestamp, series.bucket_ms);
  std::int64_t hi = lo;
  for (const auto& r : test) {
    const auto b = floor_div(r.timestamp, series.bucket_ms);
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  series.buckets.resize(static_cast<std::size_t>(hi - lo + 1));
  for (std::size_t i = 0; i < series.buckets.size(); ++i)
    series.buckets[i].bucket_start = (lo + static_cast<std::int64_t>(i)) * series.bucket_ms;
  for (const auto& r : test) {
    auto& b = series.buckets[static_cast<std::size_t>(floor_div(r.timestamp, series.bucket_ms) - lo)];
    ++b.records;
    b.over_threshold += is_anomalous(r.score, threshold);
    b.malicious += r.label == Label::kMalicious;
  }
  for (auto& b : series.buckets)
    b.frac_over = b.records == 0 ? 0.0 : static_cast<double>(b.over_threshold) / b.records;
  return series;
}

std::string Histogram::to_csv() const {
  std::string out = "bin,bin_start,bin_end,benign,malicious,unlabeled\n";
  const std::size_t bins = mass[0].size();
  for (std::size_t i = 0; i < bins; ++i) {
    out += std::to_string(i) + ',' + g10(bin_width * i) + ',' + g10(bin_width * (i + 1));
    for (Label l : {Label::kBenign, Label::kMalicious, Label::kUnlabeled})
      out += ',' + g10(mass[static_cast<std::size_t>(l)][i]);
    out += '\n';
  }
  return out;
}

Histogram histogram(std::span<const ScoredRecord> scored, int bins, bool normalize_per_class) {
  if (bins <= 0) throw Error("histogram: bins must be > 0");
  Histogram h;
  h.normalized = normalize_per_class;
  for (auto& m : h.mass) m.assign(static_cast<std::size_t>(bins), 0.0);
  double top = 0;
  for (const auto& r : scored) top = std::max(top, r.score);
  h.bin_width = top / bins;
  std::array<double, 3> totals{};
  for (const auto& r : scored) {
    std::size_t bin = 0;
    if (h.bin_width > 0)
      bin = std::min(static_cast<std::size_t>(r.score / h.bin_width), static_cast<std::size_t>(bins - 1));
    const auto cls = static_cast<std::size_t>(r.label);
    h.mass[cls][bin] += 1.0;
    totals[cls] += 1.0;
  }
  if (normalize_per_class)
    for (std::size_t c = 0; c < 3; ++c)
      if (totals[c] > 0)
        for (double& m : h.mass[c]) m /= totals[c];
  return h;
}

std::vector<HostRate> host_rates(std::span<const ScoredRecord> scored, double threshold) {
  std::map<std::string, HostRate> by_host;
  for (const auto& r : scored) {
    auto& h = by_host[r.hostname];
    h.host = r.hostname;
    ++h.records;
    if (is_anomalous(r.score, threshold)) ++h.over_threshold;
  }
  std::vector<HostRate> out;
  for (auto& [_, h] : by_host) {
    h.rate = static_cast<double>(h.over_threshold) / static_cast<double>(h.records);
    out.push_back(h);
  }
  return out;
}

std::string host_rates_csv(std::span<const HostRate> rates) {
  std::string out = "host,records,over_threshold,rate\n";
  for (const auto& h : rates)
    out += h.host + "," + std::to_string(h.records) + "," + std::to_string(h.over_threshold) + "," +
           g10(h.rate) + "\n";
  return out;
}

std::optional<double> class_mean(std::span<const ScoredRecord> scored, Label label) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& r : scored)
    if (r.label == label) {
      sum += r.score;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::string embeddings_text(const ModelParams<double>& params, const Vocabulary& vocab) {
  if (static_cast<std::size_t>(params.vocab_size()) != vocab.size())
    throw Error("export_embeddings: parameters do not match vocabulary size");
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto idx = static_cast<TermIndex>(i);
    out += std::to_string(i) + '\t' + vocab.term(idx) + '\t' + std::to_string(vocab.count(idx));
    for (Eigen::Index j = 0; j < params.embedding.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "\t%.9g", params.embedding(idx, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void export_embeddings(const ModelParams<double>& params, const Vocabulary& vocab,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << embeddings_text(params, vocab);
  if (!out) throw Error("write failed for " + path);
}

EmbeddingTable parse_embeddings(std::string_view text) {
  EmbeddingTable table;
  std::vector<std::vector<double>> rows;
  for (auto line : split(text, '\n')) {
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() < 4) throw Error("embeddings: malformed line");
    const auto idx = parse_int(cols[0]);
    const auto cnt = parse_int(cols[2]);
    if (!idx || static_cast<std::size_t>(*idx) != rows.size() || !cnt)
      throw Error("embeddings: bad index/count column");
    table.terms.emplace_back(cols[1]);
    table.counts.push_back(static_cast<std::uint64_t>(*cnt));
    std::vector<double> v;
    for (std::size_t j = 3; j < cols.size(); ++j) {
      const auto x = parse_double(cols[j]);
      if (!x) throw Error("embeddings: bad vector component");
      v.push_back(*x);
    }
    if (!rows.empty() && v.size() != rows[0].size()) throw Error("embeddings: ragged rows");
    rows.push_back(std::move(v));
  }
  const auto d = rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size());
  table.vectors.resize(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (Eigen::Index j = 0; j < d; ++j) table.vectors(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  return table;
}

}  // namespace logae
