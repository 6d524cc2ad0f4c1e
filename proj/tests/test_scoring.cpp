#include <random>

#include "doctest.h"
#include "logae/scoring.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace logae;

namespace {

std::vector<ScoredRecord> random_scored(std::mt19937_64& rng, std::size_t n) {
  std::vector<ScoredRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    // Coarse scores so ties are common.
    const double s = static_cast<double>(rng() % 40) / 4.0;
    const Label l = rng() % 5 == 0 ? Label::kMalicious : Label::kBenign;
    out.push_back({s, static_cast<std::int64_t>(rng() % 10'000'000), rng() % 2 ? "h1" : "h2", l});
  }
  return out;
}

}  // namespace

TEST_CASE("nearest-rank quantile examples") {
  std::vector<double> v;
  for (int i = 1; i <= 10; ++i) v.push_back(i);
  CHECK(quantile(v, 0.5) == 5);
  CHECK(quantile(v, 1.0) == 10);
  CHECK(quantile(v, 0.01) == 1);
  std::vector<double> k;
  for (int i = 1000; i >= 1; --i) k.push_back(i);
  CHECK(quantile(k, 0.999) == 999);
  std::vector<double> same(17, 3.25);
  for (double q : {0.1, 0.5, 0.999, 1.0}) CHECK(quantile(same, q) == 3.25);
  CHECK_THROWS_AS(quantile(std::vector<double>{}, 0.5), Error);
  CHECK_THROWS_AS(quantile(v, 0.0), Error);
}

TEST_CASE("quantile agrees with the counting oracle") {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 300; ++round) {
    std::vector<double> v(1 + rng() % 200);
    for (auto& x : v) x = static_cast<double>(rng() % 50) - 10.0;
    const double q = static_cast<double>(1 + rng() % 1000) / 1000.0;
    CAPTURE(q);
    CHECK(quantile(v, q) == oracle::quantile_by_counting(v, q));
  }
}

TEST_CASE("small precision/recall example") {
  const std::vector<ScoredRecord> t = {{0.9, 0, "h", Label::kMalicious},
                                       {0.8, 0, "h", Label::kMalicious},
                                       {0.7, 0, "h", Label::kBenign},
                                       {0.1, 0, "h", Label::kBenign}};
  const std::vector<double> train = {0.1, 0.2, 5.0};
  const std::vector<double> grid = {50.0};
  const auto r = threshold_report(t, train, grid, 100.0);
  REQUIRE(r.rows.size() == 2);
  // Top half by nearest rank: threshold = 2nd smallest = 0.7 flags three.
  // The top-50% cut in the worked example means the two largest scores.
  const auto top_half = threshold_report(t, train, std::vector<double>{75.0}, 100.0);
  CHECK(top_half.rows[0].threshold == 0.8);
  CHECK(top_half.rows[0].precision == 1.0);
  CHECK(top_half.rows[0].recall == 1.0);
  // Training row above every test score: nothing predicted.
  const auto& tr = r.training_row();
  CHECK(tr.threshold == 5.0);
  CHECK(tr.predicted == 0);
  CHECK(tr.precision == 1.0);
  CHECK(tr.empty_prediction);
}

TEST_CASE("report rows equal the brute-force confusion matrix, and are monotone") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 50; ++round) {
    const auto t = random_scored(rng, 50 + rng() % 300);
    std::vector<double> train(100);
    for (auto& x : train) x = static_cast<double>(rng() % 40) / 4.0;
    const auto grid = default_quantile_grid();
    const auto rep = threshold_report(t, train, grid);
    REQUIRE(rep.rows.size() == grid.size() + 1);
    std::size_t mal = 0;
    for (const auto& r : t) mal += r.label == Label::kMalicious;
    const ThresholdRow* prev = nullptr;
    for (const auto& row : rep.rows) {
      const auto c = oracle::confusion(t, row.threshold);
      CHECK(row.predicted == c.tp + c.fp);
      CHECK(row.true_positives == c.tp);
      if (c.tp + c.fp > 0) CHECK(row.precision == static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp));
      if (mal > 0) {
        REQUIRE(row.recall);
        CHECK(*row.recall == static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn));
      } else {
        CHECK_FALSE(row.recall);
      }
      if (prev && !row.from_training) {
        CHECK(row.threshold >= prev->threshold);
        CHECK(row.predicted <= prev->predicted);
        if (row.recall) CHECK(*row.recall <= *prev->recall);
      }
      prev = &row;
    }
  }
}

TEST_CASE("temporal series") {
  const std::int64_t H = 3'600'000;
  const std::vector<ScoredRecord> t = {{5, 0, "h", Label::kBenign},
                                       {5, H - 1, "h", Label::kMalicious},
                                       {1, 3 * H, "h", Label::kBenign},
                                       {9, -1, "h", Label::kBenign}};
  const auto s = temporal_series(t, 5.0, 60);
  REQUIRE(s.buckets.size() == 5);  // [-1h, 0h, 1h, 2h, 3h]
  CHECK(s.buckets[0].bucket_start == -H);
  CHECK(s.buckets[0].frac_over == 1.0);
  CHECK(s.buckets[1].records == 2);
  CHECK(s.buckets[1].frac_over == 1.0);  // ties count
  CHECK(s.buckets[1].malicious == 1);
  CHECK(s.buckets[2].records == 0);
  CHECK(s.buckets[4].frac_over == 0.0);
  std::size_t total = 0;
  for (const auto& b : s.buckets) total += b.records;
  CHECK(total == t.size());
  CHECK(s.baseline == 0.001);

  std::mt19937_64 rng(2);
  const auto big = random_scored(rng, 5000);
  const auto s2 = temporal_series(big, 4.0, 17);
  total = 0;
  for (const auto& b : s2.buckets) total += b.records;
  CHECK(total == big.size());
}

TEST_CASE("histogram") {
  const std::vector<ScoredRecord> one = {{2.5, 0, "h", Label::kBenign}};
  const auto h = histogram(one, 4, true);
  double sum = 0;
  for (double m : h.mass[static_cast<std::size_t>(Label::kBenign)]) sum += m;
  CHECK(sum == 1.0);
  CHECK(h.mass[static_cast<std::size_t>(Label::kBenign)][3] == 1.0);

  std::mt19937_64 rng(4);
  const auto many = random_scored(rng, 1000);
  const auto hn = histogram(many, 13, true);
  for (Label l : {Label::kBenign, Label::kMalicious}) {
    double s = 0;
    for (double m : hn.mass[static_cast<std::size_t>(l)]) s += m;
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
  const auto raw = histogram(many, 13, false);
  double count = 0;
  for (const auto& cls : raw.mass)
    for (double m : cls) count += m;
  CHECK(count == 1000.0);
  CHECK_THROWS_AS(histogram(many, 0, true), Error);
}

TEST_CASE("class means and host rates") {
  const std::vector<ScoredRecord> t = {{1, 0, "b", Label::kBenign}, {3, 0, "a", Label::kBenign},
                                       {10, 0, "a", Label::kMalicious}};
  CHECK(class_mean(t, Label::kBenign) == 2.0);
  CHECK(class_mean(t, Label::kMalicious) == 10.0);
  CHECK_FALSE(class_mean(t, Label::kUnlabeled));
  const auto rates = host_rates(t, 3.0);
  REQUIRE(rates.size() == 2);
  CHECK(rates[0].host == "a");
  CHECK(rates[0].rate == 1.0);
  CHECK(rates[1].rate == 0.0);
}

TEST_CASE("scores csv round trip") {
  std::mt19937_64 rng(6);
  auto t = random_scored(rng, 100);
  t[3].score = 0.1 + 0.2;
  t[4].label = Label::kUnlabeled;
  CHECK(parse_scores_csv(scores_csv(t)) == t);
  CHECK_THROWS_AS(parse_scores_csv("a,b\n"), Error);
  CHECK_THROWS_AS(parse_scores_csv("timestamp,host,label,score\n1,h,benign,nan\n"), Error);
}

TEST_CASE("embedding export round trip") {
  ModelConfig c;
  c.vocab_size = 4;
  Rng rng(3);
  const auto p = ModelParams<double>::initialize(c, rng);
  const Vocabulary v({"NULL_TERM", "OBSCURE_TERM", "x.dll", "DEST_PORT_443"}, {5, 0, 12, 30}, 10);
  TempDir dir;
  export_embeddings(p, v, dir.file("e.tsv"));
  const auto text = read_text(dir.file("e.tsv"));
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  const auto table = parse_embeddings(text);
  REQUIRE(table.terms.size() == 4);
  CHECK(table.terms[3] == "DEST_PORT_443");
  CHECK(table.counts[2] == 12);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < p.embedding.cols(); ++j)
      CHECK(table.vectors(i, j) == doctest::Approx(p.embedding(i, j)).epsilon(1e-8));
}
