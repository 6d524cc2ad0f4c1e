#include <cmath>

#include "doctest.h"
#include "logae/trainer.hpp"
#include "oracles.hpp"

using namespace logae;

namespace {

// Five fixed record shapes with disjoint field values, repeated.
struct PatternCorpus {
  Vocabulary vocab;
  std::vector<TokenizedRecord> records;
};

PatternCorpus five_patterns(int copies) {
  std::vector<TermRecord> terms;
  for (int p = 0; p < 5; ++p)
    for (int c = 0; c < copies; ++c) {
      TermRecord r;
      r.terms.fill("NULL_TERM");
      for (std::size_t f = 0; f < 6; ++f) r.terms[f * 4 + static_cast<std::size_t>(p % 4)] = "P" + std::to_string(p) + "F" + std::to_string(f);
      r.terms[26] = p < 3 ? "DUR_SMALL" : "DUR_LARGE";
      terms.push_back(r);
    }
  VocabularyBuilder b;
  for (const auto& r : terms) b.add(r.terms);
  PatternCorpus out{b.build(10), {}};
  for (const auto& r : terms) out.records.push_back(index(r, out.vocab));
  return out;
}

ModelConfig config_for(const Vocabulary& v, std::int64_t batches) {
  ModelConfig c;
  c.vocab_size = static_cast<int>(v.size());
  c.max_batches = batches;
  c.log_every = 500;
  return c;
}

}  // namespace

TEST_CASE("sampler: a single record is always drawn") {
  const std::vector<double> w = {0.3};
  BatchSampler s(w);
  Rng rng(1);
  for (auto i : s.sample(rng, 32)) CHECK(i == 0);
}

TEST_CASE("sampler: empirical frequencies follow the weights") {
  const std::vector<double> w = {1.0, 3.0};
  BatchSampler s(w);
  Rng rng(5);
  std::vector<std::size_t> counts(2, 0);
  for (int i = 0; i < 100000; ++i) ++counts[s.draw(rng)];
  const double ratio = static_cast<double>(counts[1]) / static_cast<double>(counts[0]);
  CHECK(std::abs(ratio - 3.0) / 3.0 < 0.05);
  CHECK(oracle::chi_square(counts, w) < 10.83);  // 1 dof, p = 0.001

  const std::vector<double> many = {0.5, 1, 2, 4, 0, 8, 0.25};
  BatchSampler s2(many);
  std::vector<std::size_t> c2(many.size(), 0);
  for (int i = 0; i < 100000; ++i) ++c2[s2.draw(rng)];
  CHECK(c2[4] == 0);
  std::vector<std::size_t> nz;
  std::vector<double> nzw;
  for (std::size_t i = 0; i < many.size(); ++i)
    if (many[i] > 0) {
      nz.push_back(c2[i]);
      nzw.push_back(many[i]);
    }
  CHECK(oracle::chi_square(nz, nzw) < 22.46);  // 5 dof, p = 0.001
  CHECK_THROWS_AS(BatchSampler(std::vector<double>{}), Error);
  CHECK_THROWS_AS(BatchSampler(std::vector<double>{0, 0}), Error);
  CHECK_THROWS_AS(BatchSampler(std::vector<double>{1, -1}), Error);
}

TEST_CASE("sampling weight follows the rarest term") {
  const auto pc = five_patterns(20);
  auto recs = pc.records;
  TokenizedRecord rare = recs[0];
  rare.token_ids[10] = Vocabulary::kObscureIndex;  // nothing folded: treated as count 1
  recs.push_back(rare);
  const auto s = record_sampling_weights(recs, pc.vocab);
  const double top = *std::max_element(s.begin(), s.end());
  CHECK(s.back() == top);
  CHECK(s.back() == doctest::Approx(std::log(static_cast<double>(pc.vocab.total_tokens()))));
  for (double x : s) CHECK(x > 0);
}

TEST_CASE("zero batches returns the initialization") {
  const auto pc = five_patterns(20);
  const auto cfg = config_for(pc.vocab, 0);
  const auto r = train(pc.records, pc.vocab, cfg);
  CHECK(r.params == initial_params(cfg));
  CHECK(r.history.empty());
  CHECK(r.batches_run == 0);
}

TEST_CASE("training on five patterns drives the loss down") {
  const auto pc = five_patterns(40);
  const auto cfg = config_for(pc.vocab, 5000);
  const auto r = train(pc.records, pc.vocab, cfg);
  REQUIRE_FALSE(r.aborted);
  REQUIRE(r.history.size() == 11);
  CHECK(r.history.front().batch_index == 0);
  CHECK(r.history.back().batch_index == 5000);
  CHECK(r.history.back().total < 0.2 * r.history.front().total);
  CHECK(cfg.alpha * r.history.back().recon < cfg.alpha * r.history.front().recon);
  for (const auto& row : r.history)
    CHECK(row.total == doctest::Approx(row.weighted_ce + cfg.alpha * row.recon).epsilon(1e-9));

  // Same seed, same trajectory.
  const auto again = train(pc.records, pc.vocab, cfg);
  CHECK(again.params == r.params);
  CHECK(loss_history_csv(again.history) == loss_history_csv(r.history));
}

TEST_CASE("partial final window is logged") {
  const auto pc = five_patterns(20);
  auto cfg = config_for(pc.vocab, 1200);
  const auto r = train(pc.records, pc.vocab, cfg);
  REQUIRE(r.history.size() == 4);
  CHECK(r.history[1].batch_index == 500);
  CHECK(r.history[3].batch_index == 1200);
  const auto csv = loss_history_csv(r.history);
  CHECK(csv.rfind("batch_index,weighted_ce,recon,total\n0,", 0) == 0);
}

TEST_CASE("parallel scoring equals one-by-one scoring") {
  const auto pc = five_patterns(30);
  const auto cfg = config_for(pc.vocab, 50);
  const auto r = train(pc.records, pc.vocab, cfg);
  const auto w = make_weights<double>(pc.vocab.loss_weights());
  for (auto mode : {ScoreMode::kCrossEntropy, ScoreMode::kFull}) {
    const auto scores = score_records(r.params, pc.records, pc.vocab, cfg.alpha, mode);
    REQUIRE(scores.size() == pc.records.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
      CHECK(scores[i] == score(r.params, std::span<const TermIndex>(pc.records[i].token_ids), w, cfg.alpha, mode));
  }
}

TEST_CASE("guards") {
  const auto pc = five_patterns(20);
  auto cfg = config_for(pc.vocab, 10);
  cfg.vocab_size += 1;
  CHECK_THROWS_AS(train(pc.records, pc.vocab, cfg), Error);
  cfg = config_for(pc.vocab, 10);
  CHECK_THROWS_AS(train(std::span<const TokenizedRecord>{}, pc.vocab, cfg), Error);
}
