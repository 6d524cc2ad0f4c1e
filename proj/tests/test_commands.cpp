#include "doctest.h"
#include "logae/checkpoint.hpp"
#include "logae/commands.hpp"
#include "test_util.hpp"

using namespace logae;

namespace {

struct Pipeline {
  TempDir dir;
  SynthPaths synth;
  std::string train_terms, test_terms, vocab;

  Pipeline() {
    ScenarioConfig s;
    s.train_records = 3000;
    s.test_records = 2000;
    s.attack_fraction = 0.02;
    synth = synth_command(s, dir.file("synth"), true);
    train_terms = dir.file("train.terms");
    test_terms = dir.file("test.terms");
    vocab = dir.file("vocab.txt");
    label_command(synth.train, synth.truth, train_terms, {}, {});
    label_command(synth.test, synth.truth, test_terms, {}, {});
    build_vocab_command(train_terms, vocab, 10);
  }

  ModelConfig model(std::int64_t batches) const {
    ModelConfig m;
    m.embedding_dim = 4;
    m.hidden_dim = 8;
    m.max_batches = batches;
    m.log_every = 50;
    return m;
  }
};

}  // namespace

TEST_CASE("labeled stream carries the generator's malicious count") {
  Pipeline p;
  TempDir d;
  const auto s = label_command(p.synth.test, p.synth.truth, d.file("t"), {}, {});
  CHECK(s.malicious == 40);
  CHECK(s.benign == 1960);
  // Host filtering happens after the forest is built, so counts just split.
  CorpusFilter only;
  only.host = ScenarioConfig{}.host_name(0);
  const auto h = label_command(p.synth.test, p.synth.truth, d.file("h"), {}, only);
  CHECK(h.malicious == 40);
  CHECK(h.benign < 1960);
}

TEST_CASE("zero batches saves the initial parameters") {
  Pipeline p;
  auto m = p.model(0);
  const auto res = train_command(p.train_terms, p.vocab, m, p.dir.file("c0.ckpt"), p.dir.file("l0.csv"));
  CHECK(res.batches_run == 0);
  const auto ck = Checkpoint::load(p.dir.file("c0.ckpt"));
  m.vocab_size = static_cast<int>(Vocabulary::load(p.vocab).size());
  CHECK(ck.params == initial_params(m));
  CHECK(ck.vocab_checksum == Vocabulary::load(p.vocab).checksum());
}

TEST_CASE("reruns are byte-identical and inputs stay untouched") {
  Pipeline p;
  const std::string inputs_before = read_text(p.train_terms) + read_text(p.vocab) + read_text(p.test_terms);
  for (const char* tag : {"a", "b"}) {
    const std::string t(tag);
    train_command(p.train_terms, p.vocab, p.model(300), p.dir.file(t + ".ckpt"), p.dir.file(t + ".loss"));
    score_command(p.train_terms, p.dir.file(t + ".ckpt"), p.vocab, ScoreMode::kCrossEntropy,
                  p.dir.file(t + ".train.csv"));
    score_command(p.test_terms, p.dir.file(t + ".ckpt"), p.vocab, ScoreMode::kCrossEntropy,
                  p.dir.file(t + ".test.csv"));
    report_command(p.dir.file(t + ".test.csv"), p.dir.file(t + ".train.csv"), p.dir.file(t + "-report"),
                   {}, p.dir.file(t + ".ckpt"), p.vocab);
  }
  for (const char* f : {".ckpt", ".loss", ".train.csv", ".test.csv", "-report/thresholds.csv",
                        "-report/temporal.csv", "-report/histogram.csv", "-report/host_rates.csv",
                        "-report/embeddings.tsv"}) {
    CAPTURE(f);
    const auto a = read_text(p.dir.file(std::string("a") + f));
    CHECK_FALSE(a.empty());
    CHECK(a == read_text(p.dir.file(std::string("b") + f)));
  }
  CHECK(read_text(p.train_terms) + read_text(p.vocab) + read_text(p.test_terms) == inputs_before);

  // Different seed, different weights.
  auto other = p.model(300);
  other.seed = 99;
  train_command(p.train_terms, p.vocab, other, p.dir.file("c.ckpt"), p.dir.file("c.loss"));
  CHECK(read_text(p.dir.file("c.ckpt")) != read_text(p.dir.file("a.ckpt")));
}

TEST_CASE("scoring against a different vocabulary fails") {
  Pipeline p;
  train_command(p.train_terms, p.vocab, p.model(10), p.dir.file("m.ckpt"), p.dir.file("m.loss"));
  build_vocab_command(p.train_terms, p.dir.file("other.txt"), 3);
  CHECK_THROWS_AS(score_command(p.test_terms, p.dir.file("m.ckpt"), p.dir.file("other.txt"),
                                ScoreMode::kCrossEntropy, p.dir.file("s.csv")),
                  Error);
  CHECK_THROWS_AS(report_command(p.test_terms, p.train_terms, p.dir.file("r"), {}), Error);
}

TEST_CASE("scores file lines up with the term stream") {
  Pipeline p;
  train_command(p.train_terms, p.vocab, p.model(20), p.dir.file("m.ckpt"), p.dir.file("m.loss"));
  const auto scored = score_command(p.test_terms, p.dir.file("m.ckpt"), p.vocab, ScoreMode::kFull,
                                    p.dir.file("s.csv"));
  CHECK(scored.size() == 2000);
  CHECK(load_scores(p.dir.file("s.csv")) == scored);
  std::size_t mal = 0;
  for (const auto& r : scored) mal += r.label == Label::kMalicious;
  CHECK(mal == 40);
}
