#include <set>

#include "doctest.h"
#include "logae/ingest.hpp"
#include "logae/labeler.hpp"
#include "logae/synthgen.hpp"
#include "test_util.hpp"

using namespace logae;

namespace {

ScenarioConfig small(std::uint64_t seed = 7) {
  ScenarioConfig c;
  c.train_records = 6000;
  c.test_records = 5000;
  c.attack_fraction = 0.02;
  c.seed = seed;
  return c;
}

std::vector<RawEvent> parse_all(const std::vector<std::string>& lines) {
  std::vector<RawEvent> out;
  for (const auto& l : lines) {
    auto p = parse_event(l);
    REQUIRE_MESSAGE(p.event, p.skip_reason);
    out.push_back(std::move(*p.event));
  }
  return out;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  const auto a = generate_corpus(small());
  const auto b = generate_corpus(small());
  CHECK(a.train_lines == b.train_lines);
  CHECK(a.test_lines == b.test_lines);
  CHECK(a.truth.to_csv() == b.truth.to_csv());
  const auto c = generate_corpus(small(8));
  CHECK(a.test_lines != c.test_lines);
}

TEST_CASE("record counts, ordering and malicious budget") {
  const auto cfg = small();
  const auto corpus = generate_corpus(cfg);
  CHECK(corpus.train_lines.size() == cfg.train_records);
  CHECK(corpus.test_lines.size() == cfg.test_records);
  CHECK(corpus.malicious_count() ==
        static_cast<std::size_t>(std::llround(cfg.attack_fraction * static_cast<double>(cfg.test_records))));

  const auto train = parse_all(corpus.train_lines);
  const auto test = parse_all(corpus.test_lines);
  for (std::size_t i = 1; i < test.size(); ++i) CHECK(test[i - 1].timestamp <= test[i].timestamp);
  for (const auto& e : train) {
    CHECK(e.timestamp >= cfg.start_ms);
    CHECK(e.timestamp < cfg.test_start_ms());
  }
  const auto windows = cfg.effective_windows();
  REQUIRE(windows.size() == 3);
  for (std::size_t i = 0; i < test.size(); ++i) {
    CHECK(test[i].timestamp >= cfg.test_start_ms());
    CHECK(test[i].timestamp < cfg.test_end_ms());
    if (corpus.test_malicious[i]) {
      CHECK(test[i].hostname == cfg.host_name(0));
      bool inside = false;
      for (const auto& w : windows) inside |= w.start_ms <= test[i].timestamp && test[i].timestamp <= w.end_ms;
      CHECK(inside);
    }
  }
  std::set<std::string> hosts;
  for (const auto& e : test) hosts.insert(e.hostname);
  CHECK(hosts.size() == 2);
}

TEST_CASE("labeler recovers the generator's bookkeeping exactly") {
  for (std::uint64_t seed : {7u, 11u, 12u}) {
    CAPTURE(seed);
    auto cfg = small(seed);
    cfg.hosts = 3;
    cfg.attacked_hosts = 2;
    const auto corpus = generate_corpus(cfg);
    // Round-trip the truth through its file format as the CLI would.
    const auto truth = GroundTruth::parse_csv(corpus.truth.to_csv());
    std::vector<RawEvent> all = parse_all(corpus.train_lines);
    const auto test = parse_all(corpus.test_lines);
    all.insert(all.end(), test.begin(), test.end());
    const auto forest = ProcessForest::build(all);
    const auto labels = label_events(test, forest, truth);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < test.size(); ++i)
      mismatches += (labels[i] == Label::kMalicious) != static_cast<bool>(corpus.test_malicious[i]);
    CHECK(mismatches == 0);
    // Both channels are exercised.
    CHECK_FALSE(truth.seeds.empty());
    CHECK_FALSE(truth.net_rules.empty());
  }
}

TEST_CASE("zero attack intensity yields a fully benign test set") {
  auto cfg = small();
  cfg.attack_fraction = 0.0;
  const auto corpus = generate_corpus(cfg);
  CHECK(corpus.malicious_count() == 0);
  CHECK(corpus.truth.seeds.empty());
  CHECK(corpus.truth.net_rules.empty());
  CHECK(corpus.test_lines.size() == cfg.test_records);
}

TEST_CASE("benign traffic draws from a shared library vocabulary") {
  const auto corpus = generate_corpus(small());
  std::size_t dll = 0;
  for (const auto& l : corpus.train_lines) dll += l.find("vcruntime140.dll") != std::string::npos;
  CHECK(dll > 10);
}

TEST_CASE("invalid scenarios are rejected") {
  auto bad = small();
  bad.hosts = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = small();
  bad.attacked_hosts = 3;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = small();
  bad.attack_fraction = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = small();
  bad.windows = {{bad.test_start_ms() + 10, bad.test_start_ms()}};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = small();
  bad.windows = {{bad.start_ms, bad.start_ms + 1000}};  // inside training time
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("write_corpus produces readable files") {
  auto cfg = small();
  cfg.train_records = 500;
  cfg.test_records = 400;
  const auto corpus = generate_corpus(cfg);
  TempDir dir;
  for (bool gz : {false, true}) {
    const auto paths = write_corpus(corpus, dir.file(gz ? "gz" : "plain"), gz);
    CorpusStream s(paths.test);
    std::size_t n = 0;
    while (s.next()) ++n;
    CHECK(n == 400);
    CHECK(s.counters().skipped == 0);
    CHECK(GroundTruth::load(paths.truth).to_csv() == corpus.truth.to_csv());
  }
}
