#include <random>

#include "doctest.h"
#include "logae/labeler.hpp"
#include "oracles.hpp"

using namespace logae;

namespace {

RawEvent create(const std::string& host, std::int64_t t, std::int64_t pid, std::optional<std::int64_t> ppid) {
  RawEvent e;
  e.hostname = host;
  e.timestamp = t;
  e.object = "PROCESS";
  e.action = "CREATE";
  e.pid = pid;
  e.ppid = ppid;
  return e;
}

RawEvent act(const std::string& host, std::int64_t t, std::int64_t pid, const std::string& port = "") {
  RawEvent e;
  e.hostname = host;
  e.timestamp = t;
  e.object = "FILE";
  e.action = "READ";
  e.pid = pid;
  e[Field::kDestPort] = port;
  return e;
}

}  // namespace

TEST_CASE("linear chain ancestors") {
  std::vector<RawEvent> ev = {create("h", 1, 10, 1), create("h", 2, 20, 10), create("h", 3, 30, 20)};
  const auto forest = ProcessForest::build(ev);
  const auto c = forest.resolve("h", 30, 3);
  REQUIRE(c);
  const auto up = forest.ancestors(*c);
  REQUIRE(up.size() == 2);
  CHECK(forest.instances()[up[0]].pid == 20);
  CHECK(forest.instances()[up[1]].pid == 10);
}

TEST_CASE("pid reuse links to the latest earlier instance") {
  std::vector<RawEvent> ev = {create("h", 1, 100, std::nullopt), create("h", 50, 100, std::nullopt),
                              create("h", 60, 200, 100)};
  const auto forest = ProcessForest::build(ev);
  const auto child = forest.resolve("h", 200, 60);
  REQUIRE(child);
  const auto parent = forest.instances()[*child].parent;
  REQUIRE(parent);
  CHECK(forest.instances()[*parent].first_seen == 50);
  // brute force: max first_seen <= 60 among pid 100 creations
  std::int64_t best = -1;
  for (const auto& e : ev)
    if (e.pid == 100 && e.timestamp <= 60) best = std::max(best, e.timestamp);
  CHECK(best == 50);
  CHECK(forest.successor_start(*forest.resolve("h", 100, 10)) == 50);
}

TEST_CASE("orphans have no parent; duplicates are skipped") {
  std::vector<RawEvent> ev = {create("h", 5, 7, 999), create("h", 5, 7, 999)};
  const auto forest = ProcessForest::build(ev);
  CHECK(forest.instances().size() == 1);
  CHECK(forest.skipped_creations() == 1);
  CHECK_FALSE(forest.instances()[0].parent);
}

TEST_CASE("seed, grandchild and unrelated events") {
  std::vector<RawEvent> ev = {create("h", 100, 10, 1),  create("h", 110, 20, 10), create("h", 120, 30, 20),
                              create("h", 105, 99, 1),  act("h", 130, 10),        act("h", 140, 30),
                              act("h", 150, 99),        act("h", 500, 30),        act("other", 130, 10)};
  GroundTruth truth;
  truth.seeds.push_back({"h", 10, 100, 200});
  const auto forest = ProcessForest::build(ev);
  const auto labels = label_events(ev, forest, truth);
  CHECK(labels[4] == Label::kMalicious);  // seed itself
  CHECK(labels[5] == Label::kMalicious);  // grandchild
  CHECK(labels[6] == Label::kBenign);     // unrelated process
  CHECK(labels[7] == Label::kBenign);     // after the window
  CHECK(labels[8] == Label::kBenign);     // other host
  CHECK(labels[1] == Label::kMalicious);  // creation of a child counts as the child's event
}

TEST_CASE("seed that predates the capture") {
  // pid 10 is never created in the capture; its child root is.
  std::vector<RawEvent> ev = {act("h", 150, 10), create("h", 160, 20, 10), act("h", 170, 20), act("h", 90, 10)};
  GroundTruth truth;
  truth.seeds.push_back({"h", 10, 100, 200});
  const auto labels = label_events(ev, ProcessForest::build(ev), truth);
  CHECK(labels[0] == Label::kMalicious);
  CHECK(labels[2] == Label::kMalicious);
  CHECK(labels[3] == Label::kBenign);
}

TEST_CASE("net rules") {
  std::vector<RawEvent> ev = {act("h", 150, 5, "4444"), act("h", 150, 5, "443"), act("h", 250, 5, "4444")};
  ev[1][Field::kDestIp] = "10.99.1.7";
  GroundTruth truth;
  truth.net_rules.push_back({"h", std::nullopt, 4444, 100, 200});
  truth.net_rules.push_back({"h", "10.99.1.", std::nullopt, 100, 200});
  const auto labels = label_events(ev, ProcessForest::build(ev), truth);
  CHECK(labels == std::vector<Label>{Label::kMalicious, Label::kMalicious, Label::kBenign});
}

TEST_CASE("ground truth csv") {
  const std::string text =
      "# red team day 1\n"
      "host,pid,window_start,window_end,kind,match\n"
      "h,10,2019-09-23T10:00:00Z,2019-09-23T12:00:00Z,process,\n"
      "h,,100,200,net,port:4444\n"
      "h,,100,200,net,ip:10.99.\n";
  const auto t = GroundTruth::parse_csv(text);
  REQUIRE(t.seeds.size() == 1);
  CHECK(t.seeds[0].window_start == 1569232800000);
  REQUIRE(t.net_rules.size() == 2);
  CHECK(t.net_rules[0].port == 4444);
  CHECK(t.net_rules[1].ip_prefix == "10.99.");
  CHECK(GroundTruth::parse_csv(t.to_csv()).to_csv() == t.to_csv());
  CHECK_THROWS_AS(GroundTruth::parse_csv("h,10,1,2,process,\n"), Error);
  CHECK_THROWS_AS(GroundTruth::parse_csv("host,pid,window_start,window_end,kind,match\nh,10,5,2,process,\n"),
                  Error);
  CHECK_THROWS_AS(GroundTruth::parse_csv("host,pid,window_start,window_end,kind,match\nh,,1,2,net,dns:x\n"),
                  Error);
}

TEST_CASE("labeling equals graph reachability on random forests") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 200; ++round) {
    const std::vector<std::string> hosts = {"a", "b"};
    std::vector<RawEvent> ev;
    std::map<std::string, std::vector<std::pair<std::int64_t, std::int64_t>>> live;  // host -> (pid, created)
    std::int64_t t = 0;
    std::int64_t next_pid = 100;
    for (const auto& h : hosts) {
      ev.push_back(create(h, t++, next_pid, 4));  // root whose parent predates the capture
      live[h].push_back({next_pid++, t - 1});
    }
    const int steps = 20 + static_cast<int>(rng() % 60);
    for (int s = 0; s < steps; ++s) {
      t += 1 + static_cast<std::int64_t>(rng() % 5);
      const auto& h = hosts[rng() % hosts.size()];
      auto& procs = live[h];
      const auto parent = procs[rng() % procs.size()];
      if (rng() % 3 == 0) {
        ev.push_back(create(h, t, next_pid, parent.first));
        procs.push_back({next_pid++, t});
      } else {
        ev.push_back(act(h, t, parent.first, rng() % 9 == 0 ? "4444" : "443"));
      }
    }
    GroundTruth truth;
    for (int k = 0; k < 1 + static_cast<int>(rng() % 3); ++k) {
      const auto& h = hosts[rng() % hosts.size()];
      const auto pick = live[h][rng() % live[h].size()];
      const std::int64_t ws = static_cast<std::int64_t>(rng() % (t + 1));
      truth.seeds.push_back({h, pick.first, ws, ws + static_cast<std::int64_t>(rng() % (t + 1))});
    }
    if (rng() % 2) truth.net_rules.push_back({hosts[0], std::nullopt, 4444, t / 3, t});
    const auto got = label_events(ev, ProcessForest::build(ev), truth);
    const auto want = oracle::reachability_labels(ev, truth);
    REQUIRE(got == want);
  }
}

TEST_CASE("adding a seed never clears a malicious label") {
  std::vector<RawEvent> ev = {create("h", 1, 10, 1), create("h", 2, 20, 10), act("h", 3, 20), act("h", 4, 10)};
  GroundTruth one;
  one.seeds.push_back({"h", 20, 0, 10});
  GroundTruth two = one;
  two.seeds.push_back({"h", 10, 0, 10});
  const auto forest = ProcessForest::build(ev);
  const auto a = label_events(ev, forest, one);
  const auto b = label_events(ev, forest, two);
  for (std::size_t i = 0; i < ev.size(); ++i)
    if (a[i] == Label::kMalicious) CHECK(b[i] == Label::kMalicious);
}
