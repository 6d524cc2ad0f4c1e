#include <cstdio>
#include <filesystem>
#include <fstream>
#include <zlib.h>

#include "doctest.h"
#include "logae/ingest.hpp"
#include "test_util.hpp"

using namespace logae;

TEST_CASE("field table follows the canonical 27-key order") {
  CHECK(kFieldCount == 27);
  CHECK(field_name(Field::kAction) == "action");
  CHECK(field_name(Field::kDuration) == "duration");
  CHECK(slot(Field::kDuration) == 26);
  for (std::size_t i = 0; i < kFieldCount; ++i) {
    auto f = field_from_name(kFieldNames[i]);
    REQUIRE(f);
    CHECK(slot(*f) == i);
  }
  CHECK_FALSE(field_from_name("src_port"));
}

TEST_CASE("timestamps") {
  CHECK(parse_timestamp("1569248100000") == 1569248100000);
  CHECK(parse_timestamp("2019-09-23T14:15:00Z") == 1569248100000);
  CHECK(parse_timestamp("2019-09-23T10:15:00.250-04:00") == 1569248100250);
  CHECK(parse_timestamp("2019-09-23T16:15:00.5+02:00") == 1569248100500);
  CHECK_FALSE(parse_timestamp("2019-13-23T10:15:00Z"));
  CHECK_FALSE(parse_timestamp("yesterday"));
  CHECK_FALSE(parse_timestamp("2019-09-23T10:15:00+0400"));
  CHECK(format_timestamp(1569248100250) == "2019-09-23T14:15:00.250Z");
  CHECK(parse_timestamp(format_timestamp(-1)) == -1);
}

TEST_CASE("flow duration comes from start and end times") {
  auto out = parse_event(
      R"({"timestamp":5,"hostname":"h","object":"FLOW","start_time":1000,"end_time":1500})");
  REQUIRE(out.event);
  CHECK((*out.event)[Field::kDuration] == "500");

  out = parse_event(R"({"timestamp":5,"start_time":"1970-01-01T00:00:02Z","end_time":1000})");
  REQUIRE(out.event);
  CHECK((*out.event)[Field::kDuration].empty());  // end before start

  out = parse_event(R"({"timestamp":5,"duration":"-3"})");
  REQUIRE(out.event);
  CHECK((*out.event)[Field::kDuration].empty());
}

TEST_CASE("keys outside the 27 are dropped") {
  auto out = parse_event(R"({"timestamp":7,"hostname":"h","unrelated":1,"bag":{"deep":"x"}})");
  REQUIRE(out.event);
  for (const auto& v : out.event->fields) CHECK(v.empty());
}

TEST_CASE("nested bags flatten by leaf name and top level wins") {
  auto out = parse_event(
      R"({"timestamp":7,"key":"TOP","properties":{"key":"inner","meta":{"dest_port":"8080"}},"x":{"dest_port":"1"}})");
  REQUIRE(out.event);
  CHECK((*out.event)[Field::kKey] == "TOP");
  CHECK((*out.event)[Field::kDestPort] == "8080");  // first nested writer in document order
}

TEST_CASE("malformed lines are skips with a reason") {
  for (const char* line : {"", "not json", "[1,2]", R"({"hostname":"h"})", R"({"timestamp":"noon"})"}) {
    const auto out = parse_event(line);
    CHECK_FALSE(out.event);
    CHECK_FALSE(out.skip_reason.empty());
  }
}

TEST_CASE("canonical json round-trips") {
  RawEvent e;
  e.event_id = "x";
  e.hostname = "host\twith tab";
  e.timestamp = 1234;
  e.object = "FILE";
  e.action = "READ";
  e.pid = 4;
  e[Field::kFilePath] = "C:\\a \"b\".txt";
  e[Field::kAction] = "READ";
  e[Field::kObject] = "FILE";
  const auto line = to_canonical_json(e);
  const auto back = parse_event(line);
  REQUIRE(back.event);
  CHECK(*back.event == e);
  CHECK(to_canonical_json(*back.event) == line);
}

TEST_CASE("corpus stream over the nested fixture") {
  const auto path = fixture("flow_nested.ndjson");
  std::vector<std::size_t> skipped_lines;
  CorpusStream s(path, {}, [&](std::size_t n, std::string_view) { skipped_lines.push_back(n); });
  std::vector<RawEvent> events;
  while (auto e = s.next()) events.push_back(*e);
  REQUIRE(events.size() == 4);
  CHECK(skipped_lines == std::vector<std::size_t>{4, 5});
  const auto& c = s.counters();
  CHECK(c.read == 6);
  CHECK(c.read == c.yielded + c.skipped + c.filtered);
  CHECK(events[0][Field::kDestPort] == "443");
  CHECK(events[0][Field::kDuration] == "500");
  CHECK(events[0].pid == 3416);
  CHECK(events[0].ppid == 812);
  CHECK(events[2][Field::kDestPort] == "8080");
  CHECK(events[2][Field::kKey] == "TOP");
}

TEST_CASE("filters") {
  TempDir dir;
  const auto path = dir.file("three.ndjson");
  write_text(path,
             "{\"timestamp\":10,\"hostname\":\"H1\"}\n"
             "{\"timestamp\":20,\"hostname\":\"H2\"}\n"
             "{\"timestamp\":30,\"hostname\":\"H1\"}\n");
  auto count = [&](CorpusFilter f) {
    CorpusStream s(path, f);
    std::vector<std::int64_t> ts;
    while (auto e = s.next()) ts.push_back(e->timestamp);
    CHECK(s.counters().read == s.counters().yielded + s.counters().skipped + s.counters().filtered);
    return ts;
  };
  CHECK(count({}) == std::vector<std::int64_t>{10, 20, 30});
  CHECK(count({"H1", {}, {}}).size() == 2);
  CHECK(count({{}, 20, 20}).empty());
  CHECK(count({{}, 20, 31}) == std::vector<std::int64_t>{20, 30});
}

TEST_CASE("gzip input is detected by suffix") {
  TempDir dir;
  const auto path = dir.file("c.ndjson.gz");
  gzFile gz = gzopen(path.c_str(), "wb");
  const std::string body = "{\"timestamp\":1,\"hostname\":\"H\"}\n{\"timestamp\":2,\"hostname\":\"H\"}\n";
  gzwrite(gz, body.data(), static_cast<unsigned>(body.size()));
  gzclose(gz);
  CorpusStream s(path);
  int n = 0;
  while (s.next()) ++n;
  CHECK(n == 2);

  const auto fake = dir.file("plain.gz");
  write_text(fake, body);
  CHECK_THROWS_AS(([&] { CorpusStream bad(fake); while (bad.next()) {} })(), Error);
}

TEST_CASE("stream is deterministic") {
  auto collect = [] {
    CorpusStream s(fixture("flow_nested.ndjson"), {}, [](std::size_t, std::string_view) {});
    std::string out;
    while (auto e = s.next()) out += to_canonical_json(*e) + "\n";
    return out;
  };
  CHECK(collect() == collect());
}

TEST_CASE("missing file") { CHECK_THROWS_AS(CorpusStream("/nonexistent/x.ndjson"), Error); }
