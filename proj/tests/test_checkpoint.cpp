#include <bit>

#include "doctest.h"
#include "logae/checkpoint.hpp"
#include "test_util.hpp"

using namespace logae;

namespace {

Checkpoint sample() {
  Checkpoint ck;
  ck.config.vocab_size = 11;
  ck.config.embedding_dim = 3;
  ck.config.hidden_dim = 4;
  ck.config.fields = 5;
  ck.config.alpha = 0.1;
  ck.config.seed = 99;
  ck.vocab_checksum = 0xdeadbeef;
  Rng rng(4);
  ck.params = ModelParams<double>::initialize(ck.config, rng);
  ck.params.extractor_bias(3) = -0.0;
  ck.params.decoder_bias(2) = 1e-300;
  return ck;
}

}  // namespace

TEST_CASE("checkpoint round trip is exact") {
  TempDir dir;
  const auto ck = sample();
  ck.save(dir.file("m.ckpt"));
  const auto back = Checkpoint::load(dir.file("m.ckpt"));
  CHECK(back.config == ck.config);
  CHECK(back.vocab_checksum == ck.vocab_checksum);
  CHECK(back.params == ck.params);
  CHECK(back.serialize() == ck.serialize());
}

TEST_CASE("payload is little-endian float64 in tensor order") {
  const auto ck = sample();
  const auto bytes = ck.serialize();
  const auto payload = bytes.substr(bytes.find("\nend\n") + 5);
  const double first = ck.params.embedding(0, 0);
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(payload[static_cast<std::size_t>(i)]);
  CHECK(std::bit_cast<double>(bits) == first);
  // Row-major: second value is embedding(0, 1).
  bits = 0;
  for (int i = 15; i >= 8; --i) bits = (bits << 8) | static_cast<unsigned char>(payload[static_cast<std::size_t>(i)]);
  CHECK(std::bit_cast<double>(bits) == ck.params.embedding(0, 1));
}

TEST_CASE("corruption is detected") {
  const auto bytes = sample().serialize();
  CHECK_THROWS_AS(Checkpoint::deserialize(bytes.substr(0, bytes.size() - 8)), Error);
  auto flipped = bytes;
  flipped.back() = static_cast<char>(flipped.back() ^ 1);
  CHECK_THROWS_AS(Checkpoint::deserialize(flipped), Error);
  auto version = bytes;
  version.replace(0, 18, "logae-checkpoint 9");
  CHECK_THROWS_WITH_AS(Checkpoint::deserialize(version), doctest::Contains("version"), Error);
  CHECK_THROWS_AS(Checkpoint::deserialize("garbage"), Error);
  CHECK_THROWS_AS(Checkpoint::load("/nonexistent/m.ckpt"), Error);
}
