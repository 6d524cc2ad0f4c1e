#pragma once

#include <cstdint>
#include <string>

#include "logae/model.hpp"

namespace logae {

// Text header (format version, model config, vocab CRC, payload size and
// CRC) terminated by "end\n", then every tensor as little-endian float64 in
// declaration order, each row-major.
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  ModelConfig config;
  std::uint32_t vocab_checksum = 0;
  ModelParams<double> params;

  std::string serialize() const;
  static Checkpoint deserialize(std::string_view bytes);
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

}  // namespace logae
