#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace logae {

// All recoverable failures in the library surface as this exception type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Label : std::uint8_t { kUnlabeled, kBenign, kMalicious };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

// CRC-32 (zlib polynomial) of a byte range; used for vocab/checkpoint integrity.
std::uint32_t crc32_of(std::string_view bytes);
std::string crc_hex(std::uint32_t crc);

// Strict base-10 parse of the whole string; nullopt on any junk.
std::optional<std::int64_t> parse_int(std::string_view text);
std::optional<double> parse_double(std::string_view text);

}  // namespace logae
