#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "logae/common.hpp"
#include "logae/ingest.hpp"
#include "logae/vocab.hpp"

namespace logae {

struct PreprocConfig {
  // SMALL < duration_medium_ms <= MEDIUM < duration_large_ms <= LARGE
  std::int64_t duration_medium_ms = 1000;
  std::int64_t duration_large_ms = 60000;
  // Ports strictly above this collapse to EPHEMERAL_PORT.
  std::int64_t ephemeral_port_floor = 49151;
  // Terms seen fewer times than this in training fold into OBSCURE_TERM.
  std::uint64_t rare_term_floor = 10;

  void validate() const;
};

namespace terms {
inline constexpr std::string_view kEphemeralPort = "EPHEMERAL_PORT";
inline constexpr std::string_view kDurSmall = "DUR_SMALL";
inline constexpr std::string_view kDurMedium = "DUR_MEDIUM";
inline constexpr std::string_view kDurLarge = "DUR_LARGE";
}  // namespace terms

using TermArray = std::array<std::string, kFieldCount>;
using TokenArray = std::array<TermIndex, kFieldCount>;

struct TermRecord {
  TermArray terms;
  std::string hostname;
  std::int64_t timestamp = 0;
  Label label = Label::kUnlabeled;

  bool operator==(const TermRecord&) const = default;
};

struct TokenizedRecord {
  TokenArray token_ids{};
  std::string hostname;
  std::int64_t timestamp = 0;
  Label label = Label::kUnlabeled;
};

// True for the fields whose values are reduced to a bare file name.
bool is_path_field(Field field);

// Maps one raw field value to its vocabulary term. Total: every input yields a
// non-empty term, and feeding a term back in through the same field returns it
// unchanged.
std::string normalize_field(Field field, std::string_view raw_value, const PreprocConfig& config);

TermRecord tokenize(const RawEvent& event, const PreprocConfig& config,
                    Label label = Label::kUnlabeled);

TokenizedRecord index(const TermRecord& record, const Vocabulary& vocab);

// Term stream: one record per line, 27 tab-separated terms then host,
// timestamp and label columns.
std::string format_term_record(const TermRecord& record);
TermRecord parse_term_record(std::string_view line);

class TermStreamReader {
 public:
  explicit TermStreamReader(const std::string& path);
  std::optional<TermRecord> next();

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_ = 0;
};

class TermStreamWriter {
 public:
  explicit TermStreamWriter(const std::string& path);
  void write(const TermRecord& record);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace logae
