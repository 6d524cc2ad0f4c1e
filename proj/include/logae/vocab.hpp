#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "logae/common.hpp"

namespace logae {

using TermIndex = std::int32_t;

// Frozen term <-> index map with training-corpus counts.
//
// Index 0 is always NULL_TERM and index 1 always OBSCURE_TERM. Remaining
// terms are ordered by descending count, ties broken lexicographically, so a
// rebuild from the same stream serializes byte-identically.
class Vocabulary {
 public:
  static constexpr TermIndex kNullIndex = 0;
  static constexpr TermIndex kObscureIndex = 1;
  static constexpr std::string_view kNullTerm = "NULL_TERM";
  static constexpr std::string_view kObscureTerm = "OBSCURE_TERM";
  static constexpr int kFormatVersion = 1;

  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint64_t> counts,
             std::uint64_t rare_floor);

  std::size_t size() const { return terms_.size(); }
  std::uint64_t total_tokens() const { return total_; }
  std::uint64_t rare_floor() const { return floor_; }

  const std::string& term(TermIndex i) const { return terms_.at(static_cast<std::size_t>(i)); }
  std::uint64_t count(TermIndex i) const { return counts_.at(static_cast<std::size_t>(i)); }
  std::optional<TermIndex> find(std::string_view term) const;
  // Unknown terms resolve to OBSCURE_TERM.
  TermIndex lookup(std::string_view term) const;

  // Information content -ln(count / total). Throws for zero-count indices.
  double term_weight(TermIndex i) const;

  // Per-index loss weights for the model. Zero-count entries (e.g. an
  // OBSCURE_TERM nothing was folded into) are weighted as if seen once.
  std::vector<double> loss_weights() const;

  // Text form: header, one "index\tterm\tcount" line per term, CRC trailer.
  std::string serialize() const;
  static Vocabulary deserialize(std::string_view text);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  // CRC-32 of serialize(); checkpoints carry it to pin their vocabulary.
  std::uint32_t checksum() const { return crc32_of(serialize()); }

  bool operator==(const Vocabulary& other) const {
    return terms_ == other.terms_ && counts_ == other.counts_ && floor_ == other.floor_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, TermIndex> index_;
  std::uint64_t total_ = 0;
  std::uint64_t floor_ = 0;
};

// First pass of vocabulary construction: raw term counts.
class VocabularyBuilder {
 public:
  void add(std::span<const std::string> terms);
  void add(std::string_view term);
  std::uint64_t tokens_seen() const { return tokens_; }

  // Second pass: fold terms with count < rare_floor into OBSCURE_TERM and
  // assign indices. Throws if nothing was added.
  Vocabulary build(std::uint64_t rare_floor) const;

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t tokens_ = 0;
};

}  // namespace logae
