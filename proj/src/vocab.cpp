#include "logae/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace logae {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t header_value(std::string_view line, std::string_view key) {
  const auto parts = split(line, '\t');
  if (parts.size() != 2 || parts[0] != key)
    throw Error("vocab: expected '" + std::string(key) + "' header line");
  auto v = parse_int(parts[1]);
  if (!v || *v < 0) throw Error("vocab: bad value for '" + std::string(key) + "'");
  return static_cast<std::uint64_t>(*v);
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::uint64_t> counts,
                       std::uint64_t rare_floor)
    : terms_(std::move(terms)), counts_(std::move(counts)), floor_(rare_floor) {
  if (terms_.size() != counts_.size()) throw Error("vocab: terms/counts length mismatch");
  if (terms_.size() < 2 || terms_[0] != kNullTerm || terms_[1] != kObscureTerm)
    throw Error("vocab: reserved terms missing from slots 0 and 1");
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i].empty() || terms_[i].find_first_of("\t\r\n") != std::string::npos)
      throw Error("vocab: term " + std::to_string(i) + " is empty or contains a separator");
    if (!index_.emplace(terms_[i], static_cast<TermIndex>(i)).second)
      throw Error("vocab: duplicate term '" + terms_[i] + "'");
    total_ += counts_[i];
  }
}

std::optional<TermIndex> Vocabulary::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TermIndex Vocabulary::lookup(std::string_view term) const {
  return find(term).value_or(kObscureIndex);
}

double Vocabulary::term_weight(TermIndex i) const {
  const std::uint64_t c = count(i);
  if (c == 0) throw Error("vocab: term_weight of zero-count term '" + term(i) + "'");
  return -std::log(static_cast<double>(c) / static_cast<double>(total_));
}

std::vector<double> Vocabulary::loss_weights() const {
  std::vector<double> w(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const double c = static_cast<double>(std::max<std::uint64_t>(counts_[i], 1));
    w[i] = -std::log(c / static_cast<double>(std::max<std::uint64_t>(total_, 1)));
    if (w[i] < 0) w[i] = 0;  // -0.0 and rounding noise when c == total
  }
  return w;
}

std::string Vocabulary::serialize() const {
  std::ostringstream os;
  os << "logae-vocab\t" << kFormatVersion << '\n'
     << "size\t" << terms_.size() << '\n'
     << "total\t" << total_ << '\n'
     << "floor\t" << floor_ << '\n';
  for (std::size_t i = 0; i < terms_.size(); ++i)
    os << i << '\t' << terms_[i] << '\t' << counts_[i] << '\n';
  std::string body = os.str();
  body += "crc\t" + crc_hex(crc32_of(body)) + '\n';
  return body;
}

Vocabulary Vocabulary::deserialize(std::string_view text) {
  // The trailer covers every byte before it, so truncation anywhere fails here.
  if (text.empty() || text.back() != '\n') throw Error("vocab: truncated file");
  const std::size_t trailer = text.rfind("crc\t", text.size() - 1);
  if (trailer == std::string_view::npos || (trailer != 0 && text[trailer - 1] != '\n'))
    throw Error("vocab: missing checksum trailer");
  const std::string_view body = text.substr(0, trailer);
  const std::string_view stored = text.substr(trailer + 4, text.size() - trailer - 5);
  if (stored != crc_hex(crc32_of(body))) throw Error("vocab: checksum mismatch");

  auto lines = split(body, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() < 4) throw Error("vocab: truncated header");
  const auto magic = split(lines[0], '\t');
  if (magic.size() != 2 || magic[0] != "logae-vocab") throw Error("vocab: not a vocabulary file");
  if (magic[1] != std::to_string(kFormatVersion))
    throw Error("vocab: unsupported format version " + std::string(magic[1]));
  const std::uint64_t size = header_value(lines[1], "size");
  const std::uint64_t total = header_value(lines[2], "total");
  const std::uint64_t floor = header_value(lines[3], "floor");
  if (lines.size() != 4 + size) throw Error("vocab: term count does not match header");

  std::vector<std::string> terms;
  std::vector<std::uint64_t> counts;
  terms.reserve(size);
  counts.reserve(size);
  for (std::uint64_t i = 0; i < size; ++i) {
    const auto parts = split(lines[4 + i], '\t');
    if (parts.size() != 3) throw Error("vocab: malformed term line " + std::to_string(i));
    auto idx = parse_int(parts[0]);
    auto cnt = parse_int(parts[2]);
    if (!idx || static_cast<std::uint64_t>(*idx) != i || !cnt || *cnt < 0)
      throw Error("vocab: malformed term line " + std::to_string(i));
    terms.emplace_back(parts[1]);
    counts.push_back(static_cast<std::uint64_t>(*cnt));
  }
  Vocabulary v(std::move(terms), std::move(counts), floor);
  if (v.total_tokens() != total) throw Error("vocab: total does not match counts");
  return v;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << serialize();
  if (!out) throw Error("write failed for " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return deserialize(ss.str());
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void VocabularyBuilder::add(std::span<const std::string> terms) {
  for (const auto& t : terms) add(t);
}

void VocabularyBuilder::add(std::string_view term) {
  ++counts_[std::string(term)];
  ++tokens_;
}

Vocabulary VocabularyBuilder::build(std::uint64_t rare_floor) const {
  if (tokens_ == 0) throw Error("vocab: cannot build from an empty term stream");

  std::uint64_t null_count = 0;
  std::uint64_t obscure_count = 0;
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [term, n] : counts_) {
    if (term == Vocabulary::kNullTerm) {
      null_count += n;
    } else if (term == Vocabulary::kObscureTerm || n < rare_floor) {
      obscure_count += n;
    } else {
      kept.emplace_back(term, n);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });

  std::vector<std::string> terms{std::string(Vocabulary::kNullTerm),
                                 std::string(Vocabulary::kObscureTerm)};
  std::vector<std::uint64_t> counts{null_count, obscure_count};
  for (auto& [term, n] : kept) {
    terms.push_back(std::move(term));
    counts.push_back(n);
  }
  return Vocabulary(std::move(terms), std::move(counts), rare_floor);
}

}  // namespace logae
