#include "logae/preprocess.hpp"

#include <algorithm>
#include <cctype>

namespace logae {

namespace {

constexpr std::string_view kWhitespace = " \t\r\n\f\v";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(kWhitespace);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(kWhitespace);
  return s.substr(first, last - first + 1);
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// Tabs and line breaks are column/record separators downstream.
std::string sanitize(std::string_view raw) {
  std::string out(trim(raw));
  std::replace_if(out.begin(), out.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; },
                  ' ');
  return out;
}

std::string_view last_path_component(std::string_view path) {
  while (!path.empty() && (path.back() == '/' || path.back() == '\\')) path.remove_suffix(1);
  const auto sep = path.find_last_of("/\\");
  return sep == std::string_view::npos ? path : path.substr(sep + 1);
}

std::string_view executable_of(std::string_view command_line) {
  if (!command_line.empty() && command_line.front() == '"') {
    const auto close = command_line.find('"', 1);
    return close == std::string_view::npos ? command_line.substr(1)
                                           : command_line.substr(1, close - 1);
  }
  return command_line.substr(0, command_line.find_first_of(kWhitespace));
}

std::optional<std::string> ipv4_subnet24(std::string_view ip) {
  int octets = 0;
  std::size_t third_end = 0;
  std::size_t pos = 0;
  while (true) {
    std::size_t n = 0;
    int value = 0;
    while (pos < ip.size() && ip[pos] >= '0' && ip[pos] <= '9') {
      value = value * 10 + (ip[pos] - '0');
      ++pos;
      if (++n > 3) return std::nullopt;
    }
    if (n == 0 || value > 255) return std::nullopt;
    ++octets;
    if (octets == 3) third_end = pos;
    if (pos == ip.size()) break;
    if (ip[pos] != '.' || octets == 4) return std::nullopt;
    ++pos;
  }
  if (octets != 4) return std::nullopt;
  return std::string(ip.substr(0, third_end));
}

std::string upper_prefix(Field field) {
  std::string p(field_name(field));
  for (char& c : p) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  p += '_';
  return p;
}

std::string or_null(std::string_view term) {
  return term.empty() ? std::string(Vocabulary::kNullTerm) : std::string(term);
}

std::string normalize_port(std::string_view value, const std::string& prefix,
                           const PreprocConfig& config) {
  if (value == terms::kEphemeralPort || starts_with(value, prefix)) return std::string(value);
  if (auto port = parse_int(value)) {
    if (*port > config.ephemeral_port_floor) return std::string(terms::kEphemeralPort);
    return prefix + std::to_string(*port);
  }
  return prefix + std::string(value);
}

std::string normalize_duration(std::string_view value, const std::string& prefix,
                               const PreprocConfig& config) {
  if (value == terms::kDurSmall || value == terms::kDurMedium || value == terms::kDurLarge ||
      starts_with(value, prefix))
    return std::string(value);
  if (auto ms = parse_int(value); ms && *ms >= 0) {
    if (*ms < config.duration_medium_ms) return std::string(terms::kDurSmall);
    if (*ms < config.duration_large_ms) return std::string(terms::kDurMedium);
    return std::string(terms::kDurLarge);
  }
  return prefix + std::string(value);
}

}  // namespace

void PreprocConfig::validate() const {
  if (duration_medium_ms < 0 || duration_large_ms < duration_medium_ms)
    throw Error("preprocess: duration thresholds must satisfy 0 <= medium <= large");
  if (ephemeral_port_floor < 0) throw Error("preprocess: ephemeral port floor must be >= 0");
}

bool is_path_field(Field field) {
  switch (field) {
    case Field::kFilePath:
    case Field::kImagePath:
    case Field::kModulePath:
    case Field::kNewPath:
    case Field::kParentImagePath:
    case Field::kPath:
    case Field::kKey:
      return true;
    default:
      return false;
  }
}

std::string normalize_field(Field field, std::string_view raw_value, const PreprocConfig& config) {
  const std::string value = sanitize(raw_value);
  if (value.empty()) return std::string(Vocabulary::kNullTerm);
  if (value == Vocabulary::kNullTerm || value == Vocabulary::kObscureTerm) return value;

  // File names share one unprefixed namespace across every path-bearing field.
  if (is_path_field(field)) return or_null(last_path_component(value));
  if (field == Field::kCommandLine)
    return or_null(last_path_component(executable_of(value)));

  const std::string prefix = upper_prefix(field);
  switch (field) {
    case Field::kDestPort:
      return normalize_port(value, prefix, config);
    case Field::kDuration:
      return normalize_duration(value, prefix, config);
    case Field::kDestIp:
      if (starts_with(value, "IP_")) return value;
      if (auto subnet = ipv4_subnet24(value)) return "IP_" + *subnet;
      return "IP_" + value;
    default:
      break;
  }
  if (starts_with(value, prefix)) return value;
  return prefix + value;
}

TermRecord tokenize(const RawEvent& event, const PreprocConfig& config, Label label) {
  TermRecord rec;
  for (std::size_t i = 0; i < kFieldCount; ++i)
    rec.terms[i] = normalize_field(static_cast<Field>(i), event.fields[i], config);
  rec.hostname = event.hostname;
  rec.timestamp = event.timestamp;
  rec.label = label;
  return rec;
}

TokenizedRecord index(const TermRecord& record, const Vocabulary& vocab) {
  TokenizedRecord out;
  for (std::size_t i = 0; i < kFieldCount; ++i) out.token_ids[i] = vocab.lookup(record.terms[i]);
  out.hostname = record.hostname;
  out.timestamp = record.timestamp;
  out.label = record.label;
  return out;
}

std::string format_term_record(const TermRecord& record) {
  std::string line;
  for (const auto& t : record.terms) {
    line += t;
    line += '\t';
  }
  line += sanitize(record.hostname);
  line += '\t';
  line += std::to_string(record.timestamp);
  line += '\t';
  line += to_string(record.label);
  return line;
}

TermRecord parse_term_record(std::string_view line) {
  TermRecord rec;
  std::size_t start = 0;
  auto next_column = [&]() -> std::string_view {
    if (start > line.size()) throw Error("term stream: too few columns");
    const auto tab = line.find('\t', start);
    const auto col = line.substr(start, tab - start);
    start = tab == std::string_view::npos ? line.size() + 1 : tab + 1;
    return col;
  };
  for (auto& t : rec.terms) {
    t = next_column();
    if (t.empty()) throw Error("term stream: empty term");
  }
  rec.hostname = next_column();
  const auto ts = parse_int(next_column());
  if (!ts) throw Error("term stream: bad timestamp");
  rec.timestamp = *ts;
  rec.label = parse_label(next_column());
  if (start <= line.size()) throw Error("term stream: too many columns");
  return rec;
}

TermStreamReader::TermStreamReader(const std::string& path) : path_(path), in_(path) {
  if (!in_) throw Error("cannot open " + path);
}

std::optional<TermRecord> TermStreamReader::next() {
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  ++line_;
  try {
    return parse_term_record(line);
  } catch (const Error& e) {
    throw Error(path_ + ":" + std::to_string(line_) + ": " + e.what());
  }
}

TermStreamWriter::TermStreamWriter(const std::string& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error("cannot write " + path);
}

void TermStreamWriter::write(const TermRecord& record) {
  out_ << format_term_record(record) << '\n';
}

void TermStreamWriter::close() {
  out_.close();
  if (!out_) throw Error("write failed for " + path_);
}

}  // namespace logae
