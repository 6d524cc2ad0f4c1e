#include "logae/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "json.hpp"

namespace logae {

namespace {

using json = nlohmann::ordered_json;

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::optional<int> digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) return std::nullopt;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

std::optional<std::int64_t> parse_iso8601(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS[.fff...](Z|+hh:mm|-hh:mm)?
  auto y = digits(s, 0, 4), mo = digits(s, 5, 2), d = digits(s, 8, 2);
  auto h = digits(s, 11, 2), mi = digits(s, 14, 2), se = digits(s, 17, 2);
  if (!y || !mo || !d || !h || !mi || !se) return std::nullopt;
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' ||
      s[16] != ':')
    return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok() || *h > 23 || *mi > 59 || *se > 60) return std::nullopt;

  std::size_t pos = 19;
  std::int64_t millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int scale = 100;
    std::size_t n = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      millis += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
      ++n;
    }
    if (n == 0) return std::nullopt;
  }
  std::int64_t offset_min = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      ++pos;
    } else if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 && s[pos + 3] == ':') {
      auto oh = digits(s, pos + 1, 2), om = digits(s, pos + 4, 2);
      if (!oh || !om) return std::nullopt;
      offset_min = (*oh * 60 + *om) * (s[pos] == '-' ? -1 : 1);
      pos += 6;
    } else {
      return std::nullopt;
    }
  }
  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  const std::int64_t secs = days * 86400 + *h * 3600 + *mi * 60 + *se - offset_min * 60;
  return secs * 1000 + millis;
}

std::optional<std::string> scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_float()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return std::nullopt;
}

std::optional<std::int64_t> integer_of(const json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_unsigned()) return static_cast<std::int64_t>(v.get<std::uint64_t>());
  if (v.is_string()) return parse_int(v.get_ref<const std::string&>());
  return std::nullopt;
}

std::optional<std::int64_t> timestamp_of(const json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) return integer_of(v);
  if (v.is_number_float()) return static_cast<std::int64_t>(v.get<double>());
  if (v.is_string()) return parse_timestamp(v.get_ref<const std::string&>());
  return std::nullopt;
}

// Leaf-name view of a record: top-level scalars first, then nested bags in
// document order. First writer wins, so top-level keys shadow nested ones.
class FlatRecord {
 public:
  explicit FlatRecord(const json& root) {
    for (const auto& [k, v] : root.items())
      if (!v.is_object()) put(k, v);
    for (const auto& [k, v] : root.items())
      if (v.is_object()) walk(v);
  }

  const json* find(std::string_view key) const {
    for (const auto& [k, v] : entries_)
      if (k == key) return v;
    return nullptr;
  }

 private:
  void put(const std::string& key, const json& value) {
    if (value.is_null() || value.is_array()) return;
    if (find(key) == nullptr) entries_.emplace_back(key, &value);
  }
  void walk(const json& obj) {
    for (const auto& [k, v] : obj.items())
      if (!v.is_object()) put(k, v);
    for (const auto& [k, v] : obj.items())
      if (v.is_object()) walk(v);
  }

  std::vector<std::pair<std::string, const json*>> entries_;
};

}  // namespace

std::optional<Field> field_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFieldCount; ++i)
    if (kFieldNames[i] == name) return static_cast<Field>(i);
  return std::nullopt;
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  if (auto v = parse_int(text)) return v;
  return parse_iso8601(text);
}

std::string format_timestamp(std::int64_t ms) {
  using namespace std::chrono;
  const std::int64_t day_ms = 86400000;
  std::int64_t days = ms / day_ms;
  std::int64_t rem = ms % day_ms;
  if (rem < 0) {
    rem += day_ms;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), int(rem / 3600000),
                int(rem / 60000 % 60), int(rem / 1000 % 60), int(rem % 1000));
  return buf;
}

ParseOutcome parse_event(std::string_view line) {
  ParseOutcome out;
  if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
    out.skip_reason = "empty line";
    return out;
  }
  json root = json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) {
    out.skip_reason = "malformed record";
    return out;
  }
  if (!root.is_object()) {
    out.skip_reason = "record is not an object";
    return out;
  }
  const FlatRecord flat(root);

  const json* ts = flat.find("timestamp");
  std::optional<std::int64_t> when = ts ? timestamp_of(*ts) : std::nullopt;
  if (!when) {
    out.skip_reason = ts ? "unparseable timestamp" : "missing timestamp";
    return out;
  }

  RawEvent ev;
  ev.timestamp = *when;
  auto text = [&](std::string_view key) -> std::string {
    const json* v = flat.find(key);
    if (!v) return {};
    return scalar_text(*v).value_or(std::string{});
  };
  ev.event_id = text("id");
  ev.hostname = text("hostname");
  if (const json* v = flat.find("pid")) ev.pid = integer_of(*v);
  if (const json* v = flat.find("ppid")) ev.ppid = integer_of(*v);

  for (std::size_t i = 0; i < kFieldCount; ++i) ev.fields[i] = text(kFieldNames[i]);
  ev.object = ev[Field::kObject];
  ev.action = ev[Field::kAction];

  // Duration is derived from flow start/end when both exist; a pre-computed
  // duration survives only if it is a non-negative integer.
  std::string& duration = ev[Field::kDuration];
  const json* start = flat.find("start_time");
  const json* end = flat.find("end_time");
  if (start && end) {
    auto s = timestamp_of(*start), e = timestamp_of(*end);
    duration = (s && e && *e >= *s) ? std::to_string(*e - *s) : std::string{};
  } else if (!duration.empty()) {
    auto d = parse_int(duration);
    duration = (d && *d >= 0) ? std::to_string(*d) : std::string{};
  }

  out.event = std::move(ev);
  return out;
}

std::string to_canonical_json(const RawEvent& event) {
  json j;
  j["id"] = event.event_id;
  j["hostname"] = event.hostname;
  j["timestamp"] = event.timestamp;
  j["object"] = event.object;
  j["action"] = event.action;
  j["pid"] = event.pid ? json(*event.pid) : json(nullptr);
  j["ppid"] = event.ppid ? json(*event.ppid) : json(nullptr);
  json fields = json::object();
  for (std::size_t i = 0; i < kFieldCount; ++i) fields[std::string(kFieldNames[i])] = event.fields[i];
  j["fields"] = std::move(fields);
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

bool CorpusFilter::accepts(const RawEvent& event) const {
  if (host && event.hostname != *host) return false;
  if (from_ms && event.timestamp < *from_ms) return false;
  if (to_ms && event.timestamp >= *to_ms) return false;
  return true;
}

class CorpusStream::LineReader {
 public:
  explicit LineReader(const std::string& path) : path_(path) {
    if (ends_with(path, ".gz")) {
      gz_ = gzopen(path.c_str(), "rb");
      if (!gz_) throw Error("cannot open " + path);
      if (gzdirect(gz_)) {
        gzclose(gz_);
        gz_ = nullptr;
        throw Error("decompression failed for " + path + ": not a gzip stream");
      }
    } else {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error("cannot open " + path);
    }
  }
  ~LineReader() {
    if (gz_) gzclose(gz_);
  }

  bool getline(std::string& line) {
    line.clear();
    if (!gz_) {
      if (!std::getline(file_, line)) {
        if (file_.bad()) throw Error("read error on " + path_);
        return false;
      }
    } else {
      char buf[8192];
      bool any = false;
      while (gzgets(gz_, buf, sizeof buf) != nullptr) {
        any = true;
        line.append(buf);
        if (!line.empty() && line.back() == '\n') break;
      }
      int errnum = Z_OK;
      const char* msg = gzerror(gz_, &errnum);
      if (errnum != Z_OK && errnum != Z_STREAM_END)
        throw Error("decompression failed for " + path_ + ": " + msg);
      if (!any) return false;
      if (!line.empty() && line.back() == '\n') line.pop_back();
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

 private:
  std::string path_;
  std::ifstream file_;
  gzFile gz_ = nullptr;
};

CorpusStream::CorpusStream(const std::string& path, CorpusFilter filter, SkipSink on_skip)
    : path_(path),
      filter_(std::move(filter)),
      on_skip_(std::move(on_skip)),
      reader_(std::make_unique<LineReader>(path)) {}

CorpusStream::~CorpusStream() = default;
CorpusStream::CorpusStream(CorpusStream&&) noexcept = default;
CorpusStream& CorpusStream::operator=(CorpusStream&&) noexcept = default;

std::optional<RawEvent> CorpusStream::next() {
  std::string line;
  while (reader_->getline(line)) {
    ++counters_.read;
    ParseOutcome parsed = parse_event(line);
    if (!parsed.event) {
      ++counters_.skipped;
      if (on_skip_) on_skip_(counters_.read, parsed.skip_reason);
      continue;
    }
    if (!filter_.accepts(*parsed.event)) {
      ++counters_.filtered;
      continue;
    }
    ++counters_.yielded;
    return std::move(parsed.event);
  }
  return std::nullopt;
}

SkipSink stderr_skip_sink(std::string path) {
  return [path = std::move(path)](std::size_t line, std::string_view reason) {
    std::cerr << "warning: " << path << ':' << line << ": " << reason << '\n';
  };
}

}  // namespace logae
