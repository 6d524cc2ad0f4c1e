#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "logae/common.hpp"

namespace logae {

// The 27 telemetry keys kept per record, in canonical slot order. The model
// concatenates per-slot embeddings positionally, so this order is load-bearing.
enum class Field : std::uint8_t {
  kAction,
  kCommandLine,
  kDestIp,
  kDestPort,
  kDirection,
  kFilePath,
  kImagePath,
  kInfoClass,
  kKey,
  kL4Protocol,
  kLogonId,
  kModulePath,
  kNewPath,
  kObject,
  kParentImagePath,
  kPath,
  kPrincipal,
  kRequestingDomain,
  kRequestingLogonId,
  kRequestingUser,
  kSid,
  kTaskName,
  kType,
  kUser,
  kUserName,
  kValue,
  kDuration,
};

inline constexpr std::size_t kFieldCount = 27;

inline constexpr std::array<std::string_view, kFieldCount> kFieldNames = {
    "action",          "command_line",        "dest_ip",         "dest_port",
    "direction",       "file_path",           "image_path",      "info_class",
    "key",             "l4protocol",          "logon_id",        "module_path",
    "new_path",        "object",              "parent_image_path", "path",
    "principal",       "requesting_domain",   "requesting_logon_id",
    "requesting_user", "sid",                 "task_name",       "type",
    "user",            "user_name",           "value",           "duration",
};

constexpr std::size_t slot(Field f) { return static_cast<std::size_t>(f); }
constexpr std::string_view field_name(Field f) { return kFieldNames[slot(f)]; }
std::optional<Field> field_from_name(std::string_view name);

using FieldValues = std::array<std::string, kFieldCount>;

// One parsed telemetry record. Absent source keys are empty strings.
struct RawEvent {
  std::string event_id;
  std::string hostname;
  std::int64_t timestamp = 0;  // ms since epoch, UTC
  std::string object;
  std::string action;
  std::optional<std::int64_t> pid;
  std::optional<std::int64_t> ppid;
  FieldValues fields;

  const std::string& operator[](Field f) const { return fields[slot(f)]; }
  std::string& operator[](Field f) { return fields[slot(f)]; }

  bool operator==(const RawEvent&) const = default;
};

// Integer milliseconds, numeric strings, or ISO-8601 with Z / +hh:mm offset.
std::optional<std::int64_t> parse_timestamp(std::string_view text);
std::string format_timestamp(std::int64_t ms);  // ISO-8601 UTC, millisecond precision

struct ParseOutcome {
  std::optional<RawEvent> event;
  std::string skip_reason;  // set iff !event
};

// Parses one NDJSON line. Never throws on bad input; malformed lines come
// back as a skip with a reason.
ParseOutcome parse_event(std::string_view line);

// Canonical single-line JSON for an event; parse_event() reads it back to an
// equal RawEvent.
std::string to_canonical_json(const RawEvent& event);

struct CorpusFilter {
  std::optional<std::string> host;
  std::optional<std::int64_t> from_ms;  // inclusive
  std::optional<std::int64_t> to_ms;    // exclusive

  bool accepts(const RawEvent& event) const;
};

struct CorpusCounters {
  std::size_t read = 0;
  std::size_t yielded = 0;
  std::size_t skipped = 0;
  std::size_t filtered = 0;
};

using SkipSink = std::function<void(std::size_t line_number, std::string_view reason)>;

// Streams RawEvents from an NDJSON file (gzip when the path ends in .gz).
class CorpusStream {
 public:
  explicit CorpusStream(const std::string& path, CorpusFilter filter = {},
                        SkipSink on_skip = {});
  ~CorpusStream();
  CorpusStream(CorpusStream&&) noexcept;
  CorpusStream& operator=(CorpusStream&&) noexcept;

  std::optional<RawEvent> next();
  const CorpusCounters& counters() const { return counters_; }
  const std::string& path() const { return path_; }

 private:
  class LineReader;
  std::string path_;
  CorpusFilter filter_;
  SkipSink on_skip_;
  std::unique_ptr<LineReader> reader_;
  CorpusCounters counters_;
};

// Default sink: "warning: <path>:<line>: <reason>" on stderr.
SkipSink stderr_skip_sink(std::string path);

}  // namespace logae
