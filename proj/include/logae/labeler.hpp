#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "logae/common.hpp"
#include "logae/ingest.hpp"

namespace logae {

// A red-team agent process: every event it (or any descendant) performs
// within the window is malicious.
struct SeedProcess {
  std::string host;
  std::int64_t pid = 0;
  std::int64_t window_start = 0;
  std::int64_t window_end = 0;  // inclusive
};

// Network activity not tied to a seed process, matched on destination.
struct NetRule {
  std::string host;
  std::optional<std::string> ip_prefix;  // raw textual prefix of dest_ip
  std::optional<std::int64_t> port;      // exact dest_port
  std::int64_t window_start = 0;
  std::int64_t window_end = 0;  // inclusive
};

struct GroundTruth {
  std::vector<SeedProcess> seeds;
  std::vector<NetRule> net_rules;

  // CSV with header "host,pid,window_start,window_end,kind,match".
  // kind is "process" (pid required, match empty) or "net" (pid empty,
  // match "ip:<prefix>" or "port:<n>"). Windows accept ms or ISO-8601.
  static GroundTruth parse_csv(std::string_view text);
  static GroundTruth load(const std::string& path);
  std::string to_csv() const;
  void validate() const;
};

struct ProcessInstance {
  std::string host;
  std::int64_t pid = 0;
  std::int64_t first_seen = 0;
  std::optional<std::int64_t> ppid;
  std::optional<std::size_t> parent;  // index into the forest
};

class ProcessForest {
 public:
  // One instance per PROCESS/CREATE event (pid = created process). A child
  // links to the parent-pid instance with the greatest first_seen not after
  // the child's own creation, which handles pid reuse.
  static ProcessForest build(std::span<const RawEvent> events);

  const std::vector<ProcessInstance>& instances() const { return instances_; }
  std::size_t skipped_creations() const { return skipped_; }

  // Instance of (host, pid) live at time t: greatest first_seen <= t.
  std::optional<std::size_t> resolve(const std::string& host, std::int64_t pid,
                                     std::int64_t t) const;
  // Creation time of the next instance reusing this instance's pid, if any.
  std::optional<std::int64_t> successor_start(std::size_t instance) const;
  // Parent chain, nearest first.
  std::vector<std::size_t> ancestors(std::size_t instance) const;

 private:
  std::vector<ProcessInstance> instances_;
  // (host, pid) -> instance indices sorted by first_seen
  std::map<std::pair<std::string, std::int64_t>, std::vector<std::size_t>> by_pid_;
  std::size_t skipped_ = 0;
};

bool is_process_creation(const RawEvent& event);

class Labeler {
 public:
  Labeler(const ProcessForest& forest, const GroundTruth& truth);

  // Malicious iff (a) the acting process is a seed or descends from one and
  // the event falls inside that seed's lifetime (instance creation or window
  // start, whichever is earlier, through window end); or (b) the event
  // matches a net rule. Everything else is benign.
  Label label(const RawEvent& event) const;

 private:
  bool seed_covers(const SeedProcess& seed, std::optional<std::size_t> instance,
                   std::int64_t t) const;
  bool via_process(const RawEvent& event) const;
  bool via_network(const RawEvent& event) const;

  const ProcessForest& forest_;
  const GroundTruth& truth_;
  std::map<std::pair<std::string, std::int64_t>, std::vector<std::size_t>> seeds_by_pid_;
};

std::vector<Label> label_events(std::span<const RawEvent> events, const ProcessForest& forest,
                                const GroundTruth& truth);

}  // namespace logae
