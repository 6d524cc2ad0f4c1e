#include "logae/labeler.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace logae {

namespace {

constexpr std::string_view kTruthHeader = "host,pid,window_start,window_end,kind,match";

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cols.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cols;
}

bool within(std::int64_t t, std::int64_t lo, std::int64_t hi) { return lo <= t && t <= hi; }

}  // namespace

GroundTruth GroundTruth::parse_csv(std::string_view text) {
  GroundTruth truth;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl - start);
    start = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    auto fail = [&](const std::string& why) {
      return Error("ground truth line " + std::to_string(line_no) + ": " + why);
    };
    if (!header_seen) {
      if (line != kTruthHeader) throw fail("expected header '" + std::string(kTruthHeader) + "'");
      header_seen = true;
      continue;
    }
    const auto cols = split_csv(line);
    if (cols.size() != 6) throw fail("expected 6 columns");
    const auto ws = parse_timestamp(cols[2]);
    const auto we = parse_timestamp(cols[3]);
    if (!ws || !we) throw fail("bad window timestamp");
    if (cols[4] == "process") {
      const auto pid = parse_int(cols[1]);
      if (!pid) throw fail("process row needs a numeric pid");
      truth.seeds.push_back({std::string(cols[0]), *pid, *ws, *we});
    } else if (cols[4] == "net") {
      NetRule rule{std::string(cols[0]), std::nullopt, std::nullopt, *ws, *we};
      const std::string_view match = cols[5];
      if (match.substr(0, 3) == "ip:" && match.size() > 3) {
        rule.ip_prefix = std::string(match.substr(3));
      } else if (match.substr(0, 5) == "port:") {
        rule.port = parse_int(match.substr(5));
        if (!rule.port) throw fail("bad port in match column");
      } else {
        throw fail("net row match must be ip:<prefix> or port:<n>");
      }
      truth.net_rules.push_back(std::move(rule));
    } else {
      throw fail("kind must be 'process' or 'net'");
    }
  }
  if (!header_seen) throw Error("ground truth: missing header");
  truth.validate();
  return truth;
}

GroundTruth GroundTruth::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_csv(ss.str());
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string GroundTruth::to_csv() const {
  std::ostringstream os;
  os << kTruthHeader << '\n';
  for (const auto& s : seeds)
    os << s.host << ',' << s.pid << ',' << s.window_start << ',' << s.window_end << ",process,\n";
  for (const auto& r : net_rules) {
    os << r.host << ",," << r.window_start << ',' << r.window_end << ",net,";
    if (r.ip_prefix)
      os << "ip:" << *r.ip_prefix;
    else
      os << "port:" << r.port.value_or(0);
    os << '\n';
  }
  return os.str();
}

void GroundTruth::validate() const {
  for (const auto& s : seeds)
    if (s.window_start > s.window_end) throw Error("ground truth: seed window ends before it starts");
  for (const auto& r : net_rules) {
    if (r.window_start > r.window_end) throw Error("ground truth: net window ends before it starts");
    if (!r.ip_prefix && !r.port) throw Error("ground truth: net rule without a match");
  }
}

bool is_process_creation(const RawEvent& event) {
  return event.object == "PROCESS" && event.action == "CREATE";
}

ProcessForest ProcessForest::build(std::span<const RawEvent> events) {
  ProcessForest forest;
  for (const auto& ev : events) {
    if (!is_process_creation(ev)) continue;
    if (!ev.pid) {
      ++forest.skipped_;
      continue;
    }
    auto& slot = forest.by_pid_[{ev.hostname, *ev.pid}];
    const bool duplicate = std::any_of(slot.begin(), slot.end(), [&](std::size_t i) {
      return forest.instances_[i].first_seen == ev.timestamp;
    });
    if (duplicate) {
      ++forest.skipped_;
      continue;
    }
    slot.push_back(forest.instances_.size());
    forest.instances_.push_back({ev.hostname, *ev.pid, ev.timestamp, ev.ppid, std::nullopt});
  }
  for (auto& [key, slot] : forest.by_pid_) {
    std::sort(slot.begin(), slot.end(), [&](std::size_t a, std::size_t b) {
      return forest.instances_[a].first_seen < forest.instances_[b].first_seen;
    });
  }
  for (std::size_t i = 0; i < forest.instances_.size(); ++i) {
    auto& inst = forest.instances_[i];
    if (!inst.ppid) continue;
    auto parent = forest.resolve(inst.host, *inst.ppid, inst.first_seen);
    if (parent && *parent != i) inst.parent = parent;
  }
  return forest;
}

std::optional<std::size_t> ProcessForest::resolve(const std::string& host, std::int64_t pid,
                                                  std::int64_t t) const {
  auto it = by_pid_.find({host, pid});
  if (it == by_pid_.end()) return std::nullopt;
  const auto& slot = it->second;
  auto after = std::upper_bound(slot.begin(), slot.end(), t, [&](std::int64_t v, std::size_t i) {
    return v < instances_[i].first_seen;
  });
  if (after == slot.begin()) return std::nullopt;
  return *std::prev(after);
}

std::optional<std::int64_t> ProcessForest::successor_start(std::size_t instance) const {
  const auto& inst = instances_.at(instance);
  const auto& slot = by_pid_.at({inst.host, inst.pid});
  auto it = std::find(slot.begin(), slot.end(), instance);
  if (++it == slot.end()) return std::nullopt;
  return instances_[*it].first_seen;
}

std::vector<std::size_t> ProcessForest::ancestors(std::size_t instance) const {
  std::vector<std::size_t> chain;
  auto cur = instances_.at(instance).parent;
  // Parents never start after children, but equal timestamps can still form
  // a loop through pid reuse; cap the walk at the forest size.
  while (cur && chain.size() < instances_.size()) {
    chain.push_back(*cur);
    cur = instances_[*cur].parent;
  }
  return chain;
}

Labeler::Labeler(const ProcessForest& forest, const GroundTruth& truth)
    : forest_(forest), truth_(truth) {
  for (std::size_t i = 0; i < truth.seeds.size(); ++i)
    seeds_by_pid_[{truth.seeds[i].host, truth.seeds[i].pid}].push_back(i);
}

bool Labeler::seed_covers(const SeedProcess& seed, std::optional<std::size_t> instance,
                          std::int64_t t) const {
  if (!instance) return within(t, seed.window_start, seed.window_end);
  const auto& inst = forest_.instances()[*instance];
  const auto next = forest_.successor_start(*instance);
  const bool overlaps = inst.first_seen <= seed.window_end && (!next || *next > seed.window_start);
  return overlaps && within(t, std::min(inst.first_seen, seed.window_start), seed.window_end);
}

bool Labeler::via_process(const RawEvent& event) const {
  if (!event.pid || seeds_by_pid_.empty()) return false;
  auto seeds_for = [&](std::int64_t pid) -> const std::vector<std::size_t>* {
    auto it = seeds_by_pid_.find({event.hostname, pid});
    return it == seeds_by_pid_.end() ? nullptr : &it->second;
  };

  const auto acting = forest_.resolve(event.hostname, *event.pid, event.timestamp);
  if (!acting) {
    // Process predates the capture; only a direct seed match is possible.
    if (const auto* seeds = seeds_for(*event.pid))
      for (std::size_t s : *seeds)
        if (seed_covers(truth_.seeds[s], std::nullopt, event.timestamp)) return true;
    return false;
  }

  std::vector<std::size_t> chain{*acting};
  const auto up = forest_.ancestors(*acting);
  chain.insert(chain.end(), up.begin(), up.end());
  for (std::size_t c : chain) {
    if (const auto* seeds = seeds_for(forest_.instances()[c].pid))
      for (std::size_t s : *seeds)
        if (seed_covers(truth_.seeds[s], c, event.timestamp)) return true;
  }

  // The root's parent may be a seed that predates the capture.
  const auto& root = forest_.instances()[chain.back()];
  if (!root.parent && root.ppid) {
    if (const auto* seeds = seeds_for(*root.ppid))
      for (std::size_t s : *seeds) {
        const auto& seed = truth_.seeds[s];
        if (within(root.first_seen, seed.window_start, seed.window_end) &&
            within(event.timestamp, seed.window_start, seed.window_end))
          return true;
      }
  }
  return false;
}

bool Labeler::via_network(const RawEvent& event) const {
  const std::string& ip = event[Field::kDestIp];
  const auto port = parse_int(event[Field::kDestPort]);
  for (const auto& rule : truth_.net_rules) {
    if (rule.host != event.hostname) continue;
    if (!within(event.timestamp, rule.window_start, rule.window_end)) continue;
    if (rule.ip_prefix && !ip.empty() && ip.compare(0, rule.ip_prefix->size(), *rule.ip_prefix) == 0)
      return true;
    if (rule.port && port && *rule.port == *port) return true;
  }
  return false;
}

Label Labeler::label(const RawEvent& event) const {
  return via_process(event) || via_network(event) ? Label::kMalicious : Label::kBenign;
}

std::vector<Label> label_events(std::span<const RawEvent> events, const ProcessForest& forest,
                                const GroundTruth& truth) {
  const Labeler labeler(forest, truth);
  std::vector<Label> labels;
  labels.reserve(events.size());
  for (const auto& ev : events) labels.push_back(labeler.label(ev));
  return labels;
}

}  // namespace logae
