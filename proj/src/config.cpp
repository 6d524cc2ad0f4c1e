#include "logae/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

namespace logae {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::int64_t as_int(const std::string& key, const std::string& v) {
  auto parsed = parse_int(v);
  if (!parsed) throw Error("config: '" + key + "' expects an integer, got '" + v + "'");
  return *parsed;
}

std::uint64_t as_count(const std::string& key, const std::string& v) {
  const auto n = as_int(key, v);
  if (n < 0) throw Error("config: '" + key + "' must be non-negative");
  return static_cast<std::uint64_t>(n);
}

double as_double(const std::string& key, const std::string& v) {
  auto parsed = parse_double(v);
  if (!parsed) throw Error("config: '" + key + "' expects a number, got '" + v + "'");
  return *parsed;
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error("config: '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<AttackWindow> as_windows(const std::string& key, const std::string& v) {
  std::vector<AttackWindow> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) throw Error("config: '" + key + "' entries look like start_ms-end_ms");
    out.push_back({as_int(key, trim(item.substr(0, dash))), as_int(key, trim(item.substr(dash + 1)))});
  }
  return out;
}

std::string windows_text(const std::vector<AttackWindow>& windows) {
  std::string out;
  for (const auto& w : windows) {
    if (!out.empty()) out += ';';
    out += std::to_string(w.start_ms) + "-" + std::to_string(w.end_ms);
  }
  return out;
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      {"seed", [](RunConfig& c, const std::string& v) { c.set_seed(as_count("seed", v)); },
       [](const RunConfig& c) { return std::to_string(c.model.seed); }},
      // preprocessing
      {"duration_medium_ms",
       [](RunConfig& c, const std::string& v) { c.preprocess.duration_medium_ms = as_int("duration_medium_ms", v); },
       [](const RunConfig& c) { return std::to_string(c.preprocess.duration_medium_ms); }},
      {"duration_large_ms",
       [](RunConfig& c, const std::string& v) { c.preprocess.duration_large_ms = as_int("duration_large_ms", v); },
       [](const RunConfig& c) { return std::to_string(c.preprocess.duration_large_ms); }},
      {"ephemeral_port_floor",
       [](RunConfig& c, const std::string& v) { c.preprocess.ephemeral_port_floor = as_int("ephemeral_port_floor", v); },
       [](const RunConfig& c) { return std::to_string(c.preprocess.ephemeral_port_floor); }},
      {"rare_term_floor",
       [](RunConfig& c, const std::string& v) { c.preprocess.rare_term_floor = as_count("rare_term_floor", v); },
       [](const RunConfig& c) { return std::to_string(c.preprocess.rare_term_floor); }},
      // model and optimizer
      {"embedding_dim",
       [](RunConfig& c, const std::string& v) { c.model.embedding_dim = static_cast<int>(as_int("embedding_dim", v)); },
       [](const RunConfig& c) { return std::to_string(c.model.embedding_dim); }},
      {"hidden_dim",
       [](RunConfig& c, const std::string& v) { c.model.hidden_dim = static_cast<int>(as_int("hidden_dim", v)); },
       [](const RunConfig& c) { return std::to_string(c.model.hidden_dim); }},
      {"alpha", [](RunConfig& c, const std::string& v) { c.model.alpha = as_double("alpha", v); },
       [](const RunConfig& c) { return fmt(c.model.alpha); }},
      {"learning_rate",
       [](RunConfig& c, const std::string& v) { c.model.learning_rate = as_double("learning_rate", v); },
       [](const RunConfig& c) { return fmt(c.model.learning_rate); }},
      {"beta1", [](RunConfig& c, const std::string& v) { c.model.beta1 = as_double("beta1", v); },
       [](const RunConfig& c) { return fmt(c.model.beta1); }},
      {"beta2", [](RunConfig& c, const std::string& v) { c.model.beta2 = as_double("beta2", v); },
       [](const RunConfig& c) { return fmt(c.model.beta2); }},
      {"epsilon", [](RunConfig& c, const std::string& v) { c.model.epsilon = as_double("epsilon", v); },
       [](const RunConfig& c) { return fmt(c.model.epsilon); }},
      {"batch_size",
       [](RunConfig& c, const std::string& v) { c.model.batch_size = static_cast<int>(as_int("batch_size", v)); },
       [](const RunConfig& c) { return std::to_string(c.model.batch_size); }},
      {"max_batches", [](RunConfig& c, const std::string& v) { c.model.max_batches = as_int("max_batches", v); },
       [](const RunConfig& c) { return std::to_string(c.model.max_batches); }},
      {"log_every", [](RunConfig& c, const std::string& v) { c.model.log_every = as_int("log_every", v); },
       [](const RunConfig& c) { return std::to_string(c.model.log_every); }},
      {"score_mode", [](RunConfig& c, const std::string& v) { c.score_mode = parse_score_mode(v); },
       [](const RunConfig& c) { return std::string(to_string(c.score_mode)); }},
      // synthetic scenario
      {"train_records",
       [](RunConfig& c, const std::string& v) { c.scenario.train_records = as_count("train_records", v); },
       [](const RunConfig& c) { return std::to_string(c.scenario.train_records); }},
      {"test_records",
       [](RunConfig& c, const std::string& v) { c.scenario.test_records = as_count("test_records", v); },
       [](const RunConfig& c) { return std::to_string(c.scenario.test_records); }},
      {"hosts", [](RunConfig& c, const std::string& v) { c.scenario.hosts = static_cast<int>(as_int("hosts", v)); },
       [](const RunConfig& c) { return std::to_string(c.scenario.hosts); }},
      {"attacked_hosts",
       [](RunConfig& c, const std::string& v) { c.scenario.attacked_hosts = static_cast<int>(as_int("attacked_hosts", v)); },
       [](const RunConfig& c) { return std::to_string(c.scenario.attacked_hosts); }},
      {"attack_fraction",
       [](RunConfig& c, const std::string& v) { c.scenario.attack_fraction = as_double("attack_fraction", v); },
       [](const RunConfig& c) { return fmt(c.scenario.attack_fraction); }},
      {"sweep_share", [](RunConfig& c, const std::string& v) { c.scenario.sweep_share = as_double("sweep_share", v); },
       [](const RunConfig& c) { return fmt(c.scenario.sweep_share); }},
      {"start_ms", [](RunConfig& c, const std::string& v) { c.scenario.start_ms = as_int("start_ms", v); },
       [](const RunConfig& c) { return std::to_string(c.scenario.start_ms); }},
      {"train_days",
       [](RunConfig& c, const std::string& v) { c.scenario.train_days = static_cast<int>(as_int("train_days", v)); },
       [](const RunConfig& c) { return std::to_string(c.scenario.train_days); }},
      {"test_days",
       [](RunConfig& c, const std::string& v) { c.scenario.test_days = static_cast<int>(as_int("test_days", v)); },
       [](const RunConfig& c) { return std::to_string(c.scenario.test_days); }},
      {"attack_windows",
       [](RunConfig& c, const std::string& v) { c.scenario.windows = as_windows("attack_windows", v); },
       [](const RunConfig& c) { return windows_text(c.scenario.windows); }},
      // reporting
      {"train_quantile_percent",
       [](RunConfig& c, const std::string& v) { c.report.train_quantile_percent = as_double("train_quantile_percent", v); },
       [](const RunConfig& c) { return fmt(c.report.train_quantile_percent); }},
      {"temporal_bucket_minutes",
       [](RunConfig& c, const std::string& v) {
         c.report.temporal_bucket_minutes = static_cast<int>(as_int("temporal_bucket_minutes", v));
       },
       [](const RunConfig& c) { return std::to_string(c.report.temporal_bucket_minutes); }},
      {"histogram_bins",
       [](RunConfig& c, const std::string& v) { c.report.histogram_bins = static_cast<int>(as_int("histogram_bins", v)); },
       [](const RunConfig& c) { return std::to_string(c.report.histogram_bins); }},
      {"histogram_normalize",
       [](RunConfig& c, const std::string& v) { c.report.histogram_normalize = as_bool("histogram_normalize", v); },
       [](const RunConfig& c) { return std::string(c.report.histogram_normalize ? "true" : "false"); }},
  };
  return k;
}

}  // namespace

void ReportConfig::validate() const {
  if (!(train_quantile_percent >= 0 && train_quantile_percent <= 100))
    throw Error("config: train_quantile_percent must lie in [0, 100]");
  if (temporal_bucket_minutes < 1) throw Error("config: temporal_bucket_minutes must be >= 1");
  if (histogram_bins < 1) throw Error("config: histogram_bins must be >= 1");
}

void RunConfig::set_seed(std::uint64_t seed) {
  model.seed = seed;
  scenario.seed = seed;
}

void RunConfig::validate() const {
  preprocess.validate();
  ModelConfig m = model;
  m.vocab_size = std::max(m.vocab_size, 2);  // the real size arrives with the vocabulary
  m.validate();
  scenario.validate();
  report.validate();
}

RunConfig parse_run_config(std::string_view text, RunConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::set<std::string> seen;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Key* match = nullptr;
    for (const auto& k : keys())
      if (key == k.name) match = &k;
    if (!match) throw Error("config line " + std::to_string(number) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw Error("config line " + std::to_string(number) + ": duplicate key '" + key + "'");
    match->set(base, value);
  }
  base.validate();
  return base;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str(), std::move(base));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string format_run_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(config) + "\n";
  return out;
}

}  // namespace logae
