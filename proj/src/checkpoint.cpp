#include "logae/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace logae {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_le(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xff));
    bits >>= 8;
  }
}

double get_le(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(p[i]);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string Checkpoint::serialize() const {
  std::string payload;
  params.for_each_tensor([&](std::string_view, const auto& t) {
    for (Eigen::Index i = 0; i < t.rows(); ++i)
      for (Eigen::Index j = 0; j < t.cols(); ++j) put_le(payload, t(i, j));
  });

  std::ostringstream os;
  os << "logae-checkpoint " << kFormatVersion << '\n'
     << "embedding_dim=" << config.embedding_dim << '\n'
     << "hidden_dim=" << config.hidden_dim << '\n'
     << "alpha=" << fmt_double(config.alpha) << '\n'
     << "vocab_size=" << config.vocab_size << '\n'
     << "fields=" << config.fields << '\n'
     << "seed=" << config.seed << '\n'
     << "learning_rate=" << fmt_double(config.learning_rate) << '\n'
     << "beta1=" << fmt_double(config.beta1) << '\n'
     << "beta2=" << fmt_double(config.beta2) << '\n'
     << "epsilon=" << fmt_double(config.epsilon) << '\n'
     << "batch_size=" << config.batch_size << '\n'
     << "max_batches=" << config.max_batches << '\n'
     << "log_every=" << config.log_every << '\n'
     << "vocab_crc=" << crc_hex(vocab_checksum) << '\n'
     << "payload_bytes=" << payload.size() << '\n'
     << "payload_crc=" << crc_hex(crc32_of(payload)) << '\n'
     << "end\n";
  return os.str() + payload;
}

Checkpoint Checkpoint::deserialize(std::string_view bytes) {
  const auto end_pos = bytes.find("\nend\n");
  if (end_pos == std::string_view::npos) throw Error("checkpoint: truncated header");
  const std::string_view header = bytes.substr(0, end_pos + 1);
  const std::string_view payload = bytes.substr(end_pos + 5);

  std::map<std::string, std::string, std::less<>> kv;
  std::istringstream hs{std::string(header)};
  std::string line;
  std::getline(hs, line);
  if (line != "logae-checkpoint " + std::to_string(kFormatVersion)) {
    if (line.rfind("logae-checkpoint ", 0) == 0)
      throw Error("checkpoint: unsupported format version '" + line.substr(17) + "'");
    throw Error("checkpoint: not a checkpoint file");
  }
  while (std::getline(hs, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("checkpoint: malformed header line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](std::string_view key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error("checkpoint: missing header key '" + std::string(key) + "'");
    return it->second;
  };
  auto get_int = [&](std::string_view key) {
    auto v = parse_int(get(key));
    if (!v) throw Error("checkpoint: bad integer for '" + std::string(key) + "'");
    return *v;
  };
  auto get_double = [&](std::string_view key) {
    auto v = parse_double(get(key));
    if (!v) throw Error("checkpoint: bad number for '" + std::string(key) + "'");
    return *v;
  };

  Checkpoint ck;
  ck.config.embedding_dim = static_cast<int>(get_int("embedding_dim"));
  ck.config.hidden_dim = static_cast<int>(get_int("hidden_dim"));
  ck.config.alpha = get_double("alpha");
  ck.config.vocab_size = static_cast<int>(get_int("vocab_size"));
  ck.config.fields = static_cast<int>(get_int("fields"));
  ck.config.seed = static_cast<std::uint64_t>(get_int("seed"));
  ck.config.learning_rate = get_double("learning_rate");
  ck.config.beta1 = get_double("beta1");
  ck.config.beta2 = get_double("beta2");
  ck.config.epsilon = get_double("epsilon");
  ck.config.batch_size = static_cast<int>(get_int("batch_size"));
  ck.config.max_batches = get_int("max_batches");
  ck.config.log_every = get_int("log_every");
  ck.config.validate();
  const std::string& vcrc = get("vocab_crc");
  ck.vocab_checksum = static_cast<std::uint32_t>(std::stoul(vcrc, nullptr, 16));

  if (static_cast<std::int64_t>(payload.size()) != get_int("payload_bytes"))
    throw Error("checkpoint: payload size mismatch (truncated file?)");
  if (crc_hex(crc32_of(payload)) != get("payload_crc")) throw Error("checkpoint: payload checksum mismatch");

  ck.params = ModelParams<double>::zeros(ck.config);
  std::size_t expected = 0;
  ck.params.for_each_tensor([&](std::string_view, const auto& t) { expected += t.size() * 8; });
  if (expected != payload.size()) throw Error("checkpoint: payload does not match declared shapes");
  const char* p = payload.data();
  ck.params.for_each_tensor([&](std::string_view, auto& t) {
    for (Eigen::Index i = 0; i < t.rows(); ++i)
      for (Eigen::Index j = 0; j < t.cols(); ++j, p += 8) t(i, j) = get_le(p);
  });
  return ck;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << serialize();
  if (!out) throw Error("write failed for " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
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

}  // namespace logae
