#include "logae/commands.hpp"

#include <filesystem>
#include <fstream>

#include "logae/checkpoint.hpp"
#include "logae/labeler.hpp"

namespace logae {

namespace {

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

void write_file(const std::string& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed for " + path);
}

}  // namespace

SynthPaths synth_command(const ScenarioConfig& scenario, const std::string& out_dir, bool gzip) {
  return write_corpus(generate_corpus(scenario), out_dir, gzip);
}

CorpusCounters ingest_command(const std::string& input, const std::string& out,
                              const CorpusFilter& filter) {
  CorpusStream stream(input, filter, stderr_skip_sink(input));
  ensure_parent(out);
  std::ofstream os(out, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + out);
  while (auto event = stream.next()) os << to_canonical_json(*event) << '\n';
  if (!os) throw Error("write failed for " + out);
  return stream.counters();
}

CorpusCounters preprocess_command(const std::string& input, const std::string& out,
                                  const PreprocConfig& config, const CorpusFilter& filter) {
  config.validate();
  CorpusStream stream(input, filter, stderr_skip_sink(input));
  ensure_parent(out);
  TermStreamWriter writer(out);
  while (auto event = stream.next()) writer.write(tokenize(*event, config));
  writer.close();
  return stream.counters();
}

LabelSummary label_command(const std::string& input, const std::string& truth_path,
                           const std::string& out, const PreprocConfig& config,
                           const CorpusFilter& filter) {
  config.validate();
  const GroundTruth truth = GroundTruth::load(truth_path);
  CorpusStream stream(input, {}, stderr_skip_sink(input));
  std::vector<RawEvent> events;
  while (auto event = stream.next()) events.push_back(std::move(*event));

  const ProcessForest forest = ProcessForest::build(events);
  const std::vector<Label> labels = label_events(events, forest, truth);

  LabelSummary summary;
  summary.counters = stream.counters();
  summary.counters.yielded = 0;
  ensure_parent(out);
  TermStreamWriter writer(out);
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!filter.accepts(events[i])) {
      ++summary.counters.filtered;
      continue;
    }
    ++summary.counters.yielded;
    (labels[i] == Label::kMalicious ? summary.malicious : summary.benign) += 1;
    writer.write(tokenize(events[i], config, labels[i]));
  }
  writer.close();
  return summary;
}

Vocabulary build_vocab_command(const std::string& term_stream, const std::string& out,
                               std::uint64_t rare_floor) {
  TermStreamReader reader(term_stream);
  VocabularyBuilder builder;
  while (auto record = reader.next()) builder.add(record->terms);
  Vocabulary vocab = builder.build(rare_floor);
  ensure_parent(out);
  vocab.save(out);
  return vocab;
}

std::vector<TokenizedRecord> load_tokenized(const std::string& term_stream, const Vocabulary& vocab) {
  TermStreamReader reader(term_stream);
  std::vector<TokenizedRecord> out;
  while (auto record = reader.next()) out.push_back(index(*record, vocab));
  return out;
}

TrainResult train_command(const std::string& term_stream, const std::string& vocab_path,
                          ModelConfig config, const std::string& checkpoint_out,
                          const std::string& loss_history_out) {
  const Vocabulary vocab = Vocabulary::load(vocab_path);
  config.vocab_size = static_cast<int>(vocab.size());
  config.validate();
  const auto corpus = load_tokenized(term_stream, vocab);
  if (corpus.empty() && config.max_batches > 0) throw Error("train: " + term_stream + " holds no records");

  TrainResult result = train(corpus, vocab, config);
  ensure_parent(checkpoint_out);
  Checkpoint{config, vocab.checksum(), result.params}.save(checkpoint_out);
  if (!loss_history_out.empty()) write_file(loss_history_out, loss_history_csv(result.history));
  if (result.aborted) throw Error("train: stopped early (" + result.abort_reason + "); last good parameters saved");
  return result;
}

std::vector<ScoredRecord> score_command(const std::string& term_stream,
                                        const std::string& checkpoint_path,
                                        const std::string& vocab_path, ScoreMode mode,
                                        const std::string& out) {
  const Checkpoint ck = Checkpoint::load(checkpoint_path);
  const Vocabulary vocab = Vocabulary::load(vocab_path);
  if (ck.vocab_checksum != vocab.checksum())
    throw Error("score: vocabulary " + vocab_path + " (crc " + crc_hex(vocab.checksum()) +
                ") does not match the one " + checkpoint_path + " was trained with (crc " +
                crc_hex(ck.vocab_checksum) + ")");

  TermStreamReader reader(term_stream);
  std::vector<TokenizedRecord> records;
  while (auto record = reader.next()) records.push_back(index(*record, vocab));
  const auto scores = score_records(ck.params, records, vocab, ck.config.alpha, mode);

  std::vector<ScoredRecord> scored;
  scored.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    scored.push_back({scores[i], records[i].timestamp, records[i].hostname, records[i].label});
  write_file(out, scores_csv(scored));
  return scored;
}

ReportOutputs report_command(const std::string& test_scores, const std::string& train_scores,
                             const std::string& out_dir, const ReportConfig& config,
                             const std::optional<std::string>& checkpoint_path,
                             const std::optional<std::string>& vocab_path) {
  config.validate();
  if (checkpoint_path.has_value() != vocab_path.has_value())
    throw Error("report: embedding export needs both a checkpoint and a vocabulary");
  const auto test = load_scores(test_scores);
  const auto train_records = load_scores(train_scores);
  if (test.empty()) throw Error("report: " + test_scores + " holds no scores");
  if (train_records.empty()) throw Error("report: " + train_scores + " holds no scores");
  std::vector<double> train;
  train.reserve(train_records.size());
  for (const auto& r : train_records) train.push_back(r.score);

  ReportOutputs out;
  const auto grid = default_quantile_grid();
  out.thresholds = threshold_report(test, train, grid, config.train_quantile_percent);
  const double threshold = out.thresholds.training_row().threshold;
  out.temporal = temporal_series(test, threshold, config.temporal_bucket_minutes);
  out.histogram = histogram(test, config.histogram_bins, config.histogram_normalize);
  out.hosts = host_rates(test, threshold);

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  auto emit = [&](const char* name, const std::string& text) {
    const std::string path = (dir / name).string();
    write_file(path, text);
    out.files.push_back(path);
  };
  emit("thresholds.csv", out.thresholds.to_csv());
  emit("temporal.csv", out.temporal.to_csv());
  emit("histogram.csv", out.histogram.to_csv());
  emit("host_rates.csv", host_rates_csv(out.hosts));
  if (checkpoint_path) {
    const Checkpoint ck = Checkpoint::load(*checkpoint_path);
    const Vocabulary vocab = Vocabulary::load(*vocab_path);
    if (ck.vocab_checksum != vocab.checksum())
      throw Error("report: vocabulary " + *vocab_path + " does not match " + *checkpoint_path);
    emit("embeddings.tsv", embeddings_text(ck.params, vocab));
  }
  return out;
}

}  // namespace logae
