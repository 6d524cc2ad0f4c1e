#include "logae/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace logae {

std::vector<double> record_sampling_weights(std::span<const TokenizedRecord> corpus,
                                            const Vocabulary& vocab) {
  const std::vector<double> term_w = vocab.loss_weights();
  std::vector<double> weights(corpus.size());
  double min_positive = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    const auto& ids = corpus[r].token_ids;
    const TermIndex rarest = *std::min_element(ids.begin(), ids.end(), [&](TermIndex a, TermIndex b) {
      return vocab.count(a) < vocab.count(b);
    });
    weights[r] = term_w.at(static_cast<std::size_t>(rarest));
    if (weights[r] > 0) min_positive = std::min(min_positive, weights[r]);
  }
  const double floor = std::isfinite(min_positive) ? min_positive : 1.0;
  for (double& w : weights)
    if (!(w > 0)) w = floor;
  return weights;
}

BatchSampler::BatchSampler(std::span<const double> weights) {
  if (weights.empty()) throw Error("sampler: empty corpus");
  cumulative_.reserve(weights.size());
  double acc = 0;
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) throw Error("sampler: weights must be finite and >= 0");
    acc += w;
    cumulative_.push_back(acc);
  }
  if (!(acc > 0)) throw Error("sampler: all weights are zero");
}

std::size_t BatchSampler::draw(Rng& rng) const {
  const double u = uniform01(rng) * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                               cumulative_.size() - 1);
}

std::vector<std::size_t> BatchSampler::sample(Rng& rng, std::size_t batch_size) const {
  std::vector<std::size_t> out(batch_size);
  for (auto& i : out) i = draw(rng);
  return out;
}

Params initial_params(const ModelConfig& config) {
  Rng rng(config.seed);
  return Params::initialize(config, rng);
}

TrainResult train(std::span<const TokenizedRecord> corpus, const Vocabulary& vocab,
                  const ModelConfig& config, const TrainCallbacks& callbacks) {
  config.validate();
  if (static_cast<std::size_t>(config.vocab_size) != vocab.size())
    throw Error("train: config vocab_size does not match vocabulary");
  Rng rng(config.seed);
  TrainResult result;
  result.params = Params::initialize(config, rng);
  if (config.max_batches == 0) return result;
  if (corpus.empty()) throw Error("train: empty corpus");

  const auto weights = make_weights<double>(vocab.loss_weights());
  const auto sampling = record_sampling_weights(corpus, vocab);
  const BatchSampler sampler(sampling);
  AdamState<double> adam = AdamState<double>::like(result.params);
  Params grads = result.params;
  Params last_good = result.params;

  LossRow window{};
  std::int64_t window_batches = 0;
  auto emit = [&](const LossRow& row) {
    result.history.push_back(row);
    if (callbacks.on_log) callbacks.on_log(row);
  };

  const double inv_batch = 1.0 / config.batch_size;
  for (std::int64_t b = 0; b < config.max_batches; ++b) {
    LossRow batch{};
    try {
      grads.set_zero();
      for (std::size_t r : sampler.sample(rng, static_cast<std::size_t>(config.batch_size))) {
        const auto tr = forward(result.params, corpus[r].token_ids, weights, config.alpha);
        accumulate_gradients(result.params, tr, grads, inv_batch);
        batch.weighted_ce += tr.weighted_ce * inv_batch;
        batch.recon += tr.recon_error * inv_batch;
        batch.total += tr.total * inv_batch;
      }
      adam_step(result.params, grads, adam, config);
    } catch (const Error& e) {
      result.aborted = true;
      result.abort_reason = "batch " + std::to_string(b) + ": " + e.what();
      result.params = std::move(last_good);
      return result;
    }
    result.batches_run = b + 1;

    if (b == 0) emit({0, batch.weighted_ce, batch.recon, batch.total});
    window.weighted_ce += batch.weighted_ce;
    window.recon += batch.recon;
    window.total += batch.total;
    ++window_batches;
    const bool window_done = (b + 1) % config.log_every == 0 || b + 1 == config.max_batches;
    if (window_done) {
      const double n = static_cast<double>(window_batches);
      emit({b + 1, window.weighted_ce / n, window.recon / n, window.total / n});
      window = {};
      window_batches = 0;
      last_good = result.params;
    }
    if (callbacks.on_checkpoint && callbacks.checkpoint_every > 0 &&
        (b + 1) % callbacks.checkpoint_every == 0)
      callbacks.on_checkpoint(b + 1, result.params);
  }
  return result;
}

std::vector<double> score_records(const Params& params, std::span<const TokenizedRecord> records,
                                  const Vocabulary& vocab, double alpha, ScoreMode mode) {
  const auto weights = make_weights<double>(vocab.loss_weights());
  std::vector<double> out(records.size());
  // Records score independently; each thread owns a contiguous slice of out.
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
  const std::size_t chunk = (records.size() + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t begin = 0; begin < records.size(); begin += chunk) {
    const std::size_t end = std::min(records.size(), begin + chunk);
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i)
          out[i] = score(params, std::span<const TermIndex>(records[i].token_ids), weights, alpha, mode);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::string loss_history_csv(std::span<const LossRow> history) {
  std::string out = "batch_index,weighted_ce,recon,total\n";
  char buf[128];
  for (const auto& row : history) {
    std::snprintf(buf, sizeof buf, "%lld,%.10g,%.10g,%.10g\n", static_cast<long long>(row.batch_index),
                  row.weighted_ce, row.recon, row.total);
    out += buf;
  }
  return out;
}

}  // namespace logae
