#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "logae/model.hpp"
#include "logae/preprocess.hpp"
#include "logae/vocab.hpp"

namespace logae {

using Params = ModelParams<double>;

// s_r = term weight of the record's lowest-count token. Non-positive values
// (e.g. an all-NULL record when NULL is every token) are raised to the
// smallest positive s in the corpus, or 1 if there is none.
std::vector<double> record_sampling_weights(std::span<const TokenizedRecord> corpus,
                                            const Vocabulary& vocab);

// Draws with replacement, P(r) proportional to its weight.
class BatchSampler {
 public:
  explicit BatchSampler(std::span<const double> weights);
  std::size_t draw(Rng& rng) const;
  std::vector<std::size_t> sample(Rng& rng, std::size_t batch_size) const;

 private:
  std::vector<double> cumulative_;
};

struct LossRow {
  std::int64_t batch_index = 0;  // 0 for the first batch, else batches completed
  double weighted_ce = 0;
  double recon = 0;  // unscaled squared reconstruction error
  double total = 0;  // weighted_ce + alpha * recon
};

struct TrainCallbacks {
  std::function<void(const LossRow&)> on_log;
  std::function<void(std::int64_t batches_done, const Params&)> on_checkpoint;
  std::int64_t checkpoint_every = 0;  // 0 disables periodic checkpoints
};

struct TrainResult {
  Params params;
  std::vector<LossRow> history;
  std::int64_t batches_run = 0;
  bool aborted = false;
  std::string abort_reason;
};

// Sample -> forward -> backward -> Adam, for config.max_batches batches.
// Gradients are batch means. History holds the batch-0 loss followed by the
// running mean of every log_every window. A non-finite loss or update stops
// training and returns the last parameters that completed a clean window.
TrainResult train(std::span<const TokenizedRecord> corpus, const Vocabulary& vocab,
                  const ModelConfig& config, const TrainCallbacks& callbacks = {});

// Parameters train() starts from for this config.
Params initial_params(const ModelConfig& config);

std::vector<double> score_records(const Params& params, std::span<const TokenizedRecord> records,
                                  const Vocabulary& vocab, double alpha, ScoreMode mode);

std::string loss_history_csv(std::span<const LossRow> history);

}  // namespace logae
