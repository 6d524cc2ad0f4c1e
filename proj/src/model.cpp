#include "logae/model.hpp"

namespace logae {

void ModelConfig::validate() const {
  if (embedding_dim < 2) throw Error("model: embedding_dim must be >= 2");
  if (hidden_dim < 1) throw Error("model: hidden_dim must be >= 1");
  if (fields < 1) throw Error("model: fields must be >= 1");
  if (hidden_dim >= input_dim())
    throw Error("model: hidden_dim must be smaller than fields * embedding_dim");
  if (!(alpha >= 0)) throw Error("model: alpha must be >= 0");
  if (vocab_size < 2) throw Error("model: vocab_size must be >= 2");
  if (!(learning_rate > 0)) throw Error("model: learning_rate must be > 0");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1))
    throw Error("model: adam betas must lie in [0, 1)");
  if (!(epsilon > 0)) throw Error("model: epsilon must be > 0");
  if (batch_size < 1) throw Error("model: batch_size must be >= 1");
  if (max_batches < 0) throw Error("model: max_batches must be >= 0");
  if (log_every < 1) throw Error("model: log_every must be >= 1");
}

ScoreMode parse_score_mode(std::string_view text) {
  if (text == "ce") return ScoreMode::kCrossEntropy;
  if (text == "full") return ScoreMode::kFull;
  throw Error("unknown score mode '" + std::string(text) + "' (expected ce or full)");
}

std::string_view to_string(ScoreMode mode) {
  return mode == ScoreMode::kFull ? "full" : "ce";
}

}  // namespace logae
