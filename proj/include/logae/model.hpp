#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "logae/common.hpp"
#include "logae/vocab.hpp"

namespace logae {

struct ModelConfig {
  int embedding_dim = 8;  // per-term vector width
  int hidden_dim = 32;    // autoencoder code width
  double alpha = 5.0;     // scale on the squared reconstruction error
  int vocab_size = 0;
  int fields = 27;
  std::uint64_t seed = 1;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  std::int64_t max_batches = 200000;
  std::int64_t log_every = 1000;

  int input_dim() const { return fields * embedding_dim; }
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

using Rng = std::mt19937_64;

// Uniform [0, 1) from the raw 64-bit stream. Avoids std distributions, whose
// output is implementation-defined.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Complete trainable state. Gradients and Adam moments reuse this type.
template <typename Scalar>
struct ModelParams {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix embedding;         // |V| x d, shared across all fields
  Matrix encoder_weight;    // m x n, n = fields * d
  Vector encoder_bias;      // m
  Matrix decoder_weight;    // n x m
  Vector decoder_bias;      // n
  Matrix extractor_weight;  // |V| x d, shared across all field slices
  Vector extractor_bias;    // |V|

  static ModelParams zeros(const ModelConfig& config) {
    const int v = config.vocab_size, d = config.embedding_dim, m = config.hidden_dim;
    const int n = config.input_dim();
    ModelParams p;
    p.embedding = Matrix::Zero(v, d);
    p.encoder_weight = Matrix::Zero(m, n);
    p.encoder_bias = Vector::Zero(m);
    p.decoder_weight = Matrix::Zero(n, m);
    p.decoder_bias = Vector::Zero(n);
    p.extractor_weight = Matrix::Zero(v, d);
    p.extractor_bias = Vector::Zero(v);
    return p;
  }

  // Weights ~ U(-0.05, 0.05), biases zero. Draw order: embedding, encoder,
  // decoder, extractor, each column-major.
  static ModelParams initialize(const ModelConfig& config, Rng& rng) {
    ModelParams p = zeros(config);
    auto fill = [&](Matrix& w) {
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i)
          w(i, j) = static_cast<Scalar>(0.1 * uniform01(rng) - 0.05);
    };
    fill(p.embedding);
    fill(p.encoder_weight);
    fill(p.decoder_weight);
    fill(p.extractor_weight);
    return p;
  }

  int vocab_size() const { return static_cast<int>(embedding.rows()); }
  int embedding_dim() const { return static_cast<int>(embedding.cols()); }
  int hidden_dim() const { return static_cast<int>(encoder_weight.rows()); }
  int fields() const {
    return embedding.cols() == 0 ? 0 : static_cast<int>(encoder_weight.cols() / embedding.cols());
  }

  // Visits every tensor of each argument in declaration order:
  // f(name, a.tensor, b.tensor, ...). All arguments must share shapes.
  template <typename F, typename... Rest>
  static void zip(F&& f, ModelParams& first, Rest&... rest) {
    f("embedding", first.embedding, rest.embedding...);
    f("encoder_weight", first.encoder_weight, rest.encoder_weight...);
    f("encoder_bias", first.encoder_bias, rest.encoder_bias...);
    f("decoder_weight", first.decoder_weight, rest.decoder_weight...);
    f("decoder_bias", first.decoder_bias, rest.decoder_bias...);
    f("extractor_weight", first.extractor_weight, rest.extractor_weight...);
    f("extractor_bias", first.extractor_bias, rest.extractor_bias...);
  }
  template <typename F>
  void for_each_tensor(F&& f) {
    zip([&](std::string_view name, auto& t) { f(name, t); }, *this);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    const_cast<ModelParams&>(*this).for_each_tensor(
        [&](std::string_view name, const auto& t) { f(name, t); });
  }

  bool all_finite() const {
    bool ok = true;
    for_each_tensor([&](std::string_view, const auto& t) { ok = ok && t.allFinite(); });
    return ok;
  }

  void set_zero() {
    for_each_tensor([](std::string_view, auto& t) { t.setZero(); });
  }

  template <typename Other>
  ModelParams<Other> cast() const {
    ModelParams<Other> out;
    out.embedding = embedding.template cast<Other>();
    out.encoder_weight = encoder_weight.template cast<Other>();
    out.encoder_bias = encoder_bias.template cast<Other>();
    out.decoder_weight = decoder_weight.template cast<Other>();
    out.decoder_bias = decoder_bias.template cast<Other>();
    out.extractor_weight = extractor_weight.template cast<Other>();
    out.extractor_bias = extractor_bias.template cast<Other>();
    return out;
  }

  bool operator==(const ModelParams& o) const {
    return embedding == o.embedding && encoder_weight == o.encoder_weight &&
           encoder_bias == o.encoder_bias && decoder_weight == o.decoder_weight &&
           decoder_bias == o.decoder_bias && extractor_weight == o.extractor_weight &&
           extractor_bias == o.extractor_bias;
  }
};

// Everything the backward pass needs, plus the loss breakdown.
template <typename Scalar>
struct ForwardTrace {
  using Matrix = typename ModelParams<Scalar>::Matrix;
  using Vector = typename ModelParams<Scalar>::Vector;

  std::vector<TermIndex> tokens;
  Vector field_weights;   // w of each field's true term
  Vector record;          // concatenated embeddings
  Vector hidden;          // tanh code
  Vector reconstruction;  // decoder output
  Matrix probabilities;   // |V| x fields, column i = softmax for field i
  Vector field_ce;        // -ln p_i[y_i]
  Scalar alpha = 0;
  Scalar weighted_ce = 0;  // sum_i w_i * CE_i
  Scalar recon_error = 0;  // ||record - reconstruction||^2
  Scalar total = 0;        // weighted_ce + alpha * recon_error
};

template <typename Scalar>
using WeightVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
WeightVector<Scalar> make_weights(std::span<const double> weights) {
  WeightVector<Scalar> w(static_cast<Eigen::Index>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i) w(static_cast<Eigen::Index>(i)) = Scalar(weights[i]);
  return w;
}

template <typename Scalar>
ForwardTrace<Scalar> forward(const ModelParams<Scalar>& params, std::span<const TermIndex> tokens,
                             const WeightVector<Scalar>& term_weights, Scalar alpha) {
  using Matrix = typename ModelParams<Scalar>::Matrix;
  using Vector = typename ModelParams<Scalar>::Vector;
  const int d = params.embedding_dim();
  const int fields = params.fields();
  const int vocab = params.vocab_size();
  if (static_cast<int>(tokens.size()) != fields)
    throw Error("forward: expected " + std::to_string(fields) + " tokens, got " +
                std::to_string(tokens.size()));
  if (term_weights.size() != vocab) throw Error("forward: weight vector does not match vocabulary");

  ForwardTrace<Scalar> tr;
  tr.tokens.assign(tokens.begin(), tokens.end());
  tr.alpha = alpha;
  tr.field_weights.resize(fields);
  tr.record.resize(fields * d);
  for (int i = 0; i < fields; ++i) {
    const TermIndex y = tokens[static_cast<std::size_t>(i)];
    if (y < 0 || y >= vocab) throw Error("forward: token index " + std::to_string(y) + " out of range");
    tr.record.segment(i * d, d) = params.embedding.row(y).transpose();
    tr.field_weights(i) = term_weights(y);
  }

  tr.hidden = (params.encoder_weight * tr.record + params.encoder_bias).array().tanh().matrix();
  tr.reconstruction = params.decoder_weight * tr.hidden + params.decoder_bias;

  // Column i of the slice matrix is field i's d-wide piece of the reconstruction.
  const Eigen::Map<const Matrix> slices(tr.reconstruction.data(), d, fields);
  Matrix logits = params.extractor_weight * slices;
  logits.colwise() += params.extractor_bias;

  tr.probabilities.resize(vocab, fields);
  tr.field_ce.resize(fields);
  for (int i = 0; i < fields; ++i) {
    const Scalar top = logits.col(i).maxCoeff();
    const Vector shifted = (logits.col(i).array() - top).matrix();
    const Vector expd = shifted.array().exp().matrix();
    const Scalar z = expd.sum();
    tr.probabilities.col(i) = expd / z;
    tr.field_ce(i) = std::log(z) - shifted(tokens[static_cast<std::size_t>(i)]);
  }
  tr.weighted_ce = tr.field_weights.dot(tr.field_ce);
  tr.recon_error = (tr.record - tr.reconstruction).squaredNorm();
  tr.total = tr.weighted_ce + alpha * tr.recon_error;
  if (!std::isfinite(static_cast<double>(tr.total))) throw Error("forward: non-finite loss");
  return tr;
}

// Adds scale * d(total)/d(theta) into grads. Embedding rows of tokens that
// are absent from the record are left untouched.
template <typename Scalar>
void accumulate_gradients(const ModelParams<Scalar>& params, const ForwardTrace<Scalar>& tr,
                          ModelParams<Scalar>& grads, Scalar scale = Scalar(1)) {
  using Matrix = typename ModelParams<Scalar>::Matrix;
  using Vector = typename ModelParams<Scalar>::Vector;
  const int d = params.embedding_dim();
  const int fields = params.fields();

  // d(w_i * CE_i)/d(logits_i) = w_i * (p_i - onehot(y_i))
  Matrix logit_grad = tr.probabilities;
  for (int i = 0; i < fields; ++i) logit_grad(tr.tokens[static_cast<std::size_t>(i)], i) -= Scalar(1);
  logit_grad *= (tr.field_weights * scale).asDiagonal();

  const Eigen::Map<const Matrix> slices(tr.reconstruction.data(), d, fields);
  grads.extractor_weight.noalias() += logit_grad * slices.transpose();
  grads.extractor_bias.noalias() += logit_grad.rowwise().sum();

  const Vector diff = tr.record - tr.reconstruction;
  Vector recon_grad(fields * d);
  Eigen::Map<Matrix>(recon_grad.data(), d, fields).noalias() =
      params.extractor_weight.transpose() * logit_grad;
  recon_grad.noalias() -= (Scalar(2) * tr.alpha * scale) * diff;

  grads.decoder_weight.noalias() += recon_grad * tr.hidden.transpose();
  grads.decoder_bias.noalias() += recon_grad;

  const Vector pre_grad =
      ((params.decoder_weight.transpose() * recon_grad).array() *
       (Scalar(1) - tr.hidden.array().square()))
          .matrix();
  grads.encoder_weight.noalias() += pre_grad * tr.record.transpose();
  grads.encoder_bias.noalias() += pre_grad;

  Vector record_grad = params.encoder_weight.transpose() * pre_grad;
  record_grad.noalias() += (Scalar(2) * tr.alpha * scale) * diff;
  for (int i = 0; i < fields; ++i)
    grads.embedding.row(tr.tokens[static_cast<std::size_t>(i)]) +=
        record_grad.segment(i * d, d).transpose();
}

template <typename Scalar>
ModelParams<Scalar> backward(const ModelParams<Scalar>& params, const ForwardTrace<Scalar>& tr) {
  ModelParams<Scalar> grads = params;
  grads.set_zero();
  accumulate_gradients(params, tr, grads);
  if (!grads.all_finite()) throw Error("backward: non-finite gradient");
  return grads;
}

enum class ScoreMode { kCrossEntropy, kFull };

ScoreMode parse_score_mode(std::string_view text);
std::string_view to_string(ScoreMode mode);

// Anomaly score: weighted cross-entropy, plus alpha * recon in full mode.
template <typename Scalar>
Scalar score(const ModelParams<Scalar>& params, std::span<const TermIndex> tokens,
             const WeightVector<Scalar>& term_weights, Scalar alpha, ScoreMode mode) {
  const auto tr = forward(params, tokens, term_weights, alpha);
  return mode == ScoreMode::kFull ? tr.total : tr.weighted_ce;
}

template <typename Scalar>
struct AdamState {
  ModelParams<Scalar> first_moment;
  ModelParams<Scalar> second_moment;
  std::int64_t step = 0;

  static AdamState like(const ModelParams<Scalar>& params) {
    AdamState s{params, params, 0};
    s.first_moment.set_zero();
    s.second_moment.set_zero();
    return s;
  }
};

// One Adam update with bias correction (Kingma & Ba form).
template <typename Scalar>
void adam_step(ModelParams<Scalar>& params, ModelParams<Scalar>& grads, AdamState<Scalar>& state,
               const ModelConfig& config) {
  if (!grads.all_finite()) throw Error("adam: non-finite gradient");
  ++state.step;
  const Scalar b1 = Scalar(config.beta1), b2 = Scalar(config.beta2);
  const Scalar lr = Scalar(config.learning_rate), eps = Scalar(config.epsilon);
  const Scalar c1 = Scalar(1) - std::pow(b1, Scalar(state.step));
  const Scalar c2 = Scalar(1) - std::pow(b2, Scalar(state.step));
  ModelParams<Scalar>::zip(
      [&](std::string_view, auto& p, auto& g, auto& m, auto& v) {
        m = b1 * m + (Scalar(1) - b1) * g;
        v = b2 * v + (Scalar(1) - b2) * g.cwiseAbs2();
        p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
      },
      params, grads, state.first_moment, state.second_moment);
  if (!params.all_finite()) throw Error("adam: non-finite parameter after update");
}

}  // namespace logae
