#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentlab/corpus.hpp"
#include "sentlab/errors.hpp"
#include "sentlab/gru.hpp"
#include "sentlab/matrix.hpp"
#include "sentlab/nn.hpp"
#include "sentlab/rng.hpp"

namespace sentlab::model {

using corpus::ContextPair;
using corpus::SentenceIds;

enum class Arch { bow, rnn };

inline const char* arch_name(Arch a) { return a == Arch::bow ? "bow" : "rnn"; }

inline Arch arch_from_string(const std::string& s) {
  if (s == "bow") return Arch::bow;
  if (s == "rnn") return Arch::rnn;
  throw UsageError("unknown architecture '" + s + "' (expected bow|rnn)");
}

struct ModelConfig {
  Arch encoder = Arch::bow;
  Arch decoder = Arch::bow;
  uint32_t embed_dim = 64;
  uint32_t hidden_dim = 128;
  uint32_t vocab_size = 2000;
  uint32_t max_len = 30;
  uint64_t seed = 1;
  float learning_rate = 5e-4f;
  uint32_t batch_size = 64;
  uint32_t epochs = 5;
  bool softmax_bias = false;

  uint32_t encoder_out_dim() const {
    return encoder == Arch::rnn ? hidden_dim : embed_dim;
  }
  // rows of the output projection U live in this dimension
  uint32_t projection_dim() const {
    return decoder == Arch::rnn ? hidden_dim : encoder_out_dim();
  }
  bool needs_bridge() const {
    return decoder == Arch::rnn && encoder_out_dim() != hidden_dim;
  }

  void validate() const {
    if (embed_dim < 2 || hidden_dim < 2)
      throw UsageError("embed_dim and hidden_dim must be >= 2");
    if (vocab_size < corpus::kNumReserved + 1)
      throw UsageError("vocab_size must be >= 5");
    if (max_len < 2) throw UsageError("max_len must be >= 2");
    if (batch_size < 1) throw UsageError("batch_size must be >= 1");
    if (!(learning_rate > 0)) throw UsageError("learning_rate must be > 0");
  }

  bool operator==(const ModelConfig&) const = default;
};

// All trainable tensors of one encoder-decoder model. The embedding table
// feeds the encoder and both decoders; the output projection is separate.
template <class S>
struct Parameters {
  Matrix<S> embeddings;                  // V x d
  std::optional<GruParams<S>> enc;       // absent for the BOW encoder
  std::optional<GruParams<S>> dec_prev;  // absent for the BOW decoder
  std::optional<GruParams<S>> dec_next;
  Matrix<S> out_proj;                    // V x projection_dim
  std::vector<S> out_bias;               // V, only with softmax_bias
  std::optional<Matrix<S>> bridge;       // hidden x encoder_out, RNN decoder only
};

namespace detail {

template <class S, class Fn>
void visit_gru(const std::string& prefix, GruParams<S>& g, Fn&& fn) {
  auto mat = [&](const char* n, Matrix<S>& m) {
    fn(prefix + "." + n, std::span<S>(m.data),
       std::vector<uint32_t>{m.rows, m.cols});
  };
  auto vec = [&](const char* n, std::vector<S>& v) {
    fn(prefix + "." + n, std::span<S>(v), std::vector<uint32_t>{uint32_t(v.size())});
  };
  mat("W_z", g.w_z);
  mat("W_r", g.w_r);
  mat("W_h", g.w_h);
  mat("U_z", g.u_z);
  mat("U_r", g.u_r);
  mat("U_h", g.u_h);
  vec("g_Wz", g.g_wz);
  vec("g_Wr", g.g_wr);
  vec("g_Wh", g.g_wh);
  vec("g_Uz", g.g_uz);
  vec("g_Ur", g.g_ur);
  vec("g_Uh", g.g_uh);
  vec("b_z", g.b_z);
  vec("b_r", g.b_r);
  vec("b_h", g.b_h);
}

}  // namespace detail

// Visits every trainable tensor in a fixed canonical order; this order
// defines parameter flattening, Adam moment layout, and the checkpoint
// tensor directory.
template <class S, class Fn>
void for_each_tensor(Parameters<S>& p, Fn&& fn) {
  fn(std::string("E"), std::span<S>(p.embeddings.data),
     std::vector<uint32_t>{p.embeddings.rows, p.embeddings.cols});
  if (p.enc) detail::visit_gru("enc", *p.enc, fn);
  if (p.dec_prev) detail::visit_gru("dec_prev", *p.dec_prev, fn);
  if (p.dec_next) detail::visit_gru("dec_next", *p.dec_next, fn);
  fn(std::string("U"), std::span<S>(p.out_proj.data),
     std::vector<uint32_t>{p.out_proj.rows, p.out_proj.cols});
  if (!p.out_bias.empty())
    fn(std::string("U_b"), std::span<S>(p.out_bias),
       std::vector<uint32_t>{uint32_t(p.out_bias.size())});
  if (p.bridge)
    fn(std::string("bridge"), std::span<S>(p.bridge->data),
       std::vector<uint32_t>{p.bridge->rows, p.bridge->cols});
}

template <class S, class Fn>
void for_each_tensor(const Parameters<S>& p, Fn&& fn) {
  for_each_tensor(const_cast<Parameters<S>&>(p),
                  [&](const std::string& name, std::span<S> data,
                      std::vector<uint32_t> dims) {
                    fn(name, std::span<const S>(data), std::move(dims));
                  });
}

template <class S>
size_t parameter_count(const Parameters<S>& p) {
  size_t n = 0;
  for_each_tensor(p, [&](const std::string&, std::span<const S> d,
                         std::vector<uint32_t>) { n += d.size(); });
  return n;
}

template <class S>
std::vector<S> flatten(const Parameters<S>& p) {
  std::vector<S> out;
  out.reserve(parameter_count(p));
  for_each_tensor(p, [&](const std::string&, std::span<const S> d,
                         std::vector<uint32_t>) {
    out.insert(out.end(), d.begin(), d.end());
  });
  return out;
}

template <class S>
void unflatten(std::span<const S> flat, Parameters<S>& p) {
  size_t off = 0;
  for_each_tensor(p, [&](const std::string&, std::span<S> d,
                         std::vector<uint32_t>) {
    if (off + d.size() > flat.size())
      throw std::invalid_argument("unflatten: flat vector too short");
    std::copy(flat.begin() + off, flat.begin() + off + d.size(), d.begin());
    off += d.size();
  });
  if (off != flat.size())
    throw std::invalid_argument("unflatten: flat vector length mismatch");
}

// Allocates the tensor set for a config without touching any RNG.
template <class S>
Parameters<S> make_parameters(const ModelConfig& cfg) {
  cfg.validate();
  Parameters<S> p;
  p.embeddings = Matrix<S>(cfg.vocab_size, cfg.embed_dim);
  if (cfg.encoder == Arch::rnn)
    p.enc.emplace(cfg.embed_dim, cfg.hidden_dim);
  if (cfg.decoder == Arch::rnn) {
    p.dec_prev.emplace(cfg.embed_dim, cfg.hidden_dim);
    p.dec_next.emplace(cfg.embed_dim, cfg.hidden_dim);
  }
  p.out_proj = Matrix<S>(cfg.vocab_size, cfg.projection_dim());
  if (cfg.softmax_bias) p.out_bias.assign(cfg.vocab_size, S(0));
  if (cfg.needs_bridge())
    p.bridge.emplace(cfg.hidden_dim, cfg.encoder_out_dim());
  return p;
}

// Weight matrices i.i.d. uniform over [-0.1, 0.1), drawn row-major in
// canonical tensor order; layer-norm gains start at 1 and biases at 0.
template <class S>
Parameters<S> init_parameters(const ModelConfig& cfg, SeededRng& rng,
                              double lo = -0.1, double hi = 0.1) {
  Parameters<S> p = make_parameters<S>(cfg);
  fill_uniform(rng, std::span<S>(p.embeddings.data), lo, hi);
  if (p.enc) p.enc->init_weights(rng, lo, hi);
  if (p.dec_prev) p.dec_prev->init_weights(rng, lo, hi);
  if (p.dec_next) p.dec_next->init_weights(rng, lo, hi);
  fill_uniform(rng, std::span<S>(p.out_proj.data), lo, hi);
  if (p.bridge) fill_uniform(rng, std::span<S>(p.bridge->data), lo, hi);
  return p;
}

// Gradient sink: same tensor shapes, every entry zero (including the
// layer-norm gains, which init to 1 in real parameters).
template <class S>
Parameters<S> zeros_like(const ModelConfig& cfg) {
  Parameters<S> p = make_parameters<S>(cfg);
  for_each_tensor(p, [](const std::string&, std::span<S> d,
                        std::vector<uint32_t>) {
    std::fill(d.begin(), d.end(), S(0));
  });
  return p;
}

// ---------------------------------------------------------------------
// Encoders
// ---------------------------------------------------------------------

template <class S>
void check_ids(const Parameters<S>& p, const SentenceIds& s) {
  for (uint32_t i = 0; i < s.true_len; ++i)
    if (s.ids[i] >= p.embeddings.rows)
      throw std::invalid_argument("token id " + std::to_string(s.ids[i]) +
                                  " out of range");
}

// Sum of embedding rows over the non-PAD positions (EOS included).
template <class S>
std::vector<S> encode_bow(const Parameters<S>& p, const SentenceIds& s) {
  check_ids(p, s);
  std::vector<S> h(p.embeddings.cols, S(0));
  for (uint32_t i = 0; i < s.true_len; ++i)
    axpy(S(1), std::span<const S>(p.embeddings.row(s.ids[i])), std::span<S>(h));
  return h;
}

template <class S>
void encode_bow_backward(const SentenceIds& s, std::span<const S> dh,
                         Parameters<S>& grads) {
  for (uint32_t i = 0; i < s.true_len; ++i)
    axpy(S(1), dh, std::span<S>(grads.embeddings.row(s.ids[i])));
}

// GRU over the non-PAD embeddings from a zero state; the returned vector
// is the state after the final non-PAD token (EOS). PAD never enters the
// recurrence.
template <class S>
std::vector<S> encode_rnn(const Parameters<S>& p, const SentenceIds& s,
                          std::vector<GruStepCache<S>>* caches = nullptr) {
  if (!p.enc) throw std::invalid_argument("encode_rnn: model has BOW encoder");
  check_ids(p, s);
  std::vector<S> h(p.enc->hidden_dim(), S(0));
  if (caches) caches->clear();
  for (uint32_t t = 0; t < s.true_len; ++t) {
    GruStepCache<S>* c = nullptr;
    if (caches) {
      caches->emplace_back();
      c = &caches->back();
    }
    h = gru_step(*p.enc, std::span<const S>(p.embeddings.row(s.ids[t])),
                 std::span<const S>(h), c);
  }
  return h;
}

template <class S>
void encode_rnn_backward(const Parameters<S>& p, const SentenceIds& s,
                         const std::vector<GruStepCache<S>>& caches,
                         std::span<const S> dh_final, Parameters<S>& grads) {
  const uint32_t hd = p.enc->hidden_dim();
  std::vector<S> dh(dh_final.begin(), dh_final.end());
  std::vector<S> dh_prev(hd), dx(p.embeddings.cols);
  for (uint32_t t = s.true_len; t-- > 0;) {
    std::fill(dh_prev.begin(), dh_prev.end(), S(0));
    std::fill(dx.begin(), dx.end(), S(0));
    gru_step_backward(*p.enc, caches[t], std::span<const S>(dh), *grads.enc,
                      std::span<S>(dx), std::span<S>(dh_prev));
    axpy(S(1), std::span<const S>(dx),
         std::span<S>(grads.embeddings.row(s.ids[t])));
    dh = dh_prev;
  }
}

// ---------------------------------------------------------------------
// Decoder objectives
// ---------------------------------------------------------------------

inline size_t context_word_count(const SentenceIds& prev,
                                 const SentenceIds& next) {
  return size_t(prev.true_len) + size_t(next.true_len);
}

template <class S>
void output_logits(const Parameters<S>& p, std::span<const S> h,
                   std::span<S> logits) {
  matvec(p.out_proj, h, logits);
  if (!p.out_bias.empty())
    for (size_t i = 0; i < logits.size(); ++i) logits[i] += p.out_bias[i];
}

// Log-linear decoder: every context word is scored independently against
// the single sentence vector, so the total reduces to
//   |c| * logsumexp(U h) - sum_w count_w * (u_w . h).
template <class S>
double nll_bow_decoder(const Parameters<S>& p, std::span<const S> h,
                       const SentenceIds& prev, const SentenceIds& next) {
  if (h.size() != p.out_proj.cols)
    throw std::invalid_argument("nll_bow_decoder: dimension mismatch");
  std::vector<S> logits(p.out_proj.rows);
  output_logits(p, h, std::span<S>(logits));
  const double lse = log_sum_exp(std::span<const S>(logits));
  double nll = 0;
  for (const SentenceIds* s : {&prev, &next})
    for (uint32_t i = 0; i < s->true_len; ++i)
      nll += lse - double(logits[s->ids[i]]);
  return nll;
}

// Accumulates d(nll * scale) into grads and dh.
template <class S>
void nll_bow_decoder_backward(const Parameters<S>& p, std::span<const S> h,
                              const SentenceIds& prev, const SentenceIds& next,
                              double scale, Parameters<S>& grads,
                              std::span<S> dh) {
  const uint32_t v = p.out_proj.rows;
  std::vector<S> logits(v), probs(v);
  output_logits(p, h, std::span<S>(logits));
  softmax(std::span<const S>(logits), std::span<S>(probs));
  const double total = double(context_word_count(prev, next));
  std::vector<S> dlogits(v);
  for (uint32_t w = 0; w < v; ++w) dlogits[w] = S(scale * total * double(probs[w]));
  for (const SentenceIds* s : {&prev, &next})
    for (uint32_t i = 0; i < s->true_len; ++i) dlogits[s->ids[i]] -= S(scale);
  add_outer(grads.out_proj, std::span<const S>(dlogits), h);
  if (!grads.out_bias.empty())
    axpy(S(1), std::span<const S>(dlogits), std::span<S>(grads.out_bias));
  for (uint32_t w = 0; w < v; ++w) {
    auto row = p.out_proj.row(w);
    S dw = dlogits[w];
    for (uint32_t c = 0; c < p.out_proj.cols; ++c) dh[c] += dw * row[c];
  }
}

enum class Side { prev, next };

template <class S>
const GruParams<S>& decoder_params(const Parameters<S>& p, Side side) {
  const auto& d = side == Side::prev ? p.dec_prev : p.dec_next;
  if (!d) throw std::invalid_argument("model has no RNN decoder");
  return *d;
}

// Teacher-forced decoder states h^1..h^tau for one side. Step 1 reads the
// GO embedding; step t reads the embedding of the true word t-1. The
// initial state is bridge(h_enc) when a bridge is configured.
template <class S>
std::vector<std::vector<S>> decoder_states_teacher_forced(
    const Parameters<S>& p, Side side, std::span<const S> h_enc,
    const SentenceIds& target, std::vector<GruStepCache<S>>* caches = nullptr) {
  const GruParams<S>& dec = decoder_params(p, side);
  check_ids(p, target);
  std::vector<S> state(dec.hidden_dim());
  if (p.bridge) {
    if (h_enc.size() != p.bridge->cols)
      throw std::invalid_argument("decoder: encoder dim mismatch vs bridge");
    matvec(*p.bridge, h_enc, std::span<S>(state));
  } else {
    if (h_enc.size() != dec.hidden_dim())
      throw std::invalid_argument("decoder: encoder dim mismatch");
    std::copy(h_enc.begin(), h_enc.end(), state.begin());
  }
  if (caches) caches->clear();
  std::vector<std::vector<S>> states;
  states.reserve(target.true_len);
  for (uint32_t t = 0; t < target.true_len; ++t) {
    const uint32_t input_id = t == 0 ? corpus::kGoId : target.ids[t - 1];
    GruStepCache<S>* c = nullptr;
    if (caches) {
      caches->emplace_back();
      c = &caches->back();
    }
    state = gru_step(dec, std::span<const S>(p.embeddings.row(input_id)),
                     std::span<const S>(state), c);
    states.push_back(state);
  }
  return states;
}

// Sum of per-step softmax cross-entropies over the non-PAD targets of both
// context sentences, teacher-forced.
template <class S>
double nll_rnn_decoder(const Parameters<S>& p, std::span<const S> h0,
                       const SentenceIds& prev, const SentenceIds& next) {
  double nll = 0;
  std::vector<S> logits(p.out_proj.rows);
  for (Side side : {Side::prev, Side::next}) {
    const SentenceIds& target = side == Side::prev ? prev : next;
    auto states = decoder_states_teacher_forced(p, side, h0, target);
    for (uint32_t t = 0; t < target.true_len; ++t) {
      output_logits(p, std::span<const S>(states[t]), std::span<S>(logits));
      nll += log_sum_exp(std::span<const S>(logits)) -
             double(logits[target.ids[t]]);
    }
  }
  return nll;
}

// Backward of (nll * scale) for one side; adds the gradient w.r.t. the
// encoder output into dh_enc.
template <class S>
void nll_rnn_decoder_side_backward(const Parameters<S>& p, Side side,
                                   std::span<const S> h_enc,
                                   const SentenceIds& target, double scale,
                                   Parameters<S>& grads,
                                   std::span<S> dh_enc) {
  const GruParams<S>& dec = decoder_params(p, side);
  GruParams<S>& gdec = side == Side::prev ? *grads.dec_prev : *grads.dec_next;
  const uint32_t v = p.out_proj.rows;
  const uint32_t hd = dec.hidden_dim();

  std::vector<GruStepCache<S>> caches;
  auto states = decoder_states_teacher_forced(p, side, h_enc, target, &caches);

  // per-step cross-entropy gradients into the states
  std::vector<std::vector<S>> dstates(target.true_len,
                                      std::vector<S>(hd, S(0)));
  std::vector<S> logits(v), probs(v), dlogits(v);
  for (uint32_t t = 0; t < target.true_len; ++t) {
    output_logits(p, std::span<const S>(states[t]), std::span<S>(logits));
    softmax(std::span<const S>(logits), std::span<S>(probs));
    for (uint32_t w = 0; w < v; ++w) dlogits[w] = S(scale * double(probs[w]));
    dlogits[target.ids[t]] -= S(scale);
    add_outer(grads.out_proj, std::span<const S>(dlogits),
              std::span<const S>(states[t]));
    if (!grads.out_bias.empty())
      axpy(S(1), std::span<const S>(dlogits), std::span<S>(grads.out_bias));
    for (uint32_t w = 0; w < v; ++w) {
      auto row = p.out_proj.row(w);
      S dw = dlogits[w];
      for (uint32_t c = 0; c < hd; ++c) dstates[t][c] += dw * row[c];
    }
  }

  // backpropagation through time
  std::vector<S> dh = dstates.empty() ? std::vector<S>(hd, S(0))
                                      : std::move(dstates.back());
  std::vector<S> dh_prev(hd), dx(p.embeddings.cols);
  for (uint32_t t = target.true_len; t-- > 0;) {
    std::fill(dh_prev.begin(), dh_prev.end(), S(0));
    std::fill(dx.begin(), dx.end(), S(0));
    gru_step_backward(dec, caches[t], std::span<const S>(dh), gdec,
                      std::span<S>(dx), std::span<S>(dh_prev));
    const uint32_t input_id = t == 0 ? corpus::kGoId : target.ids[t - 1];
    axpy(S(1), std::span<const S>(dx),
         std::span<S>(grads.embeddings.row(input_id)));
    if (t > 0) {
      axpy(S(1), std::span<const S>(dstates[t - 1]), std::span<S>(dh_prev));
    }
    dh = dh_prev;
  }

  // dh now holds the gradient w.r.t. the decoder's initial state
  if (p.bridge) {
    add_outer(*grads.bridge, std::span<const S>(dh), h_enc);
    for (uint32_t r = 0; r < p.bridge->rows; ++r) {
      auto row = p.bridge->row(r);
      S dr = dh[r];
      for (uint32_t c = 0; c < p.bridge->cols; ++c) dh_enc[c] += dr * row[c];
    }
  } else {
    axpy(S(1), std::span<const S>(dh), dh_enc);
  }
}

// ---------------------------------------------------------------------
// Per-word likelihood decomposition: for one context word w with score
// x = exp(u_w . h) against the rest of the vocabulary y = sum_{w' != w}
// exp(u_w' . h), the per-word log-likelihood is q = log x - log(x + y).
// ---------------------------------------------------------------------

struct NllParts {
  double x = 0;  // exp(u_w . h)
  double y = 0;  // sum over the other words
  double q = 0;  // log x - log(x + y), always negative
};

struct NllPartsDerivs {
  double q = 0;
  double dq_dx = 0;  // y / (x (x + y)) > 0
  double dq_dy = 0;  // -1 / (x + y) < 0
};

inline NllPartsDerivs nll_parts_derivatives(double x, double y) {
  if (!(x > 0) || !(y > 0))
    throw std::invalid_argument("nll_parts_derivatives: x and y must be > 0");
  NllPartsDerivs d;
  d.q = std::log(x) - std::log(x + y);
  d.dq_dx = y / (x * (x + y));
  d.dq_dy = -1.0 / (x + y);
  return d;
}

inline NllParts nll_parts_from_logits(std::span<const double> logits,
                                      size_t target) {
  if (target >= logits.size())
    throw std::invalid_argument("nll_parts_from_logits: target out of range");
  NllParts p;
  p.x = std::exp(logits[target]);
  for (size_t i = 0; i < logits.size(); ++i)
    if (i != target) p.y += std::exp(logits[i]);
  p.q = logits[target] - log_sum_exp(logits);
  return p;
}

// ---------------------------------------------------------------------
// Batch loss
// ---------------------------------------------------------------------

template <class S>
struct BatchLoss {
  double nll_per_word = 0;  // mean over all context words in the batch
  size_t context_words = 0;
  Parameters<S> grads;
};

template <class S>
double pair_nll_forward_backward(const Parameters<S>& p,
                                 const ModelConfig& cfg,
                                 const ContextPair& pair, double scale,
                                 Parameters<S>& grads) {
  // encode
  std::vector<GruStepCache<S>> enc_caches;
  std::vector<S> h = cfg.encoder == Arch::rnn
                         ? encode_rnn(p, pair.centre, &enc_caches)
                         : encode_bow(p, pair.centre);

  double nll = 0;
  std::vector<S> dh(h.size(), S(0));
  if (cfg.decoder == Arch::bow) {
    nll = nll_bow_decoder(p, std::span<const S>(h), pair.prev, pair.next);
    nll_bow_decoder_backward(p, std::span<const S>(h), pair.prev, pair.next,
                             scale, grads, std::span<S>(dh));
  } else {
    nll = nll_rnn_decoder(p, std::span<const S>(h), pair.prev, pair.next);
    for (Side side : {Side::prev, Side::next})
      nll_rnn_decoder_side_backward(
          p, side, std::span<const S>(h),
          side == Side::prev ? pair.prev : pair.next, scale, grads,
          std::span<S>(dh));
  }

  if (cfg.encoder == Arch::rnn)
    encode_rnn_backward(p, pair.centre, enc_caches, std::span<const S>(dh),
                        grads);
  else
    encode_bow_backward(pair.centre, std::span<const S>(dh), grads);
  return nll;
}

// Mean per-context-word negative log-likelihood over the batch, with
// gradients for every trainable tensor.
template <class S>
BatchLoss<S> loss_batch(const Parameters<S>& p, const ModelConfig& cfg,
                        std::span<const ContextPair> batch) {
  if (batch.empty()) throw std::invalid_argument("loss_batch: empty batch");
  BatchLoss<S> out;
  out.grads = zeros_like<S>(cfg);
  for (const auto& pair : batch)
    out.context_words += context_word_count(pair.prev, pair.next);
  const double scale = 1.0 / double(out.context_words);
  double total = 0;
  for (size_t i = 0; i < batch.size(); ++i) {
    double nll = pair_nll_forward_backward(p, cfg, batch[i], scale, out.grads);
    if (!std::isfinite(nll))
      throw NumericError("loss_batch: non-finite loss at batch element " +
                         std::to_string(i));
    total += nll;
  }
  out.nll_per_word = total * scale;
  return out;
}

}  // namespace sentlab::model
