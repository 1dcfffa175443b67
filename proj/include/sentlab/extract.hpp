#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentlab/errors.hpp"
#include "sentlab/mlp.hpp"
#include "sentlab/model.hpp"

namespace sentlab::extract {

using corpus::SentenceIds;
using model::ModelConfig;
using model::Parameters;
using model::Side;

enum class ReprKind { encoder, rnn_concat, rnn_mean };

enum class SimilarityKind { dot, cosine };

// Which vectors to extract for a sentence. Dot product is the similarity
// the training objective optimises in each of these spaces, so every spec
// declares it as the optimal measure.
struct ReprSpec {
  ReprKind kind = ReprKind::encoder;
  uint32_t unroll_steps = 1;  // n, for the rnn_* kinds

  static SimilarityKind optimal_similarity() { return SimilarityKind::dot; }

  void validate(const ModelConfig& cfg) const {
    if (kind == ReprKind::encoder) return;
    if (cfg.decoder != model::Arch::rnn)
      throw UsageError("representation '" + to_string() +
                       "' requires an RNN decoder");
    if (unroll_steps < 1 || unroll_steps > cfg.max_len)
      throw UsageError("unroll steps must be in [1, max_len]");
  }

  uint32_t dim(const ModelConfig& cfg) const {
    switch (kind) {
      case ReprKind::encoder: return cfg.encoder_out_dim();
      case ReprKind::rnn_concat: return 2 * unroll_steps * cfg.hidden_dim;
      case ReprKind::rnn_mean: return 2 * cfg.hidden_dim;
    }
    return 0;
  }

  std::string to_string() const {
    switch (kind) {
      case ReprKind::encoder: return "encoder";
      case ReprKind::rnn_concat:
        return "concat:" + std::to_string(unroll_steps);
      case ReprKind::rnn_mean: return "mean:" + std::to_string(unroll_steps);
    }
    return "?";
  }

  static ReprSpec parse(const std::string& s) {
    ReprSpec spec;
    if (s == "encoder") {
      spec.kind = ReprKind::encoder;
      return spec;
    }
    auto colon = s.find(':');
    const std::string head = s.substr(0, colon);
    if (head == "concat")
      spec.kind = ReprKind::rnn_concat;
    else if (head == "mean")
      spec.kind = ReprKind::rnn_mean;
    else
      throw UsageError("unknown representation spec '" + s +
                       "' (expected encoder|concat:N|mean:N)");
    if (colon == std::string::npos)
      throw UsageError("spec '" + s + "' is missing its unroll count");
    try {
      spec.unroll_steps = uint32_t(std::stoul(s.substr(colon + 1)));
    } catch (const std::exception&) {
      throw UsageError("bad unroll count in spec '" + s + "'");
    }
    return spec;
  }

  bool operator==(const ReprSpec&) const = default;
};

inline const char* similarity_name(SimilarityKind k) {
  return k == SimilarityKind::dot ? "dot" : "cosine";
}

inline SimilarityKind similarity_from_string(const std::string& s) {
  if (s == "dot") return SimilarityKind::dot;
  if (s == "cosine") return SimilarityKind::cosine;
  throw UsageError("unknown similarity '" + s + "' (expected dot|cosine)");
}

template <class S>
struct UnrolledStates {
  std::vector<std::vector<S>> states;  // h^1..h^n, each hidden_dim
};

// Inference-time unrolling of one decoder: start from bridge(h0) (or h0),
// feed the GO embedding, then at every subsequent step feed the
// probability-weighted mean of the embedding rows under the predicted
// word distribution.
template <class S>
UnrolledStates<S> unroll_decoder(const Parameters<S>& p,
                                 const ModelConfig& cfg, Side side,
                                 std::span<const S> h0, uint32_t n) {
  if (n < 1 || n > cfg.max_len)
    throw UsageError("unroll_decoder: n out of range [1, max_len]");
  const GruParams<S>& dec = model::decoder_params(p, side);
  std::vector<S> state(dec.hidden_dim());
  if (p.bridge)
    matvec(*p.bridge, h0, std::span<S>(state));
  else if (h0.size() == dec.hidden_dim())
    std::copy(h0.begin(), h0.end(), state.begin());
  else
    throw std::invalid_argument("unroll_decoder: h0 dimension mismatch");

  UnrolledStates<S> out;
  out.states.reserve(n);
  std::vector<S> input(p.embeddings.row(corpus::kGoId).begin(),
                       p.embeddings.row(corpus::kGoId).end());
  std::vector<S> logits(p.out_proj.rows), probs(p.out_proj.rows);
  for (uint32_t t = 0; t < n; ++t) {
    state = gru_step(dec, std::span<const S>(input), std::span<const S>(state));
    out.states.push_back(state);
    if (t + 1 < n) {
      model::output_logits(p, std::span<const S>(state), std::span<S>(logits));
      softmax(std::span<const S>(logits), std::span<S>(probs));
      matvec_t(p.embeddings, std::span<const S>(probs), std::span<S>(input));
    }
  }
  return out;
}

template <class S>
struct SentenceEmbedding {
  std::vector<S> values;
  ReprSpec spec;
  std::string fingerprint;  // producing model, filled by callers that know it
};

template <class S>
std::vector<S> encoder_output(const Parameters<S>& p, const ModelConfig& cfg,
                              const SentenceIds& sentence) {
  return cfg.encoder == model::Arch::rnn ? model::encode_rnn(p, sentence)
                                         : model::encode_bow(p, sentence);
}

template <class S>
SentenceEmbedding<S> embed(const Parameters<S>& p, const ModelConfig& cfg,
                           const SentenceIds& sentence, const ReprSpec& spec) {
  spec.validate(cfg);
  SentenceEmbedding<S> out;
  out.spec = spec;
  std::vector<S> h = encoder_output(p, cfg, sentence);
  if (spec.kind == ReprKind::encoder) {
    out.values = std::move(h);
    return out;
  }
  const uint32_t n = spec.unroll_steps;
  const uint32_t hd = cfg.hidden_dim;
  for (Side side : {Side::prev, Side::next}) {
    UnrolledStates<S> u = unroll_decoder(p, cfg, side, std::span<const S>(h), n);
    if (spec.kind == ReprKind::rnn_concat) {
      for (const auto& st : u.states)
        out.values.insert(out.values.end(), st.begin(), st.end());
    } else {
      std::vector<double> mean(hd, 0.0);
      for (const auto& st : u.states)
        for (uint32_t i = 0; i < hd; ++i) mean[i] += double(st[i]);
      for (uint32_t i = 0; i < hd; ++i)
        out.values.push_back(S(mean[i] / double(n)));
    }
  }
  return out;
}

// Sum of the output-projection rows of every non-PAD context word; the
// objective drives the encoder output towards this vector under dot
// product.
template <class S>
std::vector<S> context_repr_bow(const Parameters<S>& p, const ModelConfig& cfg,
                                const SentenceIds& prev,
                                const SentenceIds& next) {
  if (cfg.decoder != model::Arch::bow)
    throw UsageError("context_repr_bow requires a BOW decoder");
  std::vector<S> c(p.out_proj.cols, S(0));
  for (const SentenceIds* s : {&prev, &next})
    for (uint32_t i = 0; i < s->true_len; ++i)
      axpy(S(1), std::span<const S>(p.out_proj.row(s->ids[i])), std::span<S>(c));
  return c;
}

// Ordered concatenation of the output-projection rows of the context
// words, prev targets then next targets, zero blocks past each context's
// length so that dot products against padded state concatenations ignore
// the tail.
template <class S>
std::vector<S> context_repr_concat(const Parameters<S>& p,
                                   const ModelConfig& cfg,
                                   const SentenceIds& prev,
                                   const SentenceIds& next, uint32_t n) {
  if (cfg.decoder != model::Arch::rnn)
    throw UsageError("context_repr_concat requires an RNN decoder");
  if (n < std::max(prev.true_len, next.true_len))
    throw UsageError("context_repr_concat: n shorter than a context target");
  std::vector<S> c;
  c.reserve(size_t(2) * n * p.out_proj.cols);
  for (const SentenceIds* s : {&prev, &next}) {
    for (uint32_t t = 0; t < n; ++t) {
      if (t < s->true_len) {
        auto row = p.out_proj.row(s->ids[t]);
        c.insert(c.end(), row.begin(), row.end());
      } else {
        c.insert(c.end(), p.out_proj.cols, S(0));
      }
    }
  }
  return c;
}

// Teacher-forced decoder states for both sides, zero-padded to n states
// each and concatenated prev-then-next; the dot-product partner of
// context_repr_concat.
template <class S>
std::vector<S> teacher_forced_state_concat(const Parameters<S>& p,
                                           const ModelConfig& cfg,
                                           std::span<const S> h_enc,
                                           const SentenceIds& prev,
                                           const SentenceIds& next,
                                           uint32_t n) {
  std::vector<S> out;
  out.reserve(size_t(2) * n * cfg.hidden_dim);
  for (Side side : {Side::prev, Side::next}) {
    const SentenceIds& target = side == Side::prev ? prev : next;
    auto states = model::decoder_states_teacher_forced(p, side, h_enc, target);
    for (uint32_t t = 0; t < n; ++t) {
      if (t < states.size())
        out.insert(out.end(), states[t].begin(), states[t].end());
      else
        out.insert(out.end(), cfg.hidden_dim, S(0));
    }
  }
  return out;
}

// Split-point check on the feed-forward classifier: the class score
// u_y . F_n(G_k(x)) must not depend on k, and its gap to the conditional
// log-probability must be the same constant (-logsumexp of the logits)
// for every class.
template <class S>
struct LayerSplitCheck {
  double rho = 0;           // class score through the split
  double log_prob_gap = 0;  // log P(y|x) - rho
};

template <class S>
LayerSplitCheck<S> verify_layer_split(const MlpClassifier<S>& m,
                                      std::span<const S> x, uint32_t y,
                                      uint32_t k) {
  MlpSplit<S> split = mlp_forward_split(m, x, k);
  if (y >= split.logits.size())
    throw std::invalid_argument("verify_layer_split: class out of range");
  LayerSplitCheck<S> out;
  out.rho = double(split.logits[y]);
  // log P through the normalised distribution, not through the identity
  // being checked
  const auto probs = softmax(std::span<const S>(split.logits));
  const double log_p = std::log(double(probs[y]));
  out.log_prob_gap = log_p - out.rho;  // should be -logsumexp for every y, k
  return out;
}

}  // namespace sentlab::extract
