#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "sentlab/matrix.hpp"
#include "sentlab/rng.hpp"

namespace sentlab {

// Small feed-forward softmax classifier used to demonstrate that the
// composed forward pass does not depend on where the network is split:
// activations after layer k, pushed through the remaining layers and the
// output projection, give the same logits for every k.
//
// Forward: a_0 = x, a_i = tanh(L_i a_{i-1}), logits = U_cls a_n.
template <class S>
struct MlpClassifier {
  std::vector<Matrix<S>> layers;  // L_1..L_n
  Matrix<S> u_cls;                // classes x dim(a_n)

  MlpClassifier() = default;
  MlpClassifier(const std::vector<uint32_t>& dims, uint32_t n_classes,
                SeededRng& rng, double lo = -0.5, double hi = 0.5) {
    if (dims.empty()) throw std::invalid_argument("MlpClassifier: no dims");
    for (size_t i = 0; i + 1 < dims.size(); ++i)
      layers.push_back(seeded_uniform_init<S>(rng, dims[i + 1], dims[i], lo, hi));
    u_cls = seeded_uniform_init<S>(rng, n_classes, dims.back(), lo, hi);
  }

  uint32_t n_hidden_layers() const { return uint32_t(layers.size()); }
};

template <class S>
std::vector<S> mlp_apply_layers(const MlpClassifier<S>& m, std::vector<S> a,
                                uint32_t from, uint32_t to) {
  for (uint32_t i = from; i < to; ++i) {
    std::vector<S> next(m.layers[i].rows);
    matvec(m.layers[i], std::span<const S>(a), std::span<S>(next));
    for (auto& v : next) v = S(std::tanh(double(v)));
    a = std::move(next);
  }
  return a;
}

template <class S>
struct MlpSplit {
  std::vector<S> intermediate;  // activations after layer k
  std::vector<S> logits;
};

template <class S>
MlpSplit<S> mlp_forward_split(const MlpClassifier<S>& m, std::span<const S> x,
                              uint32_t k) {
  const uint32_t n = m.n_hidden_layers();
  if (k > n) throw std::invalid_argument("mlp_forward_split: k out of range");
  std::vector<S> a(x.begin(), x.end());
  MlpSplit<S> out;
  out.intermediate = mlp_apply_layers(m, std::move(a), 0, k);
  std::vector<S> an = mlp_apply_layers(m, out.intermediate, k, n);
  out.logits.resize(m.u_cls.rows);
  matvec(m.u_cls, std::span<const S>(an), std::span<S>(out.logits));
  return out;
}

}  // namespace sentlab
