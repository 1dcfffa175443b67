#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sentlab/errors.hpp"

namespace sentlab {

// Bias-corrected Adam, no weight decay. Moments are kept flat and must
// match the flattened parameter vector they were sized for.
template <class S>
struct AdamState {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t t = 0;
  std::vector<S> m, v;

  AdamState() = default;
  AdamState(size_t n_params, double lr_) : lr(lr_), m(n_params, S(0)), v(n_params, S(0)) {}
};

template <class S>
void adam_step(AdamState<S>& state, std::span<S> params,
               std::span<const S> grads) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  for (size_t i = 0; i < grads.size(); ++i)
    if (!std::isfinite(double(grads[i])))
      throw NumericError("adam_step: non-finite gradient at index " +
                         std::to_string(i));
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    double g = double(grads[i]);
    double m = state.beta1 * double(state.m[i]) + (1.0 - state.beta1) * g;
    double v = state.beta2 * double(state.v[i]) + (1.0 - state.beta2) * g * g;
    state.m[i] = S(m);
    state.v[i] = S(v);
    double mhat = m / bc1;
    double vhat = v / bc2;
    params[i] = S(double(params[i]) - state.lr * mhat / (std::sqrt(vhat) + state.eps));
  }
}

}  // namespace sentlab
