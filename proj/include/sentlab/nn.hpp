#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "sentlab/errors.hpp"
#include "sentlab/matrix.hpp"

namespace sentlab {

constexpr double kLayerNormEps = 1e-5;

template <class S>
void check_finite_input(std::span<const S> v, const char* who) {
  if (v.empty()) throw std::invalid_argument(std::string(who) + ": empty input");
  if (!all_finite(v))
    throw std::invalid_argument(std::string(who) + ": non-finite input");
}

// Max-shifted softmax; order-preserving, sums to 1 up to rounding.
template <class S>
void softmax(std::span<const S> logits, std::span<S> out) {
  check_finite_input(logits, "softmax");
  if (out.size() != logits.size())
    throw std::invalid_argument("softmax: output size mismatch");
  S mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (size_t i = 0; i < logits.size(); ++i) {
    double e = std::exp(double(logits[i]) - double(mx));
    out[i] = S(e);
    sum += e;
  }
  double inv = 1.0 / sum;
  for (auto& p : out) p = S(double(p) * inv);
}

template <class S>
std::vector<S> softmax(std::span<const S> logits) {
  std::vector<S> out(logits.size());
  softmax(logits, std::span<S>(out));
  return out;
}

// log sum_i exp(x_i), overflow-safe.
template <class S>
double log_sum_exp(std::span<const S> logits) {
  check_finite_input(logits, "log_sum_exp");
  double mx = double(*std::max_element(logits.begin(), logits.end()));
  double sum = 0;
  for (S v : logits) sum += std::exp(double(v) - mx);
  return mx + std::log(sum);
}

// Cached intermediates for the backward pass of one layer_norm call.
template <class S>
struct LayerNormCache {
  std::vector<S> xhat;  // (x - mean) / sqrt(var + eps)
  double inv_sigma = 0;
};

// out = gain * (x - mean(x)) / sqrt(var(x) + eps), population variance.
template <class S>
void layer_norm(std::span<const S> x, std::span<const S> gain, double eps,
                std::span<S> out, LayerNormCache<S>* cache = nullptr) {
  if (x.size() < 2) throw std::invalid_argument("layer_norm: length < 2");
  if (gain.size() != x.size())
    throw std::invalid_argument("layer_norm: gain length mismatch");
  if (!(eps > 0)) throw std::invalid_argument("layer_norm: eps <= 0");
  const size_t n = x.size();
  double mean = 0;
  for (S v : x) mean += double(v);
  mean /= double(n);
  double var = 0;
  for (S v : x) {
    double d = double(v) - mean;
    var += d * d;
  }
  var /= double(n);
  double inv_sigma = 1.0 / std::sqrt(var + eps);
  if (cache) {
    cache->xhat.resize(n);
    cache->inv_sigma = inv_sigma;
  }
  for (size_t i = 0; i < n; ++i) {
    S xh = S((double(x[i]) - mean) * inv_sigma);
    if (cache) cache->xhat[i] = xh;
    out[i] = gain[i] * xh;
  }
}

template <class S>
std::vector<S> layer_norm(std::span<const S> x, std::span<const S> gain,
                          double eps) {
  std::vector<S> out(x.size());
  layer_norm(x, gain, eps, std::span<S>(out));
  return out;
}

// Given d(out), accumulates d(gain) and writes d(x).
template <class S>
void layer_norm_backward(std::span<const S> dout, std::span<const S> gain,
                         const LayerNormCache<S>& cache, std::span<S> dgain,
                         std::span<S> dx) {
  const size_t n = dout.size();
  double mean_u = 0, mean_ux = 0;
  std::vector<double> u(n);
  for (size_t i = 0; i < n; ++i) {
    u[i] = double(dout[i]) * double(gain[i]);
    mean_u += u[i];
    mean_ux += u[i] * double(cache.xhat[i]);
    dgain[i] += dout[i] * cache.xhat[i];
  }
  mean_u /= double(n);
  mean_ux /= double(n);
  for (size_t i = 0; i < n; ++i)
    dx[i] = S(cache.inv_sigma *
              (u[i] - mean_u - double(cache.xhat[i]) * mean_ux));
}

template <class S>
S sigmoid(S x) {
  return S(1.0 / (1.0 + std::exp(-double(x))));
}

}  // namespace sentlab
