#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "sentlab/nn.hpp"
#include "sentlab/rng.hpp"

namespace sentlab {

// Single-layer GRU cell with layer normalisation. Every pre-activation
// (input-to-hidden and hidden-to-hidden, per gate) is normalised with its
// own gain vector; the per-gate bias is added after normalisation:
//
//   z  = sigmoid(LN(W_z x) + LN(U_z h) + b_z)
//   r  = sigmoid(LN(W_r x) + LN(U_r h) + b_r)
//   hc = tanh(LN(W_h x) + r * LN(U_h h) + b_h)
//   h' = (1 - z) * h + z * hc
template <class S>
struct GruParams {
  Matrix<S> w_z, w_r, w_h;  // hidden x input
  Matrix<S> u_z, u_r, u_h;  // hidden x hidden
  std::vector<S> g_wz, g_wr, g_wh;  // layer-norm gains, input side
  std::vector<S> g_uz, g_ur, g_uh;  // layer-norm gains, recurrent side
  std::vector<S> b_z, b_r, b_h;     // post-norm biases
  double ln_eps = kLayerNormEps;

  GruParams() = default;
  GruParams(uint32_t input_dim, uint32_t hidden_dim)
      : w_z(hidden_dim, input_dim),
        w_r(hidden_dim, input_dim),
        w_h(hidden_dim, input_dim),
        u_z(hidden_dim, hidden_dim),
        u_r(hidden_dim, hidden_dim),
        u_h(hidden_dim, hidden_dim),
        g_wz(hidden_dim, S(1)), g_wr(hidden_dim, S(1)), g_wh(hidden_dim, S(1)),
        g_uz(hidden_dim, S(1)), g_ur(hidden_dim, S(1)), g_uh(hidden_dim, S(1)),
        b_z(hidden_dim, S(0)), b_r(hidden_dim, S(0)), b_h(hidden_dim, S(0)) {
    if (hidden_dim < 2)
      throw std::invalid_argument("GruParams: hidden_dim must be >= 2");
  }

  uint32_t input_dim() const { return w_z.cols; }
  uint32_t hidden_dim() const { return w_z.rows; }

  void init_weights(SeededRng& rng, double lo, double hi) {
    for (Matrix<S>* m : {&w_z, &w_r, &w_h, &u_z, &u_r, &u_h})
      fill_uniform(rng, std::span<S>(m->data), lo, hi);
    // gains stay at 1, biases at 0
  }
};

// Everything the backward pass needs about one forward step.
template <class S>
struct GruStepCache {
  std::vector<S> x, h_prev;
  std::vector<S> z, r, hc;
  std::vector<S> ln_uh;  // LN(U_h h_prev), needed for the r-gating backward
  LayerNormCache<S> c_wz, c_wr, c_wh, c_uz, c_ur, c_uh;
};

template <class S>
std::vector<S> gru_step(const GruParams<S>& p, std::span<const S> x,
                        std::span<const S> h_prev,
                        GruStepCache<S>* cache = nullptr) {
  const uint32_t h = p.hidden_dim();
  if (x.size() != p.input_dim())
    throw std::invalid_argument("gru_step: input dimension mismatch");
  if (h_prev.size() != h)
    throw std::invalid_argument("gru_step: hidden dimension mismatch");

  std::vector<S> tmp(h), a(h), b(h), z(h), r(h), hc(h), ln_uh(h);
  LayerNormCache<S> local;
  auto ln_in = [&](const Matrix<S>& w, std::span<const S> gain,
                   LayerNormCache<S>* c, std::span<S> out) {
    matvec(w, x, std::span<S>(tmp));
    layer_norm(std::span<const S>(tmp), gain, p.ln_eps, out, c);
  };
  auto ln_rec = [&](const Matrix<S>& u, std::span<const S> gain,
                    LayerNormCache<S>* c, std::span<S> out) {
    matvec(u, h_prev, std::span<S>(tmp));
    layer_norm(std::span<const S>(tmp), gain, p.ln_eps, out, c);
  };

  ln_in(p.w_z, p.g_wz, cache ? &cache->c_wz : &local, std::span<S>(a));
  ln_rec(p.u_z, p.g_uz, cache ? &cache->c_uz : &local, std::span<S>(b));
  for (uint32_t i = 0; i < h; ++i) z[i] = sigmoid(S(a[i] + b[i] + p.b_z[i]));

  ln_in(p.w_r, p.g_wr, cache ? &cache->c_wr : &local, std::span<S>(a));
  ln_rec(p.u_r, p.g_ur, cache ? &cache->c_ur : &local, std::span<S>(b));
  for (uint32_t i = 0; i < h; ++i) r[i] = sigmoid(S(a[i] + b[i] + p.b_r[i]));

  ln_in(p.w_h, p.g_wh, cache ? &cache->c_wh : &local, std::span<S>(a));
  ln_rec(p.u_h, p.g_uh, cache ? &cache->c_uh : &local, std::span<S>(ln_uh));
  for (uint32_t i = 0; i < h; ++i)
    hc[i] = S(std::tanh(double(a[i]) + double(r[i]) * double(ln_uh[i]) +
                        double(p.b_h[i])));

  std::vector<S> h_next(h);
  for (uint32_t i = 0; i < h; ++i)
    h_next[i] = (S(1) - z[i]) * h_prev[i] + z[i] * hc[i];

  if (cache) {
    cache->x.assign(x.begin(), x.end());
    cache->h_prev.assign(h_prev.begin(), h_prev.end());
    cache->z = z;
    cache->r = r;
    cache->hc = hc;
    cache->ln_uh = ln_uh;
  }
  return h_next;
}

// Gradient sink mirroring GruParams.
template <class S>
using GruGrads = GruParams<S>;

// Backpropagates d(h_next) through one step: accumulates parameter grads,
// adds the input gradient into dx, and writes d(h_prev) into dh_prev.
template <class S>
void gru_step_backward(const GruParams<S>& p, const GruStepCache<S>& c,
                       std::span<const S> dh_next, GruGrads<S>& g,
                       std::span<S> dx, std::span<S> dh_prev) {
  const uint32_t h = p.hidden_dim();
  std::vector<S> dz(h), dhc(h), dpre(h), dv(h);
  for (uint32_t i = 0; i < h; ++i) {
    dh_prev[i] += dh_next[i] * (S(1) - c.z[i]);
    dz[i] = dh_next[i] * (c.hc[i] - c.h_prev[i]);
    dhc[i] = dh_next[i] * c.z[i];
  }

  auto back_in = [&](std::span<const S> dpre_act, const Matrix<S>& w,
                     Matrix<S>& dw, std::span<const S> gain, std::span<S> dgain,
                     const LayerNormCache<S>& lc) {
    layer_norm_backward(dpre_act, gain, lc, dgain, std::span<S>(dv));
    add_outer(dw, std::span<const S>(dv), std::span<const S>(c.x));
    for (uint32_t r_ = 0; r_ < w.rows; ++r_) {
      auto row = w.row(r_);
      S dvr = dv[r_];
      for (uint32_t cc = 0; cc < w.cols; ++cc) dx[cc] += dvr * row[cc];
    }
  };
  auto back_rec = [&](std::span<const S> dpre_act, const Matrix<S>& u,
                      Matrix<S>& du, std::span<const S> gain,
                      std::span<S> dgain, const LayerNormCache<S>& lc) {
    layer_norm_backward(dpre_act, gain, lc, dgain, std::span<S>(dv));
    add_outer(du, std::span<const S>(dv), std::span<const S>(c.h_prev));
    for (uint32_t r_ = 0; r_ < u.rows; ++r_) {
      auto row = u.row(r_);
      S dvr = dv[r_];
      for (uint32_t cc = 0; cc < u.cols; ++cc) dh_prev[cc] += dvr * row[cc];
    }
  };

  // candidate: hc = tanh(a + r*ln_uh + b_h)
  std::vector<S> dr(h), dln_uh(h);
  for (uint32_t i = 0; i < h; ++i) {
    dpre[i] = dhc[i] * (S(1) - c.hc[i] * c.hc[i]);
    g.b_h[i] += dpre[i];
    dr[i] = dpre[i] * c.ln_uh[i];
    dln_uh[i] = dpre[i] * c.r[i];
  }
  back_in(std::span<const S>(dpre), p.w_h, g.w_h, p.g_wh, std::span<S>(g.g_wh),
          c.c_wh);
  back_rec(std::span<const S>(dln_uh), p.u_h, g.u_h, p.g_uh,
           std::span<S>(g.g_uh), c.c_uh);

  // reset gate
  for (uint32_t i = 0; i < h; ++i) {
    dpre[i] = dr[i] * c.r[i] * (S(1) - c.r[i]);
    g.b_r[i] += dpre[i];
  }
  back_in(std::span<const S>(dpre), p.w_r, g.w_r, p.g_wr, std::span<S>(g.g_wr),
          c.c_wr);
  back_rec(std::span<const S>(dpre), p.u_r, g.u_r, p.g_ur, std::span<S>(g.g_ur),
           c.c_ur);

  // update gate
  for (uint32_t i = 0; i < h; ++i) {
    dpre[i] = dz[i] * c.z[i] * (S(1) - c.z[i]);
    g.b_z[i] += dpre[i];
  }
  back_in(std::span<const S>(dpre), p.w_z, g.w_z, p.g_wz, std::span<S>(g.g_wz),
          c.c_wz);
  back_rec(std::span<const S>(dpre), p.u_z, g.u_z, p.g_uz, std::span<S>(g.g_uz),
           c.c_uz);
}

}  // namespace sentlab
