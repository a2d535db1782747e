// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Recurrent cells: the GRU baseline and the LAU (linear associative unit).
//
//   GRU:  r = s(x W_xr + h W_hr + b_r)        LAU adds g = s(x W_xg + h W_hg + b_g)
//         z = s(x W_xz + h W_hz + b_z)        and a linear input path W_x.
//         hb = tanh(x W_xh + (r*h) W_hh + b_h)
//         h' = (1-z)*h + z*hb
//
//   LAU:  hb = tanh(f*(x W_xh) + r*(h W_hh) + b_h),  f = 1 - r (tied)
//         h' = ((1-z)*h + z*hb) * (1-g) + g * (x W_x)
//
// The two candidates are structurally different: the GRU applies the reset
// gate inside the W_hh product, the LAU applies it outside (and also gates
// the input half with f). Both cells share one parameter struct tagged with
// CellKind; LAU-only tensors stay empty for a GRU.
//
// Backward passes are hand-derived adjoints, checked against central
// differences in the test suite. Gradients are *accumulated* into the
// caller's buffers so BPTT and multi-step losses can reuse them.

#pragma once

#include <optional>
#include <string>

#include "lau/tensor.hpp"

namespace lau {

enum class CellKind { kGru, kLau };

inline const char* cell_kind_name(CellKind k) { return k == CellKind::kGru ? "gru" : "lau"; }

inline CellKind cell_kind_from_name(const std::string& s) {
  if (s == "gru") return CellKind::kGru;
  if (s == "lau") return CellKind::kLau;
  throw std::invalid_argument("unknown cell kind: " + s);
}

template <class T = double>
struct CellParams {
  CellKind kind = CellKind::kGru;
  int input_dim = 0;
  int hidden_dim = 0;

  Tensor<T> W_xh, W_hh;  // candidate
  Tensor<T> W_xr, W_hr;  // reset gate
  Tensor<T> W_xz, W_hz;  // update gate
  Tensor<T> b_h, b_r, b_z;

  // LAU only
  Tensor<T> W_xg, W_hg, b_g;  // input gate g
  Tensor<T> W_x;              // linear path
};

// Visits every tensor of the cell with a stable short name. The same order is
// used by the optimizer state, the checkpoint format and finite-difference
// sweeps, so it must never be reordered behind a released checkpoint version.
template <class P, class F>
void for_each_cell_tensor(P& p, F&& f) {
  f("W_xh", p.W_xh);
  f("W_hh", p.W_hh);
  f("W_xr", p.W_xr);
  f("W_hr", p.W_hr);
  f("W_xz", p.W_xz);
  f("W_hz", p.W_hz);
  f("b_h", p.b_h);
  f("b_r", p.b_r);
  f("b_z", p.b_z);
  if (p.kind == CellKind::kLau) {
    f("W_xg", p.W_xg);
    f("W_hg", p.W_hg);
    f("b_g", p.b_g);
    f("W_x", p.W_x);
  }
}

// Weights ~ N(0, stddev^2), biases zero (zero-init keeps the published
// zero-weight closed forms valid at initialization).
template <class T = double>
CellParams<T> make_cell_params(CellKind kind, int input_dim, int hidden_dim, Rng& rng,
                               double stddev = 0.04) {
  check(input_dim > 0 && hidden_dim > 0, "make_cell_params: dims must be positive");
  CellParams<T> p;
  p.kind = kind;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.W_xh = gaussian_init<T>(input_dim, hidden_dim, rng, stddev);
  p.W_hh = gaussian_init<T>(hidden_dim, hidden_dim, rng, stddev);
  p.W_xr = gaussian_init<T>(input_dim, hidden_dim, rng, stddev);
  p.W_hr = gaussian_init<T>(hidden_dim, hidden_dim, rng, stddev);
  p.W_xz = gaussian_init<T>(input_dim, hidden_dim, rng, stddev);
  p.W_hz = gaussian_init<T>(hidden_dim, hidden_dim, rng, stddev);
  p.b_h = Tensor<T>(1, hidden_dim);
  p.b_r = Tensor<T>(1, hidden_dim);
  p.b_z = Tensor<T>(1, hidden_dim);
  if (kind == CellKind::kLau) {
    p.W_xg = gaussian_init<T>(input_dim, hidden_dim, rng, stddev);
    p.W_hg = gaussian_init<T>(hidden_dim, hidden_dim, rng, stddev);
    p.b_g = Tensor<T>(1, hidden_dim);
    p.W_x = gaussian_init<T>(input_dim, hidden_dim, rng, stddev);
  }
  return p;
}

// Same shapes as `like`, all zeros — the gradient accumulator.
template <class T>
CellParams<T> zeros_like(const CellParams<T>& like) {
  CellParams<T> g = like;
  for_each_cell_tensor(g, [](const char*, Tensor<T>& t) {
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = T(0);
  });
  return g;
}

// Test hook: pin a gate to a constant, bypassing the sigmoid. A pinned gate
// contributes no gradient to its weights and no gradient through its
// pre-activation — it is genuinely constant.
template <class T = double>
struct GateOverrides {
  std::optional<T> r, z, g;
};

// Everything backward needs from one forward step.
template <class T = double>
struct StepCache {
  Tensor<T> x, h_prev;
  Tensor<T> r, z, g;   // gate activations (g empty for GRU)
  Tensor<T> xh, hh;    // LAU: the two candidate halves x*W_xh and h*W_hh
  Tensor<T> rh;        // GRU: r * h_prev (the W_hh input)
  Tensor<T> hbar;      // candidate tanh output
  Tensor<T> wx;        // LAU: x * W_x
  Tensor<T> inner;     // LAU: the GRU-style interpolation before the g mix
  GateOverrides<T> overrides;
};

namespace detail {

template <class T>
Tensor<T> gate(const Tensor<T>& x, const Tensor<T>& h, const Tensor<T>& Wx, const Tensor<T>& Wh,
               const Tensor<T>& b, const std::optional<T>& pin) {
  if (pin) return Tensor<T>(x.rows(), b.cols(), *pin);
  return sigmoid(add_row(add(matmul(x, Wx), matmul(h, Wh)), b));
}

// adjoint of the sigmoid gate above; no-op for a pinned gate
template <class T>
void gate_backward(const Tensor<T>& x, const Tensor<T>& h, const Tensor<T>& Wx,
                   const Tensor<T>& Wh, const Tensor<T>& a, const std::optional<T>& pin,
                   const Tensor<T>& da, Tensor<T>& dx, Tensor<T>& dh, Tensor<T>& gWx,
                   Tensor<T>& gWh, Tensor<T>& gb) {
  if (pin) return;
  Tensor<T> dpre(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const T s = a.data()[i];
    dpre.data()[i] = da.data()[i] * s * (T(1) - s);
  }
  add_inplace(gWx, matmul_tn(x, dpre));
  add_inplace(gWh, matmul_tn(h, dpre));
  add_inplace(gb, col_sums(dpre));
  add_inplace(dx, matmul_nt(dpre, Wx));
  add_inplace(dh, matmul_nt(dpre, Wh));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// forward

template <class T>
Tensor<T> gru_forward(const CellParams<T>& p, const Tensor<T>& x, const Tensor<T>& h_prev,
                      StepCache<T>& cache, const GateOverrides<T>& ov = {}) {
  check(p.kind == CellKind::kGru, "gru_forward: wrong cell kind");
  check(x.cols() == p.input_dim, "gru_forward: input dim mismatch");
  check(h_prev.cols() == p.hidden_dim && h_prev.rows() == x.rows(),
        "gru_forward: state shape mismatch");
  cache.x = x;
  cache.h_prev = h_prev;
  cache.overrides = ov;
  cache.r = detail::gate(x, h_prev, p.W_xr, p.W_hr, p.b_r, ov.r);
  cache.z = detail::gate(x, h_prev, p.W_xz, p.W_hz, p.b_z, ov.z);
  cache.rh = mul(cache.r, h_prev);
  cache.hbar = tanh(add_row(add(matmul(x, p.W_xh), matmul(cache.rh, p.W_hh)), p.b_h));
  // h' = (1-z)*h + z*hbar
  Tensor<T> h = add(mul(one_minus(cache.z), h_prev), mul(cache.z, cache.hbar));
  ensure_finite(h, "gru_forward");
  return h;
}

template <class T>
Tensor<T> lau_forward(const CellParams<T>& p, const Tensor<T>& x, const Tensor<T>& h_prev,
                      StepCache<T>& cache, const GateOverrides<T>& ov = {}) {
  check(p.kind == CellKind::kLau, "lau_forward: wrong cell kind");
  check(x.cols() == p.input_dim, "lau_forward: input dim mismatch");
  check(h_prev.cols() == p.hidden_dim && h_prev.rows() == x.rows(),
        "lau_forward: state shape mismatch");
  cache.x = x;
  cache.h_prev = h_prev;
  cache.overrides = ov;
  cache.r = detail::gate(x, h_prev, p.W_xr, p.W_hr, p.b_r, ov.r);
  cache.z = detail::gate(x, h_prev, p.W_xz, p.W_hz, p.b_z, ov.z);
  cache.g = detail::gate(x, h_prev, p.W_xg, p.W_hg, p.b_g, ov.g);
  cache.xh = matmul(x, p.W_xh);
  cache.hh = matmul(h_prev, p.W_hh);
  // candidate: f*(x W_xh) + r*(h W_hh) + b_h with f = 1 - r; the reset gate
  // sits OUTSIDE the W_hh product, unlike the GRU
  Tensor<T> pre = add_row(add(mul(one_minus(cache.r), cache.xh), mul(cache.r, cache.hh)), p.b_h);
  cache.hbar = tanh(pre);
  cache.wx = matmul(x, p.W_x);
  cache.inner = add(mul(one_minus(cache.z), h_prev), mul(cache.z, cache.hbar));
  // h' = inner*(1-g) + g*(x W_x): the gated linear path
  Tensor<T> h = add(mul(cache.inner, one_minus(cache.g)), mul(cache.g, cache.wx));
  ensure_finite(h, "lau_forward");
  return h;
}

template <class T>
Tensor<T> cell_forward(const CellParams<T>& p, const Tensor<T>& x, const Tensor<T>& h_prev,
                       StepCache<T>& cache, const GateOverrides<T>& ov = {}) {
  return p.kind == CellKind::kGru ? gru_forward(p, x, h_prev, cache, ov)
                                  : lau_forward(p, x, h_prev, cache, ov);
}

// ---------------------------------------------------------------------------
// backward

// Adjoint of gru_forward. dx, dh_prev and grads are accumulated into.
template <class T>
void gru_backward(const CellParams<T>& p, const StepCache<T>& c, const Tensor<T>& dh,
                  Tensor<T>& dx, Tensor<T>& dh_prev, CellParams<T>& grads) {
  check(p.kind == CellKind::kGru, "gru_backward: wrong cell kind");
  check(dh.same_shape(c.h_prev), "gru_backward: upstream shape mismatch");
  // h' = (1-z)*h + z*hbar
  Tensor<T> dz = mul(dh, sub(c.hbar, c.h_prev));
  Tensor<T> dhbar = mul(dh, c.z);
  add_inplace(dh_prev, mul(dh, one_minus(c.z)));
  // hbar = tanh(x W_xh + rh W_hh + b_h)
  Tensor<T> dpre = mul(dhbar, detail::map(c.hbar, [](T v) { return T(1) - v * v; }, "tanh'"));
  add_inplace(grads.W_xh, matmul_tn(c.x, dpre));
  add_inplace(grads.W_hh, matmul_tn(c.rh, dpre));
  add_inplace(grads.b_h, col_sums(dpre));
  add_inplace(dx, matmul_nt(dpre, p.W_xh));
  Tensor<T> drh = matmul_nt(dpre, p.W_hh);
  // rh = r * h_prev
  Tensor<T> dr = mul(drh, c.h_prev);
  add_inplace(dh_prev, mul(drh, c.r));
  detail::gate_backward(c.x, c.h_prev, p.W_xr, p.W_hr, c.r, c.overrides.r, dr, dx, dh_prev,
                        grads.W_xr, grads.W_hr, grads.b_r);
  detail::gate_backward(c.x, c.h_prev, p.W_xz, p.W_hz, c.z, c.overrides.z, dz, dx, dh_prev,
                        grads.W_xz, grads.W_hz, grads.b_z);
}

// Adjoint of lau_forward.
template <class T>
void lau_backward(const CellParams<T>& p, const StepCache<T>& c, const Tensor<T>& dh,
                  Tensor<T>& dx, Tensor<T>& dh_prev, CellParams<T>& grads) {
  check(p.kind == CellKind::kLau, "lau_backward: wrong cell kind");
  check(dh.same_shape(c.h_prev), "lau_backward: upstream shape mismatch");
  // h' = inner*(1-g) + g*wx
  Tensor<T> dinner = mul(dh, one_minus(c.g));
  Tensor<T> dg = mul(dh, sub(c.wx, c.inner));
  Tensor<T> dwx = mul(dh, c.g);
  // wx = x W_x
  add_inplace(grads.W_x, matmul_tn(c.x, dwx));
  add_inplace(dx, matmul_nt(dwx, p.W_x));
  // inner = (1-z)*h + z*hbar
  Tensor<T> dz = mul(dinner, sub(c.hbar, c.h_prev));
  Tensor<T> dhbar = mul(dinner, c.z);
  add_inplace(dh_prev, mul(dinner, one_minus(c.z)));
  // hbar = tanh((1-r)*xh + r*hh + b_h)
  Tensor<T> dpre = mul(dhbar, detail::map(c.hbar, [](T v) { return T(1) - v * v; }, "tanh'"));
  add_inplace(grads.b_h, col_sums(dpre));
  Tensor<T> dxh = mul(dpre, one_minus(c.r));
  Tensor<T> dhh = mul(dpre, c.r);
  Tensor<T> dr = mul(dpre, sub(c.hh, c.xh));  // d/dr [(1-r)xh + r hh]
  // xh = x W_xh ; hh = h W_hh
  add_inplace(grads.W_xh, matmul_tn(c.x, dxh));
  add_inplace(dx, matmul_nt(dxh, p.W_xh));
  add_inplace(grads.W_hh, matmul_tn(c.h_prev, dhh));
  add_inplace(dh_prev, matmul_nt(dhh, p.W_hh));
  detail::gate_backward(c.x, c.h_prev, p.W_xr, p.W_hr, c.r, c.overrides.r, dr, dx, dh_prev,
                        grads.W_xr, grads.W_hr, grads.b_r);
  detail::gate_backward(c.x, c.h_prev, p.W_xz, p.W_hz, c.z, c.overrides.z, dz, dx, dh_prev,
                        grads.W_xz, grads.W_hz, grads.b_z);
  detail::gate_backward(c.x, c.h_prev, p.W_xg, p.W_hg, c.g, c.overrides.g, dg, dx, dh_prev,
                        grads.W_xg, grads.W_hg, grads.b_g);
}

template <class T>
void cell_backward(const CellParams<T>& p, const StepCache<T>& c, const Tensor<T>& dh,
                   Tensor<T>& dx, Tensor<T>& dh_prev, CellParams<T>& grads) {
  if (p.kind == CellKind::kGru)
    gru_backward(p, c, dh, dx, dh_prev, grads);
  else
    lau_backward(p, c, dh, dx, dh_prev, grads);
}

}  // namespace lau
