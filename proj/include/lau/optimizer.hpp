// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Adadelta with global-norm clipping and the dev-metric plateau rule that
// halves the clipping threshold.
//
// Update order per training step: clip first, then feed the clipped gradient
// to the accumulators. Clipping scales the WHOLE gradient vector (all
// parameter tensors jointly) by tau/norm when its global l2 norm exceeds tau.
//
//   E[g2]  <- rho E[g2] + (1-rho) g^2
//   dx      = -sqrt(E[dx2] + eps) / sqrt(E[g2] + eps) * g
//   E[dx2] <- rho E[dx2] + (1-rho) dx^2
//   w      <- w + dx

#pragma once

#include <vector>

#include "lau/model.hpp"

namespace lau {

// Stable-order list of every tensor in a parameter struct; co-shaped structs
// (params, grads, accumulators) zip by index.
template <class T>
std::vector<Tensor<T>*> tensor_ptrs(ModelParams<T>& m) {
  std::vector<Tensor<T>*> out;
  for_each_model_tensor(m, [&out](const std::string&, Tensor<T>& t) { out.push_back(&t); });
  return out;
}

template <class T>
double global_norm(ModelParams<T>& grads) {
  double acc = 0;
  for_each_model_tensor(grads, [&acc](const std::string&, Tensor<T>& t) { acc += sq_norm(t); });
  const double norm = std::sqrt(acc);
  if (!std::isfinite(norm)) throw std::runtime_error("global_norm: non-finite gradient norm");
  return norm;
}

// Scales every gradient by tau/norm when the global norm exceeds tau.
// Returns the applied scale (1.0 when untouched).
template <class T>
double clip_global(ModelParams<T>& grads, double tau) {
  check(tau > 0, "clip_global: tau must be positive");
  const double norm = global_norm(grads);
  if (norm <= tau) return 1.0;
  const double scale = tau / norm;
  for_each_model_tensor(grads, [scale](const std::string&, Tensor<T>& t) {
    scale_inplace(t, static_cast<T>(scale));
  });
  return scale;
}

// Elementwise Adadelta recurrences for one tensor.
template <class T>
void adadelta_update(Tensor<T>& param, const Tensor<T>& grad, Tensor<T>& eg2, Tensor<T>& edx2,
                     double rho, double epsilon) {
  check(param.same_shape(grad) && param.same_shape(eg2) && param.same_shape(edx2),
        "adadelta_update: shape mismatch");
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad.data()[i];
    double e_g = eg2.data()[i];
    double e_dx = edx2.data()[i];
    e_g = rho * e_g + (1.0 - rho) * g * g;
    const double dx = -std::sqrt(e_dx + epsilon) / std::sqrt(e_g + epsilon) * g;
    e_dx = rho * e_dx + (1.0 - rho) * dx * dx;
    eg2.data()[i] = static_cast<T>(e_g);
    edx2.data()[i] = static_cast<T>(e_dx);
    param.data()[i] += static_cast<T>(dx);
    if (!std::isfinite(static_cast<double>(param.data()[i])))
      throw std::runtime_error("adadelta_update: non-finite parameter");
  }
}

template <class T = double>
struct AdadeltaState {
  double rho = 0.95;
  double epsilon = 1e-6;
  ModelParams<T> eg2, edx2;
};

template <class T>
AdadeltaState<T> make_adadelta_state(const ModelParams<T>& params, double rho = 0.95,
                                     double epsilon = 1e-6) {
  AdadeltaState<T> s;
  s.rho = rho;
  s.epsilon = epsilon;
  s.eg2 = zeros_like(params);
  s.edx2 = zeros_like(params);
  return s;
}

template <class T>
void adadelta_step(ModelParams<T>& params, ModelParams<T>& grads, AdadeltaState<T>& state) {
  auto p = tensor_ptrs(params);
  auto g = tensor_ptrs(grads);
  auto eg2 = tensor_ptrs(state.eg2);
  auto edx2 = tensor_ptrs(state.edx2);
  check(p.size() == g.size() && p.size() == eg2.size() && p.size() == edx2.size(),
        "adadelta_step: struct mismatch");
  for (std::size_t i = 0; i < p.size(); ++i)
    adadelta_update(*p[i], *g[i], *eg2[i], *edx2[i], state.rho, state.epsilon);
}

// ---------------------------------------------------------------------------
// clipping-threshold schedule

// tau halves when the dev metric plateaus: if the best value inside the last
// `window` evaluations beats the window's first value by at most `delta_min`,
// the metric "does not change much" and tau is halved (never below tau_min).
// A fresh window must accumulate after each halve before the rule re-arms.
struct ClipSchedule {
  double tau = 1.0;
  double tau_min = 0.125;
  double delta_min = 0.2;
  int window = 3;
  int last_halve_at = -1;  // history length at the time of the last halve
};

// `history` is the chronological list of dev metrics, newest last.
// Returns true when tau was halved.
inline bool maybe_halve_tau(ClipSchedule& s, const std::vector<double>& history) {
  const int n = static_cast<int>(history.size());
  if (s.tau <= s.tau_min) return false;
  if (n < s.window) return false;
  if (s.last_halve_at >= 0 && n - s.last_halve_at < s.window) return false;
  const double start = history[static_cast<std::size_t>(n - s.window)];
  double best = start;
  for (int i = n - s.window + 1; i < n; ++i)
    best = std::max(best, history[static_cast<std::size_t>(i)]);
  if (best - start > s.delta_min) return false;
  s.tau = std::max(s.tau / 2.0, s.tau_min);
  s.last_halve_at = n;
  return true;
}

}  // namespace lau
