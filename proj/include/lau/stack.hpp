// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Vertical stacking of recurrent cells with per-layer direction terms.
//
// Layer l (1-based) consumes the sequence produced by layer l-1 and traverses
// it in its own direction: d = -1 means left-to-right (the step at t uses the
// state from t-1), d = +1 means right-to-left (the state from t+1). The
// alternating policy assigns d = (-1)^l, so layer 1 runs forward, layer 2
// backward, and so on — bidirectionality without doubling the width. The
// boundary state before the first step in traversal order is zero.
//
// The residual option adds each layer's input to its output for layers >= 2
// (layer 1 may change dimensionality). The skip wraps the cell from outside:
// the recurrent carry inside a layer is the raw cell state, so turning the
// skip on does not change any cell's state trajectory, only what is passed
// upward. That keeps the skip's gradient contribution exactly additive.
//
// Sequences inside one call share a length; padding never enters the math
// (the data layer buckets by length instead).

#pragma once

#include <vector>

#include "lau/cells.hpp"

namespace lau {

enum class DirectionPolicy {
  kAlternating,         // layer l runs in direction (-1)^l
  kAlternatingFlipped,  // mirror image, for direction-bookkeeping tests
  kFixedForward,        // every layer left-to-right (the decoder)
};

struct StackConfig {
  int num_layers = 1;
  int hidden_dim = 0;
  CellKind cell_kind = CellKind::kGru;
  DirectionPolicy direction = DirectionPolicy::kAlternating;
  bool residual = false;
};

// -1 = left-to-right, +1 = right-to-left; layer is 0-based here
inline int layer_direction(const StackConfig& cfg, int layer) {
  switch (cfg.direction) {
    case DirectionPolicy::kAlternating: return layer % 2 == 0 ? -1 : +1;
    case DirectionPolicy::kAlternatingFlipped: return layer % 2 == 0 ? +1 : -1;
    case DirectionPolicy::kFixedForward: return -1;
  }
  return -1;
}

// positions in the order layer `layer` visits them
inline std::vector<int> traversal_order(const StackConfig& cfg, int layer, int T) {
  std::vector<int> ord(static_cast<std::size_t>(T));
  if (layer_direction(cfg, layer) == -1)
    for (int t = 0; t < T; ++t) ord[static_cast<std::size_t>(t)] = t;
  else
    for (int t = 0; t < T; ++t) ord[static_cast<std::size_t>(t)] = T - 1 - t;
  return ord;
}

template <class T = double>
std::vector<CellParams<T>> make_stack_params(const StackConfig& cfg, int input_dim, Rng& rng,
                                             double stddev = 0.04) {
  check(cfg.num_layers >= 1, "make_stack_params: need at least one layer");
  std::vector<CellParams<T>> layers;
  layers.reserve(static_cast<std::size_t>(cfg.num_layers));
  for (int l = 0; l < cfg.num_layers; ++l) {
    const int in =  l == 0 ? input_dim : cfg.hidden_dim;
    layers.push_back(make_cell_params<T>(cfg.cell_kind, in, cfg.hidden_dim, rng, stddev));
  }
  return layers;
}

template <class T>
std::vector<CellParams<T>> zeros_like(const std::vector<CellParams<T>>& like) {
  std::vector<CellParams<T>> g;
  g.reserve(like.size());
  for (const auto& p : like) g.push_back(zeros_like(p));
  return g;
}

template <class T = double>
struct StackActivations {
  // indexed [layer][position]; positions always in original sequence order
  std::vector<std::vector<StepCache<T>>> caches;
  std::vector<std::vector<Tensor<T>>> states;   // raw cell states
  std::vector<std::vector<Tensor<T>>> outputs;  // post-residual layer outputs
  int seq_len() const { return states.empty() ? 0 : static_cast<int>(states[0].size()); }
};

// ---------------------------------------------------------------------------
// full-sequence forward / backward (the encoder path)

template <class T>
StackActivations<T> stack_forward(const std::vector<CellParams<T>>& layers,
                                  const StackConfig& cfg, const std::vector<Tensor<T>>& inputs) {
  check(!inputs.empty(), "stack_forward: empty sequence");
  check(static_cast<int>(layers.size()) == cfg.num_layers, "stack_forward: layer count mismatch");
  const int L = cfg.num_layers;
  const int n = static_cast<int>(inputs.size());
  const int batch = inputs[0].rows();

  StackActivations<T> acts;
  acts.caches.assign(static_cast<std::size_t>(L), std::vector<StepCache<T>>(static_cast<std::size_t>(n)));
  acts.states.assign(static_cast<std::size_t>(L), std::vector<Tensor<T>>(static_cast<std::size_t>(n)));
  acts.outputs.assign(static_cast<std::size_t>(L), std::vector<Tensor<T>>(static_cast<std::size_t>(n)));

  const std::vector<Tensor<T>>* below = &inputs;
  for (int l = 0; l < L; ++l) {
    const auto ord = traversal_order(cfg, l, n);
    Tensor<T> carry(batch, cfg.hidden_dim);  // zero boundary state
    for (int k = 0; k < n; ++k) {
      const int t = ord[static_cast<std::size_t>(k)];
      auto& cache = acts.caches[l][static_cast<std::size_t>(t)];
      carry = cell_forward(layers[static_cast<std::size_t>(l)], (*below)[static_cast<std::size_t>(t)],
                           carry, cache);
      acts.states[l][static_cast<std::size_t>(t)] = carry;
      acts.outputs[l][static_cast<std::size_t>(t)] =
          (cfg.residual && l >= 1) ? add(carry, (*below)[static_cast<std::size_t>(t)]) : carry;
    }
    below = &acts.outputs[l];
  }
  return acts;
}

// BPTT through the whole stack. `dtop` holds gradients on the top layer's
// outputs (zero tensors allowed). Parameter gradients accumulate into
// `grads`; the return value is the gradient on the raw input sequence. If
// `layer_input_grads` is given, it receives the gradient arriving at each
// layer's input sequence (layer_input_grads[l][t]; layer 0's entry equals the
// returned input gradient) — the depth-flow diagnostic reads these.
template <class T>
std::vector<Tensor<T>> stack_backward(const std::vector<CellParams<T>>& layers,
                                      const StackConfig& cfg, const StackActivations<T>& acts,
                                      const std::vector<Tensor<T>>& dtop,
                                      std::vector<CellParams<T>>& grads,
                                      std::vector<std::vector<Tensor<T>>>* layer_input_grads =
                                          nullptr) {
  const int L = cfg.num_layers;
  const int n = acts.seq_len();
  check(static_cast<int>(dtop.size()) == n, "stack_backward: upstream length mismatch");
  check(grads.size() == layers.size(), "stack_backward: grads shape mismatch");

  if (layer_input_grads) layer_input_grads->assign(static_cast<std::size_t>(L), {});

  std::vector<Tensor<T>> dout = dtop;  // gradient on the current layer's outputs
  for (int l = L - 1; l >= 0; --l) {
    const auto& caches = acts.caches[static_cast<std::size_t>(l)];
    const auto ord = traversal_order(cfg, l, n);
    const int batch = caches[0].h_prev.rows();
    const int in_dim = caches[0].x.cols();

    std::vector<Tensor<T>> dinput(static_cast<std::size_t>(n), Tensor<T>(batch, in_dim));
    Tensor<T> dcarry(batch, cfg.hidden_dim);
    for (int k = n - 1; k >= 0; --k) {
      const int t = ord[static_cast<std::size_t>(k)];
      Tensor<T> dh = add(dout[static_cast<std::size_t>(t)], dcarry);
      Tensor<T> dh_prev(batch, cfg.hidden_dim);
      cell_backward(layers[static_cast<std::size_t>(l)], caches[static_cast<std::size_t>(t)], dh,
                    dinput[static_cast<std::size_t>(t)], dh_prev,
                    grads[static_cast<std::size_t>(l)]);
      dcarry = dh_prev;
    }
    if (cfg.residual && l >= 1)
      for (int t = 0; t < n; ++t)
        add_inplace(dinput[static_cast<std::size_t>(t)], dout[static_cast<std::size_t>(t)]);
    if (layer_input_grads) (*layer_input_grads)[static_cast<std::size_t>(l)] = dinput;
    dout = std::move(dinput);
  }
  return dout;
}

// ---------------------------------------------------------------------------
// single-step forms (the decoder path, where attention couples time steps)

// Advances every layer one step. `prev_states` holds each layer's previous
// raw state; requires a left-to-right policy (kFixedForward). Returns the new
// raw states; `top_out`, if given, receives the post-residual top output.
template <class T>
std::vector<Tensor<T>> stack_step(const std::vector<CellParams<T>>& layers,
                                  const StackConfig& cfg, const Tensor<T>& x,
                                  const std::vector<Tensor<T>>& prev_states,
                                  std::vector<StepCache<T>>& caches, Tensor<T>* top_out = nullptr) {
  check(cfg.direction == DirectionPolicy::kFixedForward, "stack_step: needs fixed_forward");
  check(static_cast<int>(prev_states.size()) == cfg.num_layers, "stack_step: state count mismatch");
  const int L = cfg.num_layers;
  caches.assign(static_cast<std::size_t>(L), StepCache<T>{});
  std::vector<Tensor<T>> states(static_cast<std::size_t>(L));
  Tensor<T> input = x;
  for (int l = 0; l < L; ++l) {
    states[static_cast<std::size_t>(l)] =
        cell_forward(layers[static_cast<std::size_t>(l)], input, prev_states[static_cast<std::size_t>(l)],
                     caches[static_cast<std::size_t>(l)]);
    Tensor<T> out = (cfg.residual && l >= 1) ? add(states[static_cast<std::size_t>(l)], input)
                                             : states[static_cast<std::size_t>(l)];
    if (l == L - 1 && top_out) *top_out = out;
    input = std::move(out);
  }
  return states;
}

// Adjoint of stack_step. On entry `dstates[l]` carries the gradient flowing
// into layer l's state from the following time step; on exit it carries the
// gradient into the previous step's state. Returns the gradient on x.
template <class T>
Tensor<T> stack_step_backward(const std::vector<CellParams<T>>& layers, const StackConfig& cfg,
                              const std::vector<StepCache<T>>& caches, const Tensor<T>& dtop,
                              std::vector<Tensor<T>>& dstates, std::vector<CellParams<T>>& grads) {
  const int L = cfg.num_layers;
  check(static_cast<int>(dstates.size()) == L, "stack_step_backward: carry count mismatch");
  Tensor<T> dout = dtop;  // gradient on layer l's output
  for (int l = L - 1; l >= 0; --l) {
    const auto& c = caches[static_cast<std::size_t>(l)];
    Tensor<T> dh = add(dstates[static_cast<std::size_t>(l)], dout);
    Tensor<T> dx(c.x.rows(), c.x.cols());
    Tensor<T> dh_prev(c.h_prev.rows(), c.h_prev.cols());
    cell_backward(layers[static_cast<std::size_t>(l)], c, dh, dx, dh_prev,
                  grads[static_cast<std::size_t>(l)]);
    dstates[static_cast<std::size_t>(l)] = dh_prev;
    if (cfg.residual && l >= 1) add_inplace(dx, dout);  // the skip
    dout = std::move(dx);
  }
  return dout;
}

}  // namespace lau
