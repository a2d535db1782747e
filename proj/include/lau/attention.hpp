// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Additive attention over encoder annotations with previous-word feeding:
//
//   e_{t,j}   = v_a' tanh(s_{t-1} W_a + h_j U_a + y_{t-1} W_y)
//   alpha_t   = softmax_j(e_{t,j})
//   c_t       = sum_j alpha_{t,j} h_j
//
// The query is the decoder's FIRST-layer state from the previous step; h_j is
// the top-layer encoder output at source position j; y_{t-1} is the previous
// target word's embedding. All three projections land in a common attn_dim.
// h_j U_a depends only on the source sentence, so it is precomputed once per
// sentence (a pure speedup — results are bit-identical either way).

#pragma once

#include <vector>

#include "lau/tensor.hpp"

namespace lau {

template <class T = double>
struct AttentionParams {
  int hidden_dim = 0;
  int embed_dim = 0;
  int attn_dim = 0;
  Tensor<T> W_a;  // hidden x attn
  Tensor<T> U_a;  // hidden x attn
  Tensor<T> W_y;  // embed x attn
  Tensor<T> v_a;  // attn x 1
};

template <class P, class F>
void for_each_attention_tensor(P& p, F&& f) {
  f("W_a", p.W_a);
  f("U_a", p.U_a);
  f("W_y", p.W_y);
  f("v_a", p.v_a);
}

template <class T = double>
AttentionParams<T> make_attention_params(int hidden_dim, int embed_dim, int attn_dim, Rng& rng,
                                         double stddev = 0.04) {
  check(hidden_dim > 0 && embed_dim > 0 && attn_dim > 0, "make_attention_params: bad dims");
  AttentionParams<T> p;
  p.hidden_dim = hidden_dim;
  p.embed_dim = embed_dim;
  p.attn_dim = attn_dim;
  p.W_a = gaussian_init<T>(hidden_dim, attn_dim, rng, stddev);
  p.U_a = gaussian_init<T>(hidden_dim, attn_dim, rng, stddev);
  p.W_y = gaussian_init<T>(embed_dim, attn_dim, rng, stddev);
  p.v_a = gaussian_init<T>(attn_dim, 1, rng, stddev);
  return p;
}

template <class T>
AttentionParams<T> zeros_like(const AttentionParams<T>& like) {
  AttentionParams<T> g = like;
  for_each_attention_tensor(g, [](const char*, Tensor<T>& t) {
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = T(0);
  });
  return g;
}

// Top-layer encoder states plus the U_a projection cache.
template <class T = double>
struct EncoderAnnotations {
  std::vector<Tensor<T>> h;     // per source position, batch x hidden
  std::vector<Tensor<T>> ua_h;  // per source position, batch x attn

  int src_len() const { return static_cast<int>(h.size()); }
};

template <class T>
EncoderAnnotations<T> make_annotations(const AttentionParams<T>& p,
                                       const std::vector<Tensor<T>>& top_states) {
  check(!top_states.empty(), "make_annotations: empty source");
  EncoderAnnotations<T> ann;
  ann.h = top_states;
  ann.ua_h.reserve(top_states.size());
  for (const auto& hj : top_states) ann.ua_h.push_back(matmul(hj, p.U_a));
  return ann;
}

template <class T = double>
struct AttendCache {
  Tensor<T> s_prev1, y_prev;         // the two query-side inputs
  Tensor<T> wa_s, wy_y;              // their projections, batch x attn
  std::vector<Tensor<T>> tanh_act;   // per position, batch x attn
  Tensor<T> alpha;                   // batch x src_len
};

// Returns the context c_t (batch x hidden); alpha lives in the cache.
template <class T>
Tensor<T> attend(const AttentionParams<T>& p, const Tensor<T>& s_prev1, const Tensor<T>& y_prev,
                 const EncoderAnnotations<T>& ann, AttendCache<T>& cache) {
  const int n = ann.src_len();
  check(n > 0, "attend: empty source");
  check(s_prev1.cols() == p.hidden_dim, "attend: query dim mismatch");
  check(y_prev.cols() == p.embed_dim, "attend: word-embedding dim mismatch");
  const int batch = s_prev1.rows();

  cache.s_prev1 = s_prev1;
  cache.y_prev = y_prev;
  cache.wa_s = matmul(s_prev1, p.W_a);
  cache.wy_y = matmul(y_prev, p.W_y);
  cache.tanh_act.assign(static_cast<std::size_t>(n), Tensor<T>());

  Tensor<T> scores(batch, n);
  const Tensor<T> query = add(cache.wa_s, cache.wy_y);
  for (int j = 0; j < n; ++j) {
    Tensor<T> act = tanh(add(query, ann.ua_h[static_cast<std::size_t>(j)]));
    Tensor<T> e = matmul(act, p.v_a);  // batch x 1
    for (int b = 0; b < batch; ++b) scores(b, j) = e(b, 0);
    cache.tanh_act[static_cast<std::size_t>(j)] = std::move(act);
  }
  cache.alpha = softmax_row(scores);

  Tensor<T> c(batch, ann.h[0].cols());
  for (int j = 0; j < n; ++j) {
    const auto& hj = ann.h[static_cast<std::size_t>(j)];
    for (int b = 0; b < batch; ++b)
      for (int col = 0; col < c.cols(); ++col) c(b, col) += cache.alpha(b, j) * hj(b, col);
  }
  ensure_finite(c, "attend");
  return c;
}

// Adjoint of attend. `dann[j]` accumulates the gradient on annotation j —
// both the direct c_t term and the U_a score path land there. `dalpha` may
// carry an extra upstream gradient on the attention weights (e.g. from an
// alignment-supervision loss); pass nullptr when there is none.
template <class T>
void attend_backward(const AttentionParams<T>& p, const EncoderAnnotations<T>& ann,
                     const AttendCache<T>& cache, const Tensor<T>& dc,
                     std::type_identity_t<const Tensor<T>*> dalpha_in,
                     Tensor<T>& ds_prev1, Tensor<T>& dy_prev, std::vector<Tensor<T>>& dann,
                     AttentionParams<T>& grads) {
  const int n = ann.src_len();
  const int batch = cache.alpha.rows();
  check(static_cast<int>(dann.size()) == n, "attend_backward: dann size mismatch");

  // c = sum_j alpha_j h_j
  Tensor<T> dalpha(batch, n);
  for (int j = 0; j < n; ++j) {
    const auto& hj = ann.h[static_cast<std::size_t>(j)];
    auto& dj = dann[static_cast<std::size_t>(j)];
    for (int b = 0; b < batch; ++b) {
      T acc = T(0);
      for (int col = 0; col < dc.cols(); ++col) {
        acc += dc(b, col) * hj(b, col);
        dj(b, col) += cache.alpha(b, j) * dc(b, col);
      }
      dalpha(b, j) = acc;
    }
  }
  if (dalpha_in) add_inplace(dalpha, *dalpha_in);

  // softmax adjoint: de_j = alpha_j (dalpha_j - sum_k dalpha_k alpha_k)
  Tensor<T> de(batch, n);
  for (int b = 0; b < batch; ++b) {
    T dot = T(0);
    for (int k = 0; k < n; ++k) dot += dalpha(b, k) * cache.alpha(b, k);
    for (int j = 0; j < n; ++j) de(b, j) = cache.alpha(b, j) * (dalpha(b, j) - dot);
  }

  // e_j = tanh_act_j v_a
  Tensor<T> dquery(batch, p.attn_dim);  // shared (wa_s + wy_y) gradient
  for (int j = 0; j < n; ++j) {
    const auto& act = cache.tanh_act[static_cast<std::size_t>(j)];
    Tensor<T> de_j(batch, 1);
    for (int b = 0; b < batch; ++b) de_j(b, 0) = de(b, j);
    add_inplace(grads.v_a, matmul_tn(act, de_j));
    // dpre = (de_j v_a') * (1 - act^2)
    Tensor<T> dpre(batch, p.attn_dim);
    for (int b = 0; b < batch; ++b)
      for (int d = 0; d < p.attn_dim; ++d)
        dpre(b, d) = de(b, j) * p.v_a(d, 0) * (T(1) - act(b, d) * act(b, d));
    add_inplace(dquery, dpre);
    add_inplace(grads.U_a, matmul_tn(ann.h[static_cast<std::size_t>(j)], dpre));
    add_inplace(dann[static_cast<std::size_t>(j)], matmul_nt(dpre, p.U_a));
  }

  add_inplace(grads.W_a, matmul_tn(cache.s_prev1, dquery));
  add_inplace(ds_prev1, matmul_nt(dquery, p.W_a));
  add_inplace(grads.W_y, matmul_tn(cache.y_prev, dquery));
  add_inplace(dy_prev, matmul_nt(dquery, p.W_y));
}

}  // namespace lau
