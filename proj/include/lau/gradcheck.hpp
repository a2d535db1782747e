// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Finite-difference audit of every hand-derived backward pass. Each
// component builds a fresh micro problem per seed, computes the analytic
// gradients, then probes every parameter and input coordinate with central
// differences and reports the worst relative error seen. The probes call
// only forward code, so the two sides are genuinely independent.
//
// Components: both cells over a short sequence, the two-layer alternating
// stack with and without residual connections, attention (including the
// extra upstream-alpha path), and the complete model loss for both cell
// kinds. `inject_fault` deliberately corrupts one analytic model gradient
// so callers can verify the audit actually detects broken gradients.

#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "lau/model.hpp"
#include "lau/optimizer.hpp"

namespace lau {

struct GradCheckOptions {
  int seeds = 20;
  uint64_t seed0 = 1;
  double threshold = 1e-4;
  double fd_step = 1e-5;
  bool inject_fault = false;  // corrupt one model gradient; the audit must fail
};

struct GradCheckReport {
  std::string component;
  double max_rel_error = 0;
  int seeds = 0;
  bool pass = false;
};

namespace detail {

inline double dot_all(const Tensor<double>& a, const Tensor<double>& b) {
  check(a.same_shape(b), "dot_all: shape mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

// swap a probe value into a live tensor, evaluate, restore
template <class F>
double with_probe(Tensor<double>& slot, const Tensor<double>& probe, F&& eval) {
  const Tensor<double> saved = slot;
  slot = probe;
  const double v = eval();
  slot = saved;
  return v;
}

// worst relative FD error across a list of (parameter, analytic-grad) pairs
template <class F>
double sweep(const std::vector<Tensor<double>*>& params,
             const std::vector<Tensor<double>*>& grads, double step, F&& eval) {
  check(params.size() == grads.size(), "gradcheck: parameter/gradient list mismatch");
  double worst = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<double> fd = finite_diff_grad(
        [&](const Tensor<double>& probe) { return with_probe(*params[i], probe, eval); },
        *params[i], step);
    worst = std::max(worst, max_rel_error(*grads[i], fd));
  }
  return worst;
}

inline std::vector<Tensor<double>*> cell_tensor_ptrs(CellParams<double>& p) {
  std::vector<Tensor<double>*> out;
  for_each_cell_tensor(p, [&](const char*, Tensor<double>& t) { out.push_back(&t); });
  return out;
}

// one recurrent cell unrolled for three steps; loss is a fixed random linear
// functional of every step's state so all paths carry gradient
inline double gc_cell(CellKind kind, uint64_t seed, double step) {
  const int B = 2, I = 4, H = 5, T = 3;
  Rng rng(seed);
  CellParams<double> p = make_cell_params<double>(kind, I, H, rng, 0.4);
  std::vector<Tensor<double>> xs, cs;
  for (int t = 0; t < T; ++t) {
    xs.push_back(gaussian_init<double>(B, I, rng, 1.0));
    cs.push_back(gaussian_init<double>(B, H, rng, 1.0));
  }
  Tensor<double> h0 = gaussian_init<double>(B, H, rng, 1.0);

  const auto loss = [&]() {
    Tensor<double> h = h0;
    double s = 0;
    for (int t = 0; t < T; ++t) {
      StepCache<double> cache;
      h = cell_forward(p, xs[static_cast<std::size_t>(t)], h, cache);
      s += dot_all(cs[static_cast<std::size_t>(t)], h);
    }
    return s;
  };

  std::vector<StepCache<double>> caches(static_cast<std::size_t>(T));
  {
    Tensor<double> h = h0;
    for (int t = 0; t < T; ++t)
      h = cell_forward(p, xs[static_cast<std::size_t>(t)], h, caches[static_cast<std::size_t>(t)]);
  }
  CellParams<double> grads = zeros_like(p);
  std::vector<Tensor<double>> dxs(static_cast<std::size_t>(T), Tensor<double>(B, I));
  Tensor<double> dh_run(B, H);
  for (int t = T - 1; t >= 0; --t) {
    const Tensor<double> dh = add(cs[static_cast<std::size_t>(t)], dh_run);
    Tensor<double> dh_prev(B, H);
    cell_backward(p, caches[static_cast<std::size_t>(t)], dh, dxs[static_cast<std::size_t>(t)],
                  dh_prev, grads);
    dh_run = std::move(dh_prev);
  }

  double worst = sweep(cell_tensor_ptrs(p), cell_tensor_ptrs(grads), step, loss);
  for (int t = 0; t < T; ++t) {
    Tensor<double> fd = finite_diff_grad(
        [&](const Tensor<double>& probe) {
          return with_probe(xs[static_cast<std::size_t>(t)], probe, loss);
        },
        xs[static_cast<std::size_t>(t)], step);
    worst = std::max(worst, max_rel_error(dxs[static_cast<std::size_t>(t)], fd));
  }
  Tensor<double> fdh =
      finite_diff_grad([&](const Tensor<double>& probe) { return with_probe(h0, probe, loss); },
                       h0, step);
  worst = std::max(worst, max_rel_error(dh_run, fdh));
  return worst;
}

inline double gc_stack(CellKind kind, bool residual, uint64_t seed, double step) {
  const int B = 2, I = 4, H = 5, T = 3;
  StackConfig cfg;
  cfg.num_layers = 2;
  cfg.hidden_dim = H;
  cfg.cell_kind = kind;
  cfg.direction = DirectionPolicy::kAlternating;
  cfg.residual = residual;
  Rng rng(seed);
  std::vector<CellParams<double>> layers = make_stack_params<double>(cfg, I, rng, 0.4);
  std::vector<Tensor<double>> inputs, cs;
  for (int t = 0; t < T; ++t) {
    inputs.push_back(gaussian_init<double>(B, I, rng, 1.0));
    cs.push_back(gaussian_init<double>(B, H, rng, 1.0));
  }

  const auto loss = [&]() {
    StackActivations<double> acts = stack_forward(layers, cfg, inputs);
    double s = 0;
    for (int t = 0; t < T; ++t)
      s += dot_all(cs[static_cast<std::size_t>(t)],
                   acts.outputs.back()[static_cast<std::size_t>(t)]);
    return s;
  };

  StackActivations<double> acts = stack_forward(layers, cfg, inputs);
  std::vector<CellParams<double>> grads = zeros_like(layers);
  std::vector<Tensor<double>> dins = stack_backward(layers, cfg, acts, cs, grads);

  double worst = 0;
  for (std::size_t l = 0; l < layers.size(); ++l)
    worst = std::max(worst, sweep(cell_tensor_ptrs(layers[l]), cell_tensor_ptrs(grads[l]), step,
                                  loss));
  for (int t = 0; t < T; ++t) {
    Tensor<double> fd = finite_diff_grad(
        [&](const Tensor<double>& probe) {
          return with_probe(inputs[static_cast<std::size_t>(t)], probe, loss);
        },
        inputs[static_cast<std::size_t>(t)], step);
    worst = std::max(worst, max_rel_error(dins[static_cast<std::size_t>(t)], fd));
  }
  return worst;
}

inline double gc_attention(uint64_t seed, double step) {
  const int B = 2, H = 5, E = 4, A = 3, N = 3;
  Rng rng(seed);
  AttentionParams<double> p = make_attention_params<double>(H, E, A, rng, 0.4);
  std::vector<Tensor<double>> hs;
  for (int j = 0; j < N; ++j) hs.push_back(gaussian_init<double>(B, H, rng, 1.0));
  Tensor<double> s = gaussian_init<double>(B, H, rng, 1.0);
  Tensor<double> y = gaussian_init<double>(B, E, rng, 1.0);
  Tensor<double> cw = gaussian_init<double>(B, H, rng, 1.0);  // weight on the context
  Tensor<double> aw = gaussian_init<double>(B, N, rng, 1.0);  // weight on alpha

  const auto loss = [&]() {
    EncoderAnnotations<double> ann = make_annotations(p, hs);
    AttendCache<double> cache;
    Tensor<double> c = attend(p, s, y, ann, cache);
    return dot_all(cw, c) + dot_all(aw, cache.alpha);
  };

  EncoderAnnotations<double> ann = make_annotations(p, hs);
  AttendCache<double> cache;
  attend(p, s, y, ann, cache);
  AttentionParams<double> grads = zeros_like(p);
  Tensor<double> ds(B, H), dy(B, E);
  std::vector<Tensor<double>> dann(static_cast<std::size_t>(N), Tensor<double>(B, H));
  attend_backward(p, ann, cache, cw, &aw, ds, dy, dann, grads);

  std::vector<Tensor<double>*> ps, gs;
  for_each_attention_tensor(p, [&](const char*, Tensor<double>& t) { ps.push_back(&t); });
  for_each_attention_tensor(grads, [&](const char*, Tensor<double>& t) { gs.push_back(&t); });
  double worst = sweep(ps, gs, step, loss);

  Tensor<double> fds =
      finite_diff_grad([&](const Tensor<double>& probe) { return with_probe(s, probe, loss); }, s,
                       step);
  worst = std::max(worst, max_rel_error(ds, fds));
  Tensor<double> fdy =
      finite_diff_grad([&](const Tensor<double>& probe) { return with_probe(y, probe, loss); }, y,
                       step);
  worst = std::max(worst, max_rel_error(dy, fdy));
  for (int j = 0; j < N; ++j) {
    Tensor<double> fd = finite_diff_grad(
        [&](const Tensor<double>& probe) {
          return with_probe(hs[static_cast<std::size_t>(j)], probe, loss);
        },
        hs[static_cast<std::size_t>(j)], step);
    worst = std::max(worst, max_rel_error(dann[static_cast<std::size_t>(j)], fd));
  }
  return worst;
}

// full teacher-forced loss on a two-sentence micro batch
inline double gc_model(CellKind kind, uint64_t seed, double step, bool inject_fault) {
  ModelConfig cfg;
  cfg.src_vocab = 7;
  cfg.tgt_vocab = 7;
  cfg.embed_dim = 4;
  cfg.hidden_dim = 5;
  cfg.enc_layers = 2;
  cfg.dec_layers = 2;
  cfg.cell_kind = kind;
  cfg.residual = false;
  cfg.dropout = 0.0;
  cfg.attn_dim = 3;
  Rng rng(seed);
  ModelParams<double> m = make_model<double>(cfg, rng, 0.4);

  Batch batch;
  const auto sentence = [&](int len) {
    std::vector<int32_t> ids;
    for (int i = 0; i < len; ++i)
      ids.push_back(kUnkId + static_cast<int32_t>(rng.below(
                                 static_cast<uint64_t>(cfg.src_vocab - kUnkId))));
    ids.push_back(kEosId);
    return ids;
  };
  for (int b = 0; b < 2; ++b) {
    batch.src.push_back(sentence(3));
    batch.tgt.push_back(sentence(3));
  }

  const auto loss = [&]() {
    ModelCaches<double> caches;
    return forward_loss(m, batch, caches);
  };

  ModelCaches<double> caches;
  forward_loss(m, batch, caches);
  ModelParams<double> grads = zeros_like(m);
  model_backward(m, caches, grads);
  if (inject_fault) grads.W_o(0, 0) += 0.5;

  return sweep(tensor_ptrs(m), tensor_ptrs(grads), step, loss);
}

}  // namespace detail

inline std::vector<GradCheckReport> run_gradcheck(const GradCheckOptions& opt = {}) {
  check(opt.seeds >= 1, "gradcheck: seeds must be >= 1");
  check(opt.threshold > 0, "gradcheck: threshold must be positive");
  check(opt.fd_step > 0, "gradcheck: fd_step must be positive");

  std::vector<GradCheckReport> out;
  const auto run = [&](const std::string& name, auto&& fn) {
    GradCheckReport r;
    r.component = name;
    r.seeds = opt.seeds;
    const uint64_t base = mix_seed(opt.seed0, 9000001ull + out.size());
    for (int s = 0; s < opt.seeds; ++s)
      r.max_rel_error = std::max(r.max_rel_error, fn(mix_seed(base, static_cast<uint64_t>(s))));
    r.pass = r.max_rel_error < opt.threshold;
    out.push_back(std::move(r));
  };

  run("cell_gru", [&](uint64_t s) { return detail::gc_cell(CellKind::kGru, s, opt.fd_step); });
  run("cell_lau", [&](uint64_t s) { return detail::gc_cell(CellKind::kLau, s, opt.fd_step); });
  run("stack_gru",
      [&](uint64_t s) { return detail::gc_stack(CellKind::kGru, false, s, opt.fd_step); });
  run("stack_lau",
      [&](uint64_t s) { return detail::gc_stack(CellKind::kLau, false, s, opt.fd_step); });
  run("stack_gru_residual",
      [&](uint64_t s) { return detail::gc_stack(CellKind::kGru, true, s, opt.fd_step); });
  run("stack_lau_residual",
      [&](uint64_t s) { return detail::gc_stack(CellKind::kLau, true, s, opt.fd_step); });
  run("attention", [&](uint64_t s) { return detail::gc_attention(s, opt.fd_step); });
  run("model_gru",
      [&](uint64_t s) { return detail::gc_model(CellKind::kGru, s, opt.fd_step, false); });
  run("model_lau",
      [&](uint64_t s) { return detail::gc_model(CellKind::kLau, s, opt.fd_step, opt.inject_fault); });
  return out;
}

inline bool gradcheck_passed(const std::vector<GradCheckReport>& reports) {
  if (reports.empty()) return false;
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

inline std::string gradcheck_text(const std::vector<GradCheckReport>& reports) {
  std::string out;
  char line[128];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "component=%s max_rel_error=%.3e seeds=%d status=%s\n",
                  r.component.c_str(), r.max_rel_error, r.seeds, r.pass ? "pass" : "fail");
    out += line;
  }
  out += gradcheck_passed(reports) ? "gradcheck=pass\n" : "gradcheck=fail\n";
  return out;
}

}  // namespace lau
