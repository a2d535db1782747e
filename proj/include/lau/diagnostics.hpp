// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Gradient-flow probes. Both probes build a freshly initialized stack per
// trial, push a random input sequence through it, backpropagate from a probe
// loss, and report ratios of input-gradient norms:
//
//   time flow:  L = sum of the top layer's state at the last step;
//               ratio(k) = ||dL/dx_{T-k}||_2 / ||dL/dx_T||_2
//   depth flow: same loss on an L-layer stack;
//               ratio = ||dL/d(layer-1 input, all steps)||_2 / ||dL/d(top output)||_2
//
// Medians are reported alongside means because the samples are heavy-tailed
// at random init. Matched seeding: the input stream for trial i is identical
// across cell kinds (inputs and parameters come from separate derived
// streams), so GRU/LAU comparisons see the same probe signals.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "lau/stack.hpp"

namespace lau {

struct FlowProbe {
  int hidden_dim = 64;
  int input_dim = 64;
  int seq_len = 51;  // must exceed the largest separation
  std::vector<int> separations = {1, 5, 10, 20, 50};
  std::vector<int> depths = {2, 4, 8};
  int num_layers = 1;  // time-flow stack depth
  DirectionPolicy direction = DirectionPolicy::kFixedForward;
  bool residual = false;
  int trials = 100;
  uint64_t seed = 1;
  double stddev = 0.04;
  // Optional per-trial parameter surgery (applied after the random draw).
  // This is the hook the closed-form degenerate tests use; normal runs leave
  // it empty.
  std::function<void(std::vector<CellParams<double>>&)> param_surgery;
};

struct FlowReport {
  CellKind kind = CellKind::kGru;
  bool depth_probe = false;  // labels are depths rather than separations
  bool residual = false;
  std::vector<int> labels;
  std::vector<double> median_ratio;
  std::vector<double> mean_ratio;
  std::vector<std::vector<double>> samples;  // samples[label][trial]
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// one probe trial: forward a random sequence, inject ones at the top layer's
// last-step output, return the per-step input gradients
inline std::vector<Tensor<double>> probe_input_grads(const FlowProbe& probe, CellKind kind,
                                                     int num_layers, bool residual,
                                                     uint64_t trial) {
  Rng in_rng(mix_seed(probe.seed, trial * 2));
  Rng par_rng(mix_seed(probe.seed, trial * 2 + 1));

  StackConfig sc{num_layers, probe.hidden_dim, kind, probe.direction, residual};
  auto params = make_stack_params<double>(sc, probe.input_dim, par_rng, probe.stddev);
  if (probe.param_surgery) probe.param_surgery(params);

  std::vector<Tensor<double>> inputs;
  inputs.reserve(static_cast<std::size_t>(probe.seq_len));
  for (int t = 0; t < probe.seq_len; ++t)
    inputs.push_back(gaussian_init<double>(1, probe.input_dim, in_rng, 1.0));

  auto acts = stack_forward(params, sc, inputs);
  std::vector<Tensor<double>> dout(static_cast<std::size_t>(probe.seq_len));
  for (int t = 0; t < probe.seq_len; ++t) dout[static_cast<std::size_t>(t)] = Tensor<double>(1, probe.hidden_dim);
  for (int c = 0; c < probe.hidden_dim; ++c) dout.back()(0, c) = 1.0;

  auto grads = zeros_like(params);
  auto dins = stack_backward(params, sc, acts, dout, grads);
  for (const auto& g : dins) ensure_finite(g, "flow probe input gradient");
  return dins;
}

}  // namespace detail

inline FlowReport measure_time_flow(const FlowProbe& probe, CellKind kind) {
  check(probe.trials >= 1, "measure_time_flow: trials must be >= 1");
  check(!probe.separations.empty(), "measure_time_flow: no separations");
  for (int k : probe.separations)
    check(k >= 0 && k < probe.seq_len, "measure_time_flow: separation outside the sequence");

  FlowReport rep;
  rep.kind = kind;
  rep.residual = probe.residual;
  rep.labels = probe.separations;
  rep.samples.assign(probe.separations.size(), {});

  for (uint64_t trial = 0; trial < static_cast<uint64_t>(probe.trials); ++trial) {
    auto dins = detail::probe_input_grads(probe, kind, probe.num_layers, probe.residual, trial);
    const std::size_t last = dins.size() - 1;
    const double denom = l2_norm(dins[last]);
    check(denom > 0.0, "measure_time_flow: zero gradient at the probe step");
    for (std::size_t i = 0; i < probe.separations.size(); ++i) {
      const std::size_t at = last - static_cast<std::size_t>(probe.separations[i]);
      rep.samples[i].push_back(l2_norm(dins[at]) / denom);
    }
  }
  for (const auto& s : rep.samples) {
    rep.median_ratio.push_back(detail::median_of(s));
    rep.mean_ratio.push_back(detail::mean_of(s));
  }
  return rep;
}

inline FlowReport measure_depth_flow(const FlowProbe& probe, CellKind kind, bool residual) {
  check(probe.trials >= 1, "measure_depth_flow: trials must be >= 1");
  check(!probe.depths.empty(), "measure_depth_flow: no depths");
  for (int L : probe.depths) check(L >= 1, "measure_depth_flow: depth must be >= 1");

  FlowReport rep;
  rep.kind = kind;
  rep.depth_probe = true;
  rep.residual = residual;
  rep.labels = probe.depths;
  rep.samples.assign(probe.depths.size(), {});

  // the injected upstream gradient is ones over the top layer's final state
  const double dout_norm = std::sqrt(static_cast<double>(probe.hidden_dim));
  for (std::size_t i = 0; i < probe.depths.size(); ++i) {
    for (uint64_t trial = 0; trial < static_cast<uint64_t>(probe.trials); ++trial) {
      auto dins = detail::probe_input_grads(probe, kind, probe.depths[i], residual, trial);
      double sq = 0;
      for (const auto& g : dins) sq += sq_norm(g);
      rep.samples[i].push_back(std::sqrt(sq) / dout_norm);
    }
    rep.median_ratio.push_back(detail::median_of(rep.samples[i]));
    rep.mean_ratio.push_back(detail::mean_of(rep.samples[i]));
  }
  return rep;
}

// key=value lines, one per aggregate
inline std::string flow_kv(const FlowReport& rep) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof buf, "cell=%s\n", cell_kind_name(rep.kind));
  out += buf;
  std::snprintf(buf, sizeof buf, "probe=%s\n", rep.depth_probe ? "depth" : "time");
  out += buf;
  std::snprintf(buf, sizeof buf, "residual=%d\n", rep.residual ? 1 : 0);
  out += buf;
  const char* prefix = rep.depth_probe ? "L" : "k";
  for (std::size_t i = 0; i < rep.labels.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%d_median=%.9e\n", prefix, rep.labels[i],
                  rep.median_ratio[i]);
    out += buf;
    std::snprintf(buf, sizeof buf, "%s%d_mean=%.9e\n", prefix, rep.labels[i], rep.mean_ratio[i]);
    out += buf;
  }
  return out;
}

// plot-ready table: separation (or depth), cell, median_ratio, mean_ratio
inline std::string flow_tsv(const FlowReport& rep, bool header = true) {
  char buf[160];
  std::string out;
  if (header) out += "probe\tcell\tresidual\tseparation\tmedian_ratio\tmean_ratio\n";
  for (std::size_t i = 0; i < rep.labels.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s\t%s\t%d\t%d\t%.9e\t%.9e\n",
                  rep.depth_probe ? "depth" : "time", cell_kind_name(rep.kind),
                  rep.residual ? 1 : 0, rep.labels[i], rep.median_ratio[i], rep.mean_ratio[i]);
    out += buf;
  }
  return out;
}

}  // namespace lau
