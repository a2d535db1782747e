// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Beam search over a trained model, one sentence at a time.
//
// Protocol, pinned because every detail is observable in the tests:
//  * Each step expands every live hypothesis over the full vocabulary and
//    keeps the top beam_width pool entries by CUMULATIVE log-probability.
//  * A selected entry whose token is EOS is finished and set aside; it is
//    never re-expanded. The remaining selected entries form the next live
//    set (so the live set can shrink and regrow).
//  * EOS is masked at the first step: the empty translation is never a
//    candidate (score of the empty sequence is -inf by convention).
//  * Hypotheses still live at max_len are finished as-is ("cutoff").
//  * Final ranking is by length-normalized score logprob / length, where
//    length counts generated tokens INCLUDING the terminating EOS.
//  * Ties break deterministically: pool selection prefers the earlier live
//    hypothesis, then the smaller token id; final ranking prefers the
//    earlier-finished hypothesis.
//
// beam_width == 1 reduces exactly to greedy argmax decoding.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "lau/model.hpp"

namespace lau {

template <class T>
struct Hypothesis {
  std::vector<int32_t> tokens;  // generated tokens; may end with kEosId
  double logprob = 0.0;
  std::vector<Tensor<T>> states;  // decoder state after the last step
  bool ended_with_eos = false;

  int length() const { return static_cast<int>(tokens.size()); }
  double normalized() const {
    return tokens.empty() ? -std::numeric_limits<double>::infinity()
                          : logprob / static_cast<double>(tokens.size());
  }
};

struct BeamResult {
  std::vector<int32_t> tokens;  // best hypothesis, EOS stripped
  double score = -std::numeric_limits<double>::infinity();  // normalized
  double logprob = 0.0;
  int length = 0;  // generated length including EOS when present
  bool ended_with_eos = false;
};

inline int default_max_decode_len(std::size_t src_len) {
  return static_cast<int>(2 * src_len + 5);
}

namespace detail {

template <class T>
std::vector<Tensor<T>> initial_decoder_states(const ModelParams<T>& m) {
  std::vector<Tensor<T>> states;
  for (int l = 0; l < m.cfg.dec_layers; ++l) states.emplace_back(1, m.cfg.hidden_dim);
  return states;
}

// log-softmax of the single logits row of a batch-1 decode step
template <class T>
std::vector<double> step_logprobs(const Tensor<T>& logits) {
  Tensor<T> lsm = log_softmax_row(logits);
  std::vector<double> out(lsm.size());
  for (std::size_t v = 0; v < lsm.size(); ++v) out[v] = static_cast<double>(lsm.data()[v]);
  return out;
}

}  // namespace detail

template <class T>
BeamResult beam_search(const ModelParams<T>& m, const std::vector<int32_t>& src_ids,
                       int beam_width, int max_len = 0) {
  check(!src_ids.empty(), "beam_search: empty source");
  check(beam_width >= 1, "beam_search: beam_width must be positive");
  if (max_len <= 0) max_len = default_max_decode_len(src_ids.size());

  EncoderAnnotations<T> ann = encode(m, {src_ids});

  std::vector<Hypothesis<T>> live(1);
  live[0].states = detail::initial_decoder_states(m);
  std::vector<Hypothesis<T>> finished;

  const int vocab = m.cfg.tgt_vocab;
  for (int step = 1; step <= max_len && !live.empty(); ++step) {
    // (live index, token, cumulative logprob); states are shared per live
    // hypothesis because the recurrent update depends only on y_{t-1}
    struct PoolEntry {
      int hyp;
      int32_t token;
      double logprob;
    };
    std::vector<PoolEntry> pool;
    pool.reserve(live.size() * static_cast<std::size_t>(vocab));
    std::vector<std::vector<Tensor<T>>> next_states(live.size());

    for (std::size_t h = 0; h < live.size(); ++h) {
      std::vector<int32_t> y_prev = {live[h].tokens.empty() ? kBosId : live[h].tokens.back()};
      DecodeStepResult<T> out = decode_step(m, live[h].states, y_prev, ann);
      next_states[h] = std::move(out.states);
      std::vector<double> logp = detail::step_logprobs(out.logits);
      for (int32_t v = 0; v < vocab; ++v) {
        if (step == 1 && v == kEosId) continue;
        pool.push_back({static_cast<int>(h), v, live[h].logprob + logp[static_cast<std::size_t>(v)]});
      }
    }

    std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(beam_width), pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(),
                      [](const PoolEntry& a, const PoolEntry& b) {
                        if (a.logprob != b.logprob) return a.logprob > b.logprob;
                        if (a.hyp != b.hyp) return a.hyp < b.hyp;
                        return a.token < b.token;
                      });

    std::vector<Hypothesis<T>> next_live;
    for (std::size_t i = 0; i < keep; ++i) {
      const PoolEntry& e = pool[i];
      Hypothesis<T> ext;
      ext.tokens = live[static_cast<std::size_t>(e.hyp)].tokens;
      ext.tokens.push_back(e.token);
      ext.logprob = e.logprob;
      ext.states = next_states[static_cast<std::size_t>(e.hyp)];
      if (e.token == kEosId) {
        ext.ended_with_eos = true;
        finished.push_back(std::move(ext));
      } else {
        next_live.push_back(std::move(ext));
      }
    }
    live = std::move(next_live);
  }
  // anything still live ran into the length cutoff
  for (auto& h : live) finished.push_back(std::move(h));

  check(!finished.empty(), "beam_search: no finished hypothesis");
  std::size_t best = 0;
  for (std::size_t i = 1; i < finished.size(); ++i)
    if (finished[i].normalized() > finished[best].normalized()) best = i;

  BeamResult result;
  result.logprob = finished[best].logprob;
  result.score = finished[best].normalized();
  result.length = finished[best].length();
  result.ended_with_eos = finished[best].ended_with_eos;
  result.tokens = std::move(finished[best].tokens);
  if (result.ended_with_eos) result.tokens.pop_back();
  return result;
}

// straight argmax decoding, written independently of beam_search so the two
// can cross-check each other
template <class T>
std::vector<int32_t> greedy_decode(const ModelParams<T>& m, const std::vector<int32_t>& src_ids,
                                   int max_len = 0) {
  check(!src_ids.empty(), "greedy_decode: empty source");
  if (max_len <= 0) max_len = default_max_decode_len(src_ids.size());

  EncoderAnnotations<T> ann = encode(m, {src_ids});
  std::vector<Tensor<T>> states = detail::initial_decoder_states(m);

  std::vector<int32_t> tokens;
  for (int step = 1; step <= max_len; ++step) {
    std::vector<int32_t> y_prev = {tokens.empty() ? kBosId : tokens.back()};
    DecodeStepResult<T> out = decode_step(m, states, y_prev, ann);
    states = std::move(out.states);
    int32_t best = -1;
    T best_val = 0;
    for (int32_t v = 0; v < m.cfg.tgt_vocab; ++v) {
      if (step == 1 && v == kEosId) continue;
      T val = out.logits(0, v);
      if (best < 0 || val > best_val) {
        best = v;
        best_val = val;
      }
    }
    if (best == kEosId) break;
    tokens.push_back(best);
  }
  return tokens;
}

// Attention weights for a fixed output: re-runs the decoder teacher-forced on
// `out_tokens` (EOS already stripped) and records one alpha row per target
// step, each of src_len weights. Row t answers "where did the model look while
// producing out_tokens[t]" — plus one final row for the EOS decision.
template <class T>
std::vector<std::vector<T>> alignment_for(const ModelParams<T>& m,
                                          const std::vector<int32_t>& src_ids,
                                          const std::vector<int32_t>& out_tokens) {
  check(!src_ids.empty(), "alignment_for: empty source");
  EncoderAnnotations<T> ann = encode(m, {src_ids});
  std::vector<Tensor<T>> states = detail::initial_decoder_states(m);

  std::vector<std::vector<T>> rows;
  for (std::size_t t = 0; t <= out_tokens.size(); ++t) {
    std::vector<int32_t> y_prev = {t == 0 ? kBosId : out_tokens[t - 1]};
    DecodeStepResult<T> out = decode_step(m, states, y_prev, ann);
    states = std::move(out.states);
    std::vector<T> row(static_cast<std::size_t>(out.alpha.cols()));
    for (int j = 0; j < out.alpha.cols(); ++j) row[static_cast<std::size_t>(j)] = out.alpha(0, j);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace lau
