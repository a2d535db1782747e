// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// The full network: source/target embeddings, an alternating-direction
// encoder stack, additive attention with previous-word feeding, a
// fixed-forward decoder stack fed [c_t, y_{t-1}], and a softmax readout
// (logits = top_state * W_o, no bias).
//
// Training uses teacher forcing with mean per-token negative log-likelihood,
// so gradient magnitudes do not scale with sentence length. Dropout (inverted
// scaling) applies to the top decoder state right before W_o, and only when a
// dropout stream is supplied — evaluation paths never see it.
//
// The attention query is the FIRST decoder layer's state from the previous
// step; at t=0 that state is zero and the previous word is BOS. Batches are
// length-bucketed (every row shares src/tgt lengths), which keeps the whole
// backward pass mask-free.

#pragma once

#include <vector>

#include "lau/attention.hpp"
#include "lau/stack.hpp"

namespace lau {

// reserved vocabulary ids, shared across the toolkit
inline constexpr int32_t kPadId = 0;
inline constexpr int32_t kBosId = 1;
inline constexpr int32_t kEosId = 2;
inline constexpr int32_t kUnkId = 3;
inline constexpr int32_t kNumSpecialTokens = 4;

struct ModelConfig {
  int src_vocab = 0;
  int tgt_vocab = 0;
  int embed_dim = 512;
  int hidden_dim = 512;
  int enc_layers = 4;
  int dec_layers = 4;
  CellKind cell_kind = CellKind::kLau;
  bool residual = false;
  double dropout = 0.5;
  int attn_dim = 0;  // 0 means hidden_dim

  int effective_attn_dim() const { return attn_dim > 0 ? attn_dim : hidden_dim; }
};

inline StackConfig encoder_stack_config(const ModelConfig& c) {
  StackConfig s;
  s.num_layers = c.enc_layers;
  s.hidden_dim = c.hidden_dim;
  s.cell_kind = c.cell_kind;
  s.direction = DirectionPolicy::kAlternating;
  s.residual = c.residual;
  return s;
}

inline StackConfig decoder_stack_config(const ModelConfig& c) {
  StackConfig s;
  s.num_layers = c.dec_layers;
  s.hidden_dim = c.hidden_dim;
  s.cell_kind = c.cell_kind;
  s.direction = DirectionPolicy::kFixedForward;
  s.residual = c.residual;
  return s;
}

template <class T = double>
struct ModelParams {
  ModelConfig cfg;
  Tensor<T> src_emb;  // src_vocab x embed
  Tensor<T> tgt_emb;  // tgt_vocab x embed
  std::vector<CellParams<T>> encoder;
  std::vector<CellParams<T>> decoder;  // layer 1 input = hidden (context) + embed
  AttentionParams<T> attn;
  Tensor<T> W_o;  // hidden x tgt_vocab
};

// Visits every parameter tensor with a stable, checkpoint-facing name
// (enc.0.W_xh, dec.1.b_z, attn.v_a, ...). Order is part of the format.
template <class M, class F>
void for_each_model_tensor(M& m, F&& f) {
  f("src_emb", m.src_emb);
  f("tgt_emb", m.tgt_emb);
  for (std::size_t l = 0; l < m.encoder.size(); ++l) {
    const std::string prefix = "enc." + std::to_string(l) + ".";
    for_each_cell_tensor(m.encoder[l], [&](const char* name, auto& t) { f(prefix + name, t); });
  }
  for (std::size_t l = 0; l < m.decoder.size(); ++l) {
    const std::string prefix = "dec." + std::to_string(l) + ".";
    for_each_cell_tensor(m.decoder[l], [&](const char* name, auto& t) { f(prefix + name, t); });
  }
  for_each_attention_tensor(m.attn, [&](const char* name, auto& t) {
    f(std::string("attn.") + name, t);
  });
  f("W_o", m.W_o);
}

template <class T = double>
ModelParams<T> make_model(const ModelConfig& cfg, Rng& rng, double stddev = 0.04) {
  check(cfg.src_vocab > kNumSpecialTokens && cfg.tgt_vocab > kNumSpecialTokens,
        "make_model: vocab must exceed the reserved specials");
  check(cfg.embed_dim > 0 && cfg.hidden_dim > 0, "make_model: bad dims");
  check(cfg.enc_layers >= 1 && cfg.dec_layers >= 1, "make_model: need at least one layer");
  check(cfg.dropout >= 0.0 && cfg.dropout < 1.0, "make_model: dropout must be in [0,1)");
  ModelParams<T> m;
  m.cfg = cfg;
  m.src_emb = gaussian_init<T>(cfg.src_vocab, cfg.embed_dim, rng, stddev);
  m.tgt_emb = gaussian_init<T>(cfg.tgt_vocab, cfg.embed_dim, rng, stddev);
  m.encoder = make_stack_params<T>(encoder_stack_config(cfg), cfg.embed_dim, rng, stddev);
  m.decoder =
      make_stack_params<T>(decoder_stack_config(cfg), cfg.hidden_dim + cfg.embed_dim, rng, stddev);
  m.attn = make_attention_params<T>(cfg.hidden_dim, cfg.embed_dim, cfg.effective_attn_dim(), rng,
                                    stddev);
  m.W_o = gaussian_init<T>(cfg.hidden_dim, cfg.tgt_vocab, rng, stddev);
  return m;
}

template <class T>
ModelParams<T> zeros_like(const ModelParams<T>& like) {
  ModelParams<T> g = like;
  for_each_model_tensor(g, [](const std::string&, Tensor<T>& t) {
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = T(0);
  });
  return g;
}

// One length-bucketed training batch. Every source sentence shares one
// length, every target sentence shares one (possibly different) length, and
// both already end with EOS. BOS is injected by the teacher-forcing loop, it
// is not stored.
struct Batch {
  std::vector<std::vector<int32_t>> src;
  std::vector<std::vector<int32_t>> tgt;

  int size() const { return static_cast<int>(src.size()); }
  int src_len() const { return src.empty() ? 0 : static_cast<int>(src[0].size()); }
  int tgt_len() const { return tgt.empty() ? 0 : static_cast<int>(tgt[0].size()); }
};

inline void validate_batch(const Batch& b, const ModelConfig& cfg) {
  check(!b.src.empty() && b.src.size() == b.tgt.size(), "batch: size mismatch");
  for (const auto& s : b.src) {
    check(s.size() == b.src[0].size() && !s.empty(), "batch: unequal source lengths");
    for (int32_t id : s) check(id >= 0 && id < cfg.src_vocab, "batch: source id out of range");
  }
  for (const auto& t : b.tgt) {
    check(t.size() == b.tgt[0].size() && !t.empty(), "batch: unequal target lengths");
    for (int32_t id : t) check(id >= 0 && id < cfg.tgt_vocab, "batch: target id out of range");
  }
}

// ---------------------------------------------------------------------------
// forward

template <class T = double>
struct StepRecord {
  AttendCache<T> attn;
  std::vector<StepCache<T>> stack;
  Tensor<T> top;    // top decoder output, pre-dropout
  Tensor<T> mask;   // dropout mask (empty when off)
  Tensor<T> probs;  // softmax over the target vocabulary
  Tensor<T> y_emb;
  std::vector<int32_t> y_prev_ids, gold_ids;
};

template <class T = double>
struct ModelCaches {
  std::vector<std::vector<int32_t>> src_step_ids;  // per position, the batch column
  std::vector<Tensor<T>> src_emb_steps;
  StackActivations<T> enc_acts;
  EncoderAnnotations<T> ann;
  std::vector<StepRecord<T>> steps;
  int batch = 0;
  double token_count = 0;
};

template <class T>
EncoderAnnotations<T> encode(const ModelParams<T>& m,
                             const std::vector<std::vector<int32_t>>& src,
                             ModelCaches<T>* caches = nullptr) {
  check(!src.empty() && !src[0].empty(), "encode: empty batch");
  const int batch = static_cast<int>(src.size());
  const int n = static_cast<int>(src[0].size());

  std::vector<std::vector<int32_t>> step_ids(static_cast<std::size_t>(n));
  std::vector<Tensor<T>> emb_steps;
  emb_steps.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    std::vector<int32_t> ids(static_cast<std::size_t>(batch));
    for (int b = 0; b < batch; ++b) {
      check(static_cast<int>(src[static_cast<std::size_t>(b)].size()) == n,
            "encode: unequal source lengths");
      ids[static_cast<std::size_t>(b)] = src[static_cast<std::size_t>(b)][static_cast<std::size_t>(t)];
    }
    emb_steps.push_back(lookup_rows(m.src_emb, ids));
    step_ids[static_cast<std::size_t>(t)] = std::move(ids);
  }

  auto acts = stack_forward(m.encoder, encoder_stack_config(m.cfg), emb_steps);
  auto ann = make_annotations(m.attn, acts.outputs.back());
  if (caches) {
    caches->src_step_ids = std::move(step_ids);
    caches->src_emb_steps = std::move(emb_steps);
    caches->enc_acts = std::move(acts);
    caches->ann = ann;
    caches->batch = batch;
  }
  return ann;
}

template <class T = double>
struct DecodeStepResult {
  std::vector<Tensor<T>> states;  // per-layer raw states after the step
  Tensor<T> logits;               // batch x tgt_vocab
  Tensor<T> alpha;                // batch x src_len
};

// One inference step of the decoder (no dropout). `record`, when given,
// captures the caches for training backward.
template <class T>
DecodeStepResult<T> decode_step(const ModelParams<T>& m, const std::vector<Tensor<T>>& prev_states,
                                const std::vector<int32_t>& y_prev_ids,
                                const EncoderAnnotations<T>& ann, StepRecord<T>* record = nullptr,
                                const Tensor<T>* dropout_mask = nullptr) {
  check(static_cast<int>(prev_states.size()) == m.cfg.dec_layers,
        "decode_step: state count mismatch");
  DecodeStepResult<T> out;
  StepRecord<T> local;
  StepRecord<T>& rec = record ? *record : local;

  rec.y_prev_ids = y_prev_ids;
  rec.y_emb = lookup_rows(m.tgt_emb, y_prev_ids);
  Tensor<T> c = attend(m.attn, prev_states[0], rec.y_emb, ann, rec.attn);
  Tensor<T> x = concat_cols(c, rec.y_emb);  // x_t = [c_t, y_{t-1}]
  Tensor<T> top;
  out.states = stack_step(m.decoder, decoder_stack_config(m.cfg), x, prev_states, rec.stack, &top);
  rec.top = top;
  if (dropout_mask) {
    rec.mask = *dropout_mask;
    top = mul(top, *dropout_mask);
  }
  out.logits = matmul(top, m.W_o);
  out.alpha = rec.attn.alpha;
  return out;
}

// Inverted-scaling dropout mask: each unit kept with probability 1-rate and
// scaled by 1/(1-rate). Drawn row-major so the stream is reproducible.
template <class T = double>
Tensor<T> dropout_mask(int rows, int cols, double rate, Rng& rng) {
  const double keep = 1.0 - rate;
  Tensor<T> mask(rows, cols);
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask.data()[i] = rng.uniform() < keep ? static_cast<T>(1.0 / keep) : T(0);
  return mask;
}

// Teacher-forced loss: mean per-token negative log-likelihood (natural log).
// Pass a dropout stream to train; leave it null to evaluate.
template <class T>
double forward_loss(const ModelParams<T>& m, const Batch& batch, ModelCaches<T>& caches,
                    Rng* dropout_rng = nullptr) {
  validate_batch(batch, m.cfg);
  encode(m, batch.src, &caches);
  const int B = batch.size();
  const int n = batch.tgt_len();
  const bool train = dropout_rng != nullptr && m.cfg.dropout > 0.0;

  std::vector<Tensor<T>> states(static_cast<std::size_t>(m.cfg.dec_layers),
                                Tensor<T>(B, m.cfg.hidden_dim));
  caches.steps.assign(static_cast<std::size_t>(n), StepRecord<T>{});
  double nll = 0;
  for (int t = 0; t < n; ++t) {
    auto& rec = caches.steps[static_cast<std::size_t>(t)];
    std::vector<int32_t> y_prev(static_cast<std::size_t>(B)), gold(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
      const auto& sent = batch.tgt[static_cast<std::size_t>(b)];
      y_prev[static_cast<std::size_t>(b)] = t == 0 ? kBosId : sent[static_cast<std::size_t>(t - 1)];
      gold[static_cast<std::size_t>(b)] = sent[static_cast<std::size_t>(t)];
    }
    Tensor<T> mask;
    if (train) mask = dropout_mask<T>(B, m.cfg.hidden_dim, m.cfg.dropout, *dropout_rng);
    auto step = decode_step(m, states, y_prev, caches.ann, &rec, train ? &mask : nullptr);
    states = std::move(step.states);
    rec.gold_ids = std::move(gold);
    Tensor<T> logp = log_softmax_row(step.logits);
    rec.probs = softmax_row(step.logits);
    for (int b = 0; b < B; ++b) nll -= logp(b, rec.gold_ids[static_cast<std::size_t>(b)]);
  }
  caches.token_count = static_cast<double>(B) * n;
  const double loss = nll / caches.token_count;
  if (!std::isfinite(loss)) throw std::runtime_error("forward_loss: non-finite loss");
  return loss;
}

// ---------------------------------------------------------------------------
// backward

template <class T>
void model_backward(const ModelParams<T>& m, const ModelCaches<T>& caches, ModelParams<T>& grads) {
  const int B = caches.batch;
  const int n = static_cast<int>(caches.steps.size());
  const int src_len = caches.ann.src_len();
  check(n > 0, "model_backward: empty caches");
  const StackConfig dec_cfg = decoder_stack_config(m.cfg);
  const double inv_tokens = 1.0 / caches.token_count;

  std::vector<Tensor<T>> dstates(static_cast<std::size_t>(m.cfg.dec_layers),
                                 Tensor<T>(B, m.cfg.hidden_dim));
  std::vector<Tensor<T>> dann(static_cast<std::size_t>(src_len), Tensor<T>(B, m.cfg.hidden_dim));

  for (int t = n - 1; t >= 0; --t) {
    const auto& rec = caches.steps[static_cast<std::size_t>(t)];
    // d(logits) = (softmax - onehot(gold)) / tokens
    Tensor<T> dlogits = rec.probs;
    for (int b = 0; b < B; ++b) dlogits(b, rec.gold_ids[static_cast<std::size_t>(b)]) -= T(1);
    scale_inplace(dlogits, static_cast<T>(inv_tokens));

    const bool dropped = !rec.mask.empty();
    Tensor<T> top_fed = dropped ? mul(rec.top, rec.mask) : rec.top;
    add_inplace(grads.W_o, matmul_tn(top_fed, dlogits));
    Tensor<T> dtop = matmul_nt(dlogits, m.W_o);
    if (dropped) dtop = mul(dtop, rec.mask);

    Tensor<T> dx = stack_step_backward(m.decoder, dec_cfg, rec.stack, dtop, dstates, grads.decoder);
    Tensor<T> dc = slice_cols(dx, 0, m.cfg.hidden_dim);
    Tensor<T> dy_emb = slice_cols(dx, m.cfg.hidden_dim, m.cfg.hidden_dim + m.cfg.embed_dim);

    // the attention at step t read layer 1's state from step t-1, which is
    // exactly what dstates[0] now refers to
    Tensor<T> ds_prev1(B, m.cfg.hidden_dim);
    lau::attend_backward(m.attn, caches.ann, rec.attn, dc, nullptr, ds_prev1, dy_emb, dann,
                         grads.attn);
    add_inplace(dstates[0], ds_prev1);

    scatter_add_rows(grads.tgt_emb, rec.y_prev_ids, dy_emb);
  }
  // gradients flowing into the zero initial decoder states stop here

  // encoder: annotations carry both the context path and the U_a score path
  auto dsrc =
      stack_backward(m.encoder, encoder_stack_config(m.cfg), caches.enc_acts, dann, grads.encoder);
  for (int t = 0; t < static_cast<int>(dsrc.size()); ++t)
    scatter_add_rows(grads.src_emb, caches.src_step_ids[static_cast<std::size_t>(t)],
                     dsrc[static_cast<std::size_t>(t)]);
}

}  // namespace lau
