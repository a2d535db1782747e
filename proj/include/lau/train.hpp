// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Training driver: Adadelta with global-norm clipping, periodic dev
// evaluation by beam search, BLEU-plateau tau halving, and checkpointing
// that makes a stopped run exactly resumable.
//
// Run directory layout:
//   config.txt   — resolved configuration (render_config)
//   src.vocab / tgt.vocab
//   metrics.log  — append-only key=value lines, one per update or eval
//   best.ckpt    — model-only snapshot at the best dev BLEU so far
//   last.ckpt    — full training state, written at eval points and run end
//
// Determinism contract: two runs with the same config, corpus and seed
// produce byte-identical metrics logs and checkpoints, and a run stopped by
// max_updates then resumed emits exactly the lines the uninterrupted run
// would have. Evaluations fire exactly when update % eval_every == 0, so
// the schedule is a pure function of the update counter and survives
// restarts. Every stochastic stream is re-derived from (seed, epoch) or
// (seed, update), never from a long-lived generator.
//
// workers > 1 splits each batch into row shards, processes them in
// parallel threads and sums the shard gradients token-weighted. That is
// deterministic for a fixed worker count but not bit-identical to the
// single-worker run (per-shard dropout streams, different summation
// order).

#pragma once

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lau/bleu.hpp"
#include "lau/checkpoint.hpp"
#include "lau/config.hpp"
#include "lau/data.hpp"
#include "lau/decode.hpp"
#include "lau/model.hpp"
#include "lau/optimizer.hpp"

namespace lau {

// ---------------------------------------------------------------------------
// dev evaluation

struct EvalResult {
  double bleu = 0;
  double token_acc = 0;  // positional id matches / reference tokens
  double seq_acc = 0;    // exact sequence matches / pairs
};

// One greedy pass feeds the accuracies; BLEU comes from beam search at the
// requested width. Width 1 reuses the greedy output — it is the same search.
inline EvalResult evaluate_dev(const ModelParams<double>& m, const ParallelCorpus& dev,
                               const Vocab& vsrc, const Vocab& vtgt, int beam_width) {
  check(beam_width >= 1, "evaluate_dev: beam_width must be positive");
  check(dev.size() > 0, "evaluate_dev: empty dev set");
  std::vector<std::vector<std::string>> hyps, refs;
  hyps.reserve(dev.size());
  refs.reserve(dev.size());
  double matched = 0, total = 0, exact = 0;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    std::vector<int32_t> src_ids = to_ids(vsrc, dev.src[i]);
    src_ids.push_back(kEosId);
    const std::vector<int32_t> ref_ids = to_ids(vtgt, dev.tgt[i]);

    std::vector<int32_t> greedy = greedy_decode(m, src_ids);
    for (std::size_t j = 0; j < ref_ids.size(); ++j)
      if (j < greedy.size() && greedy[j] == ref_ids[j]) matched += 1;
    total += static_cast<double>(ref_ids.size());
    if (greedy == ref_ids) exact += 1;

    std::vector<int32_t> hyp_ids =
        beam_width == 1 ? std::move(greedy) : beam_search(m, src_ids, beam_width).tokens;
    hyps.push_back(to_tokens(vtgt, hyp_ids));
    refs.push_back(dev.tgt[i]);
  }
  EvalResult r;
  r.bleu = corpus_bleu(hyps, refs).bleu;
  r.token_acc = total > 0 ? matched / total : 0;
  r.seq_acc = exact / static_cast<double>(dev.size());
  return r;
}

// ---------------------------------------------------------------------------
// gradient computation, optionally sharded across worker threads

namespace detail {

struct ShardResult {
  ModelParams<double> grads;
  double loss = 0;
  double tokens = 0;
  std::exception_ptr error;
};

inline void run_shard(const ModelParams<double>& m, const Batch& full, int lo, int hi,
                      uint64_t dropout_seed, ShardResult& out) {
  try {
    Batch shard;
    shard.src.assign(full.src.begin() + lo, full.src.begin() + hi);
    shard.tgt.assign(full.tgt.begin() + lo, full.tgt.begin() + hi);
    ModelCaches<double> caches;
    Rng dropout_rng(dropout_seed);
    out.grads = zeros_like(m);
    out.loss = forward_loss(m, shard, caches, &dropout_rng);
    out.tokens = caches.token_count;
    model_backward(m, caches, out.grads);
  } catch (...) {
    out.error = std::current_exception();
  }
}

}  // namespace detail

// Mean per-token loss and matching gradient for one batch. With several
// workers each shard's per-token mean is reweighted by its token share so
// the sum equals the batch mean up to summation order.
inline double batch_gradients(const ModelParams<double>& m, const Batch& batch, int workers,
                              uint64_t dropout_seed, ModelParams<double>& grads) {
  const int B = batch.size();
  const int W = std::max(1, std::min(workers, B));
  if (W == 1) {
    ModelCaches<double> caches;
    Rng dropout_rng(dropout_seed);
    const double loss = forward_loss(m, batch, caches, &dropout_rng);
    model_backward(m, caches, grads);
    return loss;
  }

  std::vector<detail::ShardResult> shards(static_cast<std::size_t>(W));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(W));
  for (int w = 0; w < W; ++w) {
    const int lo = B * w / W;
    const int hi = B * (w + 1) / W;
    threads.emplace_back(detail::run_shard, std::cref(m), std::cref(batch), lo, hi,
                         mix_seed(dropout_seed, static_cast<uint64_t>(w)),
                         std::ref(shards[static_cast<std::size_t>(w)]));
  }
  for (auto& t : threads) t.join();

  double loss_sum = 0, token_sum = 0;
  for (const auto& s : shards) {
    if (s.error) std::rethrow_exception(s.error);
    loss_sum += s.loss * s.tokens;
    token_sum += s.tokens;
  }
  auto acc = tensor_ptrs(grads);
  for (int w = 0; w < W; ++w) {
    auto& s = shards[static_cast<std::size_t>(w)];
    const double share = s.tokens / token_sum;
    auto g = tensor_ptrs(s.grads);
    for (std::size_t i = 0; i < acc.size(); ++i)
      for (std::size_t k = 0; k < acc[i]->size(); ++k)
        acc[i]->data()[k] += share * g[i]->data()[k];
  }
  return loss_sum / token_sum;
}

// ---------------------------------------------------------------------------
// the training loop

struct TrainOptions {
  std::string run_dir;
  bool resume = false;
  std::ostream* console = nullptr;  // mirrors metrics lines when set
};

struct TrainResult {
  int updates = 0;
  int epoch = 0;  // epochs fully completed
  double final_loss = 0;
  double best_bleu = -1;  // -1 until the first evaluation
  int evals = 0;
  std::string metrics_path, best_path, last_path;
};

namespace detail {

inline std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string join_history(const std::vector<double>& h) {
  std::string out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (i) out += ',';
    out += g17(h[i]);
  }
  return out;
}

inline std::vector<double> split_history(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size() && !s.empty()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(std::stod(s.substr(start, comma - start)));
    start = comma + 1;
    if (comma == s.size()) break;
  }
  return out;
}

inline void require_same_model_config(const ModelConfig& a, const ModelConfig& b) {
  const bool same = a.src_vocab == b.src_vocab && a.tgt_vocab == b.tgt_vocab &&
                    a.embed_dim == b.embed_dim && a.hidden_dim == b.hidden_dim &&
                    a.enc_layers == b.enc_layers && a.dec_layers == b.dec_layers &&
                    a.cell_kind == b.cell_kind && a.residual == b.residual &&
                    a.dropout == b.dropout && a.attn_dim == b.attn_dim;
  check(same, "resume: checkpoint does not match the run configuration");
}

}  // namespace detail

inline TrainResult train_model(const RunConfig& cfg, const ParallelCorpus& train_corpus,
                               const ParallelCorpus& dev_corpus, const Vocab& vsrc,
                               const Vocab& vtgt, const TrainOptions& opt) {
  validate_run_config(cfg);
  check(!opt.run_dir.empty(), "train: run_dir must be set");
  namespace fs = std::filesystem;
  fs::create_directories(opt.run_dir);
  const auto in_dir = [&](const char* name) { return (fs::path(opt.run_dir) / name).string(); };

  TrainResult result;
  result.metrics_path = in_dir("metrics.log");
  result.best_path = in_dir("best.ckpt");
  result.last_path = in_dir("last.ckpt");

  const ModelConfig mc = cfg.model_config(vsrc.size(), vtgt.size());

  // mutable run state; either fresh or restored below
  ModelParams<double> model;
  AdadeltaState<double> adastate;
  ClipSchedule clip;
  int update = 0, epoch = 0, batch_pos = 0;
  double best = -1;
  std::vector<double> history;

  if (opt.resume) {
    TrainingCheckpoint ck = load_training_checkpoint(result.last_path);
    detail::require_same_model_config(ck.model.cfg, mc);
    model = std::move(ck.model);
    adastate = std::move(ck.opt);
    clip = ck.clip;
    const auto need = [&](const char* key) {
      auto it = ck.manifest.find(key);
      check(it != ck.manifest.end(), std::string("resume: checkpoint lacks ") + key);
      return it->second;
    };
    update = std::stoi(need("train.update"));
    epoch = std::stoi(need("train.epoch"));
    batch_pos = std::stoi(need("train.batch_pos"));
    best = std::stod(need("train.best_bleu"));
    history = detail::split_history(need("train.history"));
  } else {
    Rng init_rng(cfg.seed);
    model = make_model<double>(mc, init_rng, cfg.init_stddev);
    adastate = make_adadelta_state(model, cfg.rho, cfg.epsilon);
    clip.tau = cfg.tau;
    clip.tau_min = cfg.tau_min;
    clip.delta_min = cfg.delta_min;
    clip.window = cfg.plateau_window;
  }

  // run dir artifacts that make the run reproducible from disk alone
  {
    std::ofstream cfg_out(in_dir("config.txt"), std::ios::binary | std::ios::trunc);
    check(cfg_out.good(), "train: cannot write config.txt in " + opt.run_dir);
    cfg_out << render_config(cfg);
  }
  save_vocab(vsrc, in_dir("src.vocab"));
  save_vocab(vtgt, in_dir("tgt.vocab"));

  std::ofstream metrics(result.metrics_path, std::ios::binary | std::ios::app);
  check(metrics.good(), "train: cannot open metrics log " + result.metrics_path);
  const auto emit = [&](const std::string& line) {
    metrics << line << '\n';
    metrics.flush();
    if (opt.console) *opt.console << line << '\n';
  };

  const std::vector<Batch> batches =
      make_batches(train_corpus, vsrc, vtgt, cfg.batch_size, cfg.max_len);
  const int nbatches = static_cast<int>(batches.size());

  // `batch_pos` always names the next unprocessed batch of `epoch`, so a
  // checkpoint written with any (update, epoch, batch_pos) triple resumes at
  // exactly the step the uninterrupted run would take next.
  const auto save_last = [&](int next_pos) {
    std::map<std::string, std::string> extra;
    extra["train.update"] = std::to_string(update);
    extra["train.epoch"] = std::to_string(epoch);
    extra["train.batch_pos"] = std::to_string(next_pos);
    extra["train.best_bleu"] = detail::g17(best);
    extra["train.history"] = detail::join_history(history);
    save_training_checkpoint(result.last_path, model, adastate, clip, extra);
  };

  ModelParams<double> grads = zeros_like(model);
  char line[256];
  bool stop = false;
  while (epoch < cfg.epochs && !stop) {
    std::vector<int> order(static_cast<std::size_t>(nbatches));
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(mix_seed(cfg.seed, 1000003 + static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    while (batch_pos < nbatches) {
      if (cfg.max_updates > 0 && update >= cfg.max_updates) {
        stop = true;
        break;
      }
      const Batch& batch = batches[static_cast<std::size_t>(order[static_cast<std::size_t>(batch_pos)])];
      for_each_model_tensor(grads, [](const std::string&, Tensor<double>& t) {
        std::fill(t.data(), t.data() + t.size(), 0.0);
      });
      double loss = 0;
      try {
        loss = batch_gradients(model, batch, cfg.workers,
                               mix_seed(cfg.seed, 2000003 + static_cast<uint64_t>(update)), grads);
        clip_global(grads, clip.tau);
        adadelta_step(model, grads, adastate);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error("train: update " + std::to_string(update + 1) + ": " + e.what());
      }
      ++update;
      ++batch_pos;
      result.final_loss = loss;
      std::snprintf(line, sizeof line, "update=%d epoch=%d loss=%.6f tau=%.6f", update, epoch + 1,
                    loss, clip.tau);
      emit(line);

      if (update % cfg.eval_every == 0) {
        const EvalResult ev = evaluate_dev(model, dev_corpus, vsrc, vtgt, cfg.beam_width);
        history.push_back(ev.bleu);
        maybe_halve_tau(clip, history);
        const bool improved = ev.bleu > best;
        if (improved) {
          best = ev.bleu;
          std::map<std::string, std::string> extra;
          extra["train.update"] = std::to_string(update);
          extra["train.dev_bleu"] = detail::g17(ev.bleu);
          save_model_checkpoint(result.best_path, model, extra);
        }
        std::snprintf(line, sizeof line,
                      "update=%d dev_bleu=%.6f dev_token_acc=%.6f dev_seq_acc=%.6f tau=%.6f best=%d",
                      update, ev.bleu, ev.token_acc, ev.seq_acc, clip.tau, improved ? 1 : 0);
        emit(line);
        save_last(batch_pos);
      }
    }
    if (!stop) {
      batch_pos = 0;
      ++epoch;
    }
  }

  save_last(batch_pos);
  result.updates = update;
  result.epoch = epoch;
  result.best_bleu = best;
  result.evals = static_cast<int>(history.size());
  return result;
}

}  // namespace lau
