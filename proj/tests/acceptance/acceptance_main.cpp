// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate. Eight numbered criteria, each printed as a single
//   C<n> PASS|FAIL <evidence>
// line. Run everything (no arguments) or one criterion with --only N.
// Exit 0 iff every criterion that ran passed.
//
// These checks overlap the unit suite on purpose: they re-derive the
// mathematical anchors end to end, at pinned tolerances, in one binary whose
// output reads as an auditable report. Criteria 5 and 6 train real models;
// their hyperparameters were fixed by pre-build oracle runs and are written
// down next to each criterion.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "lau/bleu.hpp"
#include "lau/diagnostics.hpp"
#include "lau/gradcheck.hpp"
#include "lau/train.hpp"
#include "../test_util.hpp"

using namespace lau;

namespace {

namespace fs = std::filesystem;

struct Criterion {
  bool pass = false;
  std::string evidence;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return is ? std::string(std::istreambuf_iterator<char>(is), {}) : std::string();
}

void zero_all(std::vector<CellParams<double>>& layers) {
  for (auto& c : layers)
    for_each_cell_tensor(c, [](const std::string&, Tensor<double>& t) {
      std::fill(t.data(), t.data() + t.size(), 0.0);
    });
}

// ---------------------------------------------------------------------------
// C1: finite-difference gradient oracle, 20 seeds per component, < 2 minutes

Criterion criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  GradCheckOptions opt;
  opt.seeds = 20;
  opt.threshold = 1e-4;
  const auto reports = run_gradcheck(opt);
  const double secs = seconds_since(t0);

  double worst = 0;
  std::string worst_component = "none";
  bool all_pass = reports.size() == 9;
  for (const auto& r : reports) {
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      worst_component = r.component;
    }
    all_pass = all_pass && r.pass;
  }
  Criterion c;
  c.pass = all_pass && secs < 120.0;
  c.evidence = fmt("components=%zu seeds=20 worst=%.3e (%s) threshold=1e-4 time=%.1fs budget=120s",
                   reports.size(), worst, worst_component.c_str(), secs);
  return c;
}

// ---------------------------------------------------------------------------
// C2: closed-form degeneracies, every identity to 1e-10

Criterion criterion2() {
  const double tol = 1e-10;
  double worst = 0;
  auto track = [&](double err) { worst = std::max(worst, err); };

  Rng rng(42);
  const int I = 5, H = 6, B = 2, T = 51;

  // zero-weight single steps: GRU halves the state, LAU quarters it
  for (CellKind kind : {CellKind::kGru, CellKind::kLau}) {
    auto p = make_cell_params<double>(kind, I, H, rng, 0.04);
    for_each_cell_tensor(p, [](const std::string&, Tensor<double>& t) {
      std::fill(t.data(), t.data() + t.size(), 0.0);
    });
    const Tensor<double> x = gaussian_init<double>(B, I, rng, 1.0);
    const Tensor<double> h_prev = gaussian_init<double>(B, H, rng, 1.0);
    StepCache<double> cache;
    const Tensor<double> h = cell_forward(p, x, h_prev, cache);
    const double factor = kind == CellKind::kGru ? 0.5 : 0.25;
    for (int b = 0; b < B; ++b)
      for (int j = 0; j < H; ++j) track(std::abs(h(b, j) - factor * h_prev(b, j)));
  }

  // forced g=1 LAU: pure linear path, no recurrent gradient at all
  {
    auto p = make_cell_params<double>(CellKind::kLau, I, H, rng, 0.04);
    const Tensor<double> x = gaussian_init<double>(B, I, rng, 1.0);
    const Tensor<double> h_prev = gaussian_init<double>(B, H, rng, 1.0);
    GateOverrides<double> ov;
    ov.g = 1.0;
    StepCache<double> cache;
    const Tensor<double> h = cell_forward(p, x, h_prev, cache, ov);
    const Tensor<double> wx = matmul(x, p.W_x);
    for (int b = 0; b < B; ++b)
      for (int j = 0; j < H; ++j) track(std::abs(h(b, j) - wx(b, j)));

    Tensor<double> dh(B, H, 1.0), dx(B, I), dh_prev(B, H);
    auto grads = zeros_like(p);
    cell_backward(p, cache, dh, dx, dh_prev, grads);
    track(l2_norm(dh_prev));                 // recurrent gradient must vanish
    track(l2_norm(grads.W_hh));              // and nothing reaches W_hh
    const Tensor<double> dx_expect = matmul_nt(dh, p.W_x);  // dh * W_x^T
    for (int b = 0; b < B; ++b)
      for (int i = 0; i < I; ++i) track(std::abs(dx(b, i) - dx_expect(b, i)));
  }

  // zero-weight GRU: the k-step state Jacobian is (1/2)^k exactly
  {
    auto p = make_cell_params<double>(CellKind::kGru, I, H, rng, 0.04);
    for_each_cell_tensor(p, [](const std::string&, Tensor<double>& t) {
      std::fill(t.data(), t.data() + t.size(), 0.0);
    });
    std::vector<StepCache<double>> caches(T);
    Tensor<double> h(1, H);
    for (int t = 0; t < T; ++t)
      h = cell_forward(p, gaussian_init<double>(1, I, rng, 1.0), h, caches[static_cast<std::size_t>(t)]);

    Tensor<double> dh(1, H, 1.0);
    const double base = l2_norm(dh);
    std::vector<double> norms;  // ||dh|| after backing through k steps
    auto grads = zeros_like(p);
    for (int t = T - 1; t >= 0; --t) {
      Tensor<double> dx(1, I), dh_prev(1, H);
      cell_backward(p, caches[static_cast<std::size_t>(t)], dh, dx, dh_prev, grads);
      dh = dh_prev;
      norms.push_back(l2_norm(dh));
    }
    for (int k : {1, 5, 10, 20, 50})
      track(std::abs(norms[static_cast<std::size_t>(k - 1)] / base - std::pow(0.5, k)));
  }

  // residual stack: zero-weight upper layers are exact gradient skips
  {
    FlowProbe deep;
    deep.hidden_dim = H;
    deep.input_dim = H;  // residual needs matching dims
    deep.seq_len = 12;
    deep.trials = 3;
    deep.seed = 9;
    deep.depths = {3};
    deep.param_surgery = [](std::vector<CellParams<double>>& layers) {
      for (std::size_t l = 1; l < layers.size(); ++l)
        for_each_cell_tensor(layers[l], [](const std::string&, Tensor<double>& t) {
          std::fill(t.data(), t.data() + t.size(), 0.0);
        });
    };
    FlowProbe base = deep;
    base.depths = {1};
    base.param_surgery = nullptr;
    for (CellKind kind : {CellKind::kGru, CellKind::kLau}) {
      const FlowReport skip = measure_depth_flow(deep, kind, /*residual=*/true);
      const FlowReport one = measure_depth_flow(base, kind, /*residual=*/false);
      for (std::size_t i = 0; i < skip.samples[0].size(); ++i)
        track(std::abs(skip.samples[0][i] - one.samples[0][i]));
    }
  }

  Criterion c;
  c.pass = worst <= tol;
  c.evidence = fmt("gru_half lau_quarter forced_g_linear jacobian_2^-k residual_skip "
                   "worst_abs_err=%.3e tol=1e-10",
                   worst);
  return c;
}

// ---------------------------------------------------------------------------
// C3: beam 10 == exhaustive enumeration on 60 random micro models, < 1 minute

Criterion criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  int models = 0, agree = 0;
  double worst_score_gap = 0;
  for (CellKind kind : {CellKind::kGru, CellKind::kLau}) {
    for (uint64_t seed = 1; seed <= 30; ++seed) {
      ModelConfig cfg;
      cfg.src_vocab = 5;
      cfg.tgt_vocab = 5;
      cfg.embed_dim = 3;
      cfg.hidden_dim = 4;
      cfg.enc_layers = 1;
      cfg.dec_layers = 1;
      cfg.cell_kind = kind;
      cfg.dropout = 0;
      const auto m = lau_test::make_random_model(seed * 1000 + 1, cfg, 0.5);

      Rng rng(seed * 77 + 3);
      const int len = 1 + static_cast<int>(rng.below(3));
      std::vector<int32_t> src;
      for (int i = 0; i < len; ++i) {
        int32_t v = static_cast<int32_t>(rng.below(5));
        if (v == kEosId) v = kUnkId;
        src.push_back(v);
      }
      src.push_back(kEosId);

      const BeamResult beam = beam_search(m, src, 10, 4);
      const lau_test::ExhaustiveResult oracle = lau_test::exhaustive_best(m, src, 4);
      ++models;
      const double gap = std::abs(beam.score - oracle.score);
      worst_score_gap = std::max(worst_score_gap, gap);
      if (beam.tokens == oracle.tokens && gap <= 1e-9) ++agree;
    }
  }
  const double secs = seconds_since(t0);
  Criterion c;
  c.pass = models >= 50 && agree == models && secs < 60.0;
  c.evidence = fmt("models=%d agree=%d max_score_gap=%.2e time=%.1fs budget=60s", models, agree,
                   worst_score_gap, secs);
  return c;
}

// ---------------------------------------------------------------------------
// C4: BLEU anchors

Criterion criterion4() {
  auto corpus = [](std::initializer_list<const char*> lines) {
    std::vector<std::vector<std::string>> out;
    for (const char* line : lines) out.push_back(split_tokens(line));
    return out;
  };
  double worst = 0;
  auto track = [&](double err) { worst = std::max(worst, err); };

  // hand-computed clipping example: p1=2/4, p2=1/3, p3=p4=0 -> BLEU exactly 0
  const BleuReport hand = corpus_bleu(corpus({"the the the cat"}), corpus({"the cat sat down"}));
  track(std::abs(hand.precisions[0] - 0.5));
  track(std::abs(hand.precisions[1] - 1.0 / 3.0));
  track(std::abs(hand.precisions[2]));
  track(std::abs(hand.precisions[3]));
  track(std::abs(hand.bleu - 0.0));

  // hand-computed smooth example: geometric mean of 4/5,3/4,2/3,1/2 = 0.2^(1/4)
  const BleuReport sub = corpus_bleu(corpus({"a b c d e"}), corpus({"a b c d f"}));
  track(std::abs(sub.bleu - 66.87403049764220));

  // identity scores exactly 100, disjoint exactly 0
  const auto self = corpus({"the quick brown fox jumps", "over the lazy dog today ok"});
  const bool identity_exact = corpus_bleu(self, self).bleu == 100.0;
  const bool disjoint_exact = corpus_bleu(corpus({"a b c d e"}), corpus({"v w x y z"})).bleu == 0.0;

  // bucket BLEU == independent subset recomputation
  const auto hyps = corpus({"a b c d e", "x y z w q", "a b c d"});
  const auto refs = corpus({"a b c d f", "x y z w q", "a b c d"});
  const std::vector<int> lens = {12, 25, 8};
  const auto buckets = bleu_by_length(hyps, refs, lens, {10, 20, 30});
  const BleuReport sub10 = corpus_bleu({hyps[0], hyps[1]}, {refs[0], refs[1]});
  const BleuReport sub20 = corpus_bleu({hyps[1]}, {refs[1]});
  track(std::abs(buckets[0].report.bleu - sub10.bleu));
  track(std::abs(buckets[1].report.bleu - sub20.bleu));
  const bool absent_ok = !buckets[2].present;

  Criterion c;
  c.pass = worst <= 1e-6 && identity_exact && disjoint_exact && absent_ok;
  c.evidence = fmt("hand=%.8f pinned=66.87403050 identity=%s disjoint=%s buckets=subset "
                   "worst_err=%.2e tol=1e-6",
                   sub.bleu, identity_exact ? "100" : "BAD", disjoint_exact ? "0" : "BAD", worst);
  return c;
}

// ---------------------------------------------------------------------------
// shared trainer loop for the convergence criteria (same update rule as
// train_model; evaluation cadence and stopping are criterion-specific)

struct TrainedOutcome {
  int updates_to_target = -1;  // -1: target never reached
  double final_token_acc = 0;
  double final_seq_acc = 0;
};

TrainedOutcome train_synthetic(SynthKind task, int vocab, int min_len, int max_len,
                               int train_pairs, CellKind kind, int layers, int hidden, int embed,
                               uint64_t seed, int budget, int eval_every, double target_token_acc,
                               double init_stddev, double adadelta_eps) {
  SyntheticTaskSpec tr;
  tr.kind = task;
  tr.vocab_size = vocab;
  tr.min_len = min_len;
  tr.max_len = max_len;
  tr.count = train_pairs;
  tr.seed = 500 + seed;  // matched across arms at a given seed
  SyntheticTaskSpec dv = tr;
  dv.count = 1000;
  dv.seed = 900 + seed;
  const ParallelCorpus train = generate_synthetic(tr);
  const ParallelCorpus dev = generate_synthetic(dv);
  const Vocab vsrc = build_vocab(train.src, vocab + 4);
  const Vocab vtgt = build_vocab(train.tgt, vocab + 4);

  ModelConfig mc;
  mc.src_vocab = vsrc.size();
  mc.tgt_vocab = vtgt.size();
  mc.embed_dim = embed;
  mc.hidden_dim = hidden;
  mc.attn_dim = embed;
  mc.enc_layers = layers;
  mc.dec_layers = layers;
  mc.cell_kind = kind;
  mc.residual = false;
  mc.dropout = 0;

  Rng init(seed);
  auto m = make_model<double>(mc, init, init_stddev);
  auto opt = make_adadelta_state(m, 0.95, adadelta_eps);
  const double tau = 1.0;

  const std::vector<Batch> batches = make_batches(train, vsrc, vtgt, 64, 80);
  auto grads = zeros_like(m);

  TrainedOutcome out;
  int update = 0;
  for (int epoch = 0; update < budget; ++epoch) {
    std::vector<int> order(batches.size());
    std::iota(order.begin(), order.end(), 0);
    Rng(mix_seed(seed, 1000003 + static_cast<uint64_t>(epoch))).shuffle(order);
    for (int bi : order) {
      if (update >= budget) break;
      for_each_model_tensor(grads, [](const std::string&, Tensor<double>& t) {
        std::fill(t.data(), t.data() + t.size(), 0.0);
      });
      batch_gradients(m, batches[static_cast<std::size_t>(bi)], 1,
                      mix_seed(seed, 2000003 + static_cast<uint64_t>(update)), grads);
      clip_global(grads, tau);
      adadelta_step(m, grads, opt);
      ++update;
      if (update % eval_every == 0) {
        const EvalResult ev = evaluate_dev(m, dev, vsrc, vtgt, 1);
        out.final_token_acc = ev.token_acc;
        out.final_seq_acc = ev.seq_acc;
        if (ev.token_acc >= target_token_acc) {
          out.updates_to_target = update;
          return out;
        }
      }
    }
  }
  const EvalResult fin = evaluate_dev(m, dev, vsrc, vtgt, 1);
  out.final_token_acc = fin.token_acc;
  out.final_seq_acc = fin.seq_acc;
  if (fin.token_acc >= target_token_acc && out.updates_to_target < 0)
    out.updates_to_target = update;
  return out;
}

// ---------------------------------------------------------------------------
// C5: copy-task convergence. Pinned protocol (free parameters fixed by the
// pre-build oracle run): embed=attn=32, batch=64, dropout=0, Adadelta
// rho=0.95 eps=1e-3, init stddev 0.2, clip tau=1.0, greedy eval on 1000
// held-out pairs every 100 updates, early stop at 99% token accuracy,
// budget 5000 updates. The calibration runs converge at 1400-1600 updates;
// with eps=1e-6 or init 0.04 Adadelta's warm-up is so slow the task never
// leaves chance level inside the budget, so those knobs are pinned here.

constexpr double kInitStddev = 0.2;
constexpr double kAdadeltaEps = 1e-3;

Criterion criterion5() {
  std::string detail;
  int reached = 0;
  for (uint64_t seed : {1, 2, 3}) {
    const TrainedOutcome o = train_synthetic(SynthKind::kCopy, 20, 3, 12, 8000, CellKind::kLau,
                                             2, 32, 32, seed, 5000, 100, 0.99,
                                             kInitStddev, kAdadeltaEps);
    if (o.updates_to_target > 0) ++reached;
    detail += fmt(" seed%llu=%s@%d(acc=%.4f)", (unsigned long long)seed,
                  o.updates_to_target > 0 ? "ok" : "MISS",
                  o.updates_to_target > 0 ? o.updates_to_target : 5000, o.final_token_acc);
  }
  Criterion c;
  c.pass = reached == 3;
  c.evidence = fmt("copy V=20 len3-12 lau L=2/2 h=32 target=.99tok budget=5000:%s reached=%d/3",
                   detail.c_str(), reached);
  return c;
}

// ---------------------------------------------------------------------------
// C6: lexicon-swap depth trend. Pinned protocol from the oracle run:
// V=50, len 5-15, 20k pairs, hidden=32, embed=attn=32, batch=64, same
// optimizer settings as C5, equal budget per arm; LAU4/4 >= GRU4/4
// (seq acc) in >=2/3 matched seeds and mean(LAU4/4) >= mean(LAU2/2) - 0.02.

constexpr int kC6Budget = 2500;

Criterion criterion6() {
  std::string detail;
  int lau_wins = 0;
  double lau4_sum = 0, lau2_sum = 0;
  for (uint64_t seed : {1, 2, 3}) {
    const TrainedOutcome lau4 = train_synthetic(SynthKind::kLexiconSwap, 50, 5, 15, 20000,
                                                CellKind::kLau, 4, 32, 32, seed, kC6Budget,
                                                kC6Budget + 1, 2.0, kInitStddev, kAdadeltaEps);
    const TrainedOutcome gru4 = train_synthetic(SynthKind::kLexiconSwap, 50, 5, 15, 20000,
                                                CellKind::kGru, 4, 32, 32, seed, kC6Budget,
                                                kC6Budget + 1, 2.0, kInitStddev, kAdadeltaEps);
    const TrainedOutcome lau2 = train_synthetic(SynthKind::kLexiconSwap, 50, 5, 15, 20000,
                                                CellKind::kLau, 2, 32, 32, seed, kC6Budget,
                                                kC6Budget + 1, 2.0, kInitStddev, kAdadeltaEps);
    if (lau4.final_seq_acc >= gru4.final_seq_acc) ++lau_wins;
    lau4_sum += lau4.final_seq_acc;
    lau2_sum += lau2.final_seq_acc;
    detail += fmt(" seed%llu:lau4=%.4f gru4=%.4f lau2=%.4f", (unsigned long long)seed,
                  lau4.final_seq_acc, gru4.final_seq_acc, lau2.final_seq_acc);
  }
  const bool no_collapse = lau4_sum / 3.0 >= lau2_sum / 3.0 - 0.02;
  Criterion c;
  c.pass = lau_wins >= 2 && no_collapse;
  c.evidence = fmt("lexswap V=50 len5-15 budget=%d:%s lau4_ge_gru4=%d/3 "
                   "mean_lau4=%.4f mean_lau2=%.4f no_collapse=%s",
                   kC6Budget, detail.c_str(), lau_wins, lau4_sum / 3.0, lau2_sum / 3.0,
                   no_collapse ? "yes" : "NO");
  return c;
}

// ---------------------------------------------------------------------------
// C7: gradient-flow ordering at random init. The probe is run exactly as
// specified (hidden 64, seq 51, 100 trials, matched seeds); the criterion
// asks for LAU median >= GRU median at k in {10,20,50}. The raw medians are
// printed regardless of the verdict.

Criterion criterion7() {
  FlowProbe p;
  p.hidden_dim = 64;
  p.input_dim = 64;
  p.seq_len = 51;
  p.separations = {10, 20, 50};
  p.trials = 100;
  p.seed = 1;
  const FlowReport gru = measure_time_flow(p, CellKind::kGru);
  const FlowReport lau_rep = measure_time_flow(p, CellKind::kLau);

  bool ordered = true;
  std::string detail;
  for (std::size_t i = 0; i < p.separations.size(); ++i) {
    const bool ok = lau_rep.median_ratio[i] >= gru.median_ratio[i];
    ordered = ordered && ok;
    detail += fmt(" k%d:lau=%.3e gru=%.3e %s", p.separations[i], lau_rep.median_ratio[i],
                  gru.median_ratio[i], ok ? "ge" : "lt");
  }
  Criterion c;
  c.pass = ordered;
  c.evidence = fmt("trials=100 hidden=64 matched-seeds:%s", detail.c_str());
  return c;
}

// ---------------------------------------------------------------------------
// C8: bit-identical reruns and byte-exact checkpoint round-trips

Criterion criterion8() {
  const fs::path root = fs::temp_directory_path() / "lau_acceptance_c8";
  fs::remove_all(root);
  fs::create_directories(root);

  SyntheticTaskSpec tr;
  tr.kind = SynthKind::kCopy;
  tr.vocab_size = 12;
  tr.min_len = 2;
  tr.max_len = 6;
  tr.count = 96;
  tr.seed = 31;
  SyntheticTaskSpec dv = tr;
  dv.count = 24;
  dv.seed = 32;
  const ParallelCorpus train = generate_synthetic(tr);
  const ParallelCorpus dev = generate_synthetic(dv);

  RunConfig cfg;
  cfg.cell = "lau";
  cfg.embed_dim = 6;
  cfg.hidden_dim = 10;
  cfg.attn_dim = 6;
  cfg.enc_layers = 2;
  cfg.dec_layers = 1;
  cfg.dropout = 0.2;  // exercise the dropout stream too
  cfg.src_vocab_size = 16;
  cfg.tgt_vocab_size = 16;
  cfg.batch_size = 8;
  cfg.epochs = 2;
  cfg.eval_every = 6;
  cfg.beam_width = 1;
  cfg.seed = 77;
  const Vocab vsrc = build_vocab(train.src, cfg.src_vocab_size);
  const Vocab vtgt = build_vocab(train.tgt, cfg.tgt_vocab_size);

  TrainOptions a, b;
  a.run_dir = (root / "a").string();
  b.run_dir = (root / "b").string();
  const TrainResult ra = train_model(cfg, train, dev, vsrc, vtgt, a);
  const TrainResult rb = train_model(cfg, train, dev, vsrc, vtgt, b);

  const bool logs_same = slurp(ra.metrics_path) == slurp(rb.metrics_path);
  const bool last_same = slurp(ra.last_path) == slurp(rb.last_path);
  const bool best_same = slurp(ra.best_path) == slurp(rb.best_path);

  // round-trip: load -> save must reproduce the file byte for byte, and the
  // reloaded model must decode identically
  const std::string resaved = (root / "resaved.ckpt").string();
  std::map<std::string, std::string> extra;
  const ModelParams<double> m = load_model_checkpoint(ra.best_path, &extra);
  save_model_checkpoint(resaved, m, extra);
  const bool roundtrip_same = slurp(ra.best_path) == slurp(resaved);

  std::vector<int32_t> probe_src = {4, 5, 6, kEosId};
  const ModelParams<double> m2 = load_model_checkpoint(resaved);
  const bool decode_same =
      beam_search(m, probe_src, 4).tokens == beam_search(m2, probe_src, 4).tokens;

  fs::remove_all(root);
  Criterion c;
  c.pass = logs_same && last_same && best_same && roundtrip_same && decode_same;
  c.evidence = fmt("updates=%d metrics=%s last=%s best=%s roundtrip=%s decode=%s", ra.updates,
                   logs_same ? "identical" : "DIFFER", last_same ? "identical" : "DIFFER",
                   best_same ? "identical" : "DIFFER", roundtrip_same ? "byte-exact" : "DIFFER",
                   decode_same ? "identical" : "DIFFER");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[i + 1]);
      ++i;
    } else {
      std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
      return 1;
    }
  }
  if (only < 0 || only > 8) {
    std::fprintf(stderr, "usage: %s [--only 1..8]\n", argv[0]);
    return 1;
  }

  Criterion (*criteria[9])() = {nullptr,    criterion1, criterion2, criterion3, criterion4,
                                criterion5, criterion6, criterion7, criterion8};
  const char* names[9] = {nullptr,
                          "gradient oracle",
                          "closed-form degeneracies",
                          "beam = exhaustive",
                          "BLEU anchors",
                          "copy-task convergence",
                          "lexswap depth trend",
                          "gradient-flow ordering",
                          "bit-exact reproducibility"};

  bool all_pass = true;
  for (int n = 1; n <= 8; ++n) {
    if (only != 0 && n != only) continue;
    const Criterion c = criteria[n]();
    std::printf("C%d %s %s: %s\n", n, c.pass ? "PASS" : "FAIL", names[n], c.evidence.c_str());
    std::fflush(stdout);
    all_pass = all_pass && c.pass;
  }
  return all_pass ? 0 : 1;
}
