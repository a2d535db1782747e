// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// lau — command-line front end for the toolkit.
//
// Subcommands: train, translate, eval, gradcheck, diagnose, synth.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 check failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lau/bleu.hpp"
#include "lau/checkpoint.hpp"
#include "lau/config.hpp"
#include "lau/data.hpp"
#include "lau/decode.hpp"
#include "lau/diagnostics.hpp"
#include "lau/gradcheck.hpp"
#include "lau/train.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kCheck = 3;

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string run_dir = "run";
  bool resume = false;
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  lau::RunConfig cfg;
  if (!a.config_path.empty()) cfg = lau::load_run_config(a.config_path);
  lau::apply_overrides(cfg, a.sets);
  lau::validate_run_config(cfg);
  lau::check(!cfg.train_src.empty() && !cfg.train_tgt.empty(),
             "config: train_src and train_tgt are required");
  lau::check(!cfg.dev_src.empty() && !cfg.dev_tgt.empty(),
             "config: dev_src and dev_tgt are required");

  lau::ParallelCorpus train = lau::load_parallel(cfg.train_src, cfg.train_tgt);
  lau::ParallelCorpus dev = lau::load_parallel(cfg.dev_src, cfg.dev_tgt);
  lau::Vocab vsrc = cfg.src_vocab.empty() ? lau::build_vocab(train.src, cfg.src_vocab_size)
                                          : lau::load_vocab(cfg.src_vocab);
  lau::Vocab vtgt = cfg.tgt_vocab.empty() ? lau::build_vocab(train.tgt, cfg.tgt_vocab_size)
                                          : lau::load_vocab(cfg.tgt_vocab);

  lau::TrainOptions opt;
  opt.run_dir = a.run_dir;
  opt.resume = a.resume;
  opt.console = a.quiet ? nullptr : &std::cout;
  const lau::TrainResult r = lau::train_model(cfg, train, dev, vsrc, vtgt, opt);
  std::printf("done updates=%d evals=%d best_dev_bleu=%.6f run_dir=%s\n", r.updates, r.evals,
              r.best_bleu, a.run_dir.c_str());
  return kOk;
}

// ---------------------------------------------------------------------------
// translate

struct TranslateArgs {
  std::string model, src_vocab, tgt_vocab, input, output, alignments;
  int beam_width = 10;
  int max_len = 0;  // 0 = per-sentence default
};

int run_translate(const TranslateArgs& a) {
  const lau::ModelParams<double> m = lau::load_model_checkpoint(a.model);
  const lau::Vocab vsrc = lau::load_vocab(a.src_vocab);
  const lau::Vocab vtgt = lau::load_vocab(a.tgt_vocab);
  lau::check(vsrc.size() == m.cfg.src_vocab,
             "translate: source vocab has " + std::to_string(vsrc.size()) +
                 " entries but the checkpoint manifest says " + std::to_string(m.cfg.src_vocab));
  lau::check(vtgt.size() == m.cfg.tgt_vocab,
             "translate: target vocab has " + std::to_string(vtgt.size()) +
                 " entries but the checkpoint manifest says " + std::to_string(m.cfg.tgt_vocab));

  std::ifstream in(a.input, std::ios::binary);
  lau::check(in.good(), "translate: cannot open " + a.input);
  std::ofstream out(a.output, std::ios::binary | std::ios::trunc);
  lau::check(out.good(), "translate: cannot write " + a.output);
  std::ofstream align;
  if (!a.alignments.empty()) {
    align.open(a.alignments, std::ios::binary | std::ios::trunc);
    lau::check(align.good(), "translate: cannot write " + a.alignments);
  }

  std::string line;
  std::size_t idx = 0;
  char num[32];
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> toks = lau::split_tokens(line);
    std::vector<int32_t> src_ids, out_ids;
    if (!toks.empty()) {
      src_ids = lau::to_ids(vsrc, toks);
      src_ids.push_back(lau::kEosId);
      out_ids = lau::beam_search(m, src_ids, a.beam_width, a.max_len).tokens;
    }
    out << lau::join_tokens(lau::to_tokens(vtgt, out_ids)) << '\n';

    if (align.is_open()) {
      if (src_ids.empty()) {
        align << "sentence=" << idx << " rows=0 cols=0\n\n";
      } else {
        const auto rows = lau::alignment_for(m, src_ids, out_ids);
        align << "sentence=" << idx << " rows=" << rows.size() << " cols=" << src_ids.size()
              << '\n';
        for (const auto& row : rows) {
          for (std::size_t j = 0; j < row.size(); ++j) {
            std::snprintf(num, sizeof num, "%.6f", row[j]);
            align << (j ? " " : "") << num;
          }
          align << '\n';
        }
        align << '\n';
      }
    }
    ++idx;
  }
  out.flush();
  lau::check(out.good(), "translate: failed writing " + a.output);
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string hyp, ref, src;
  bool case_insensitive = false;
};

int run_eval(const EvalArgs& a) {
  const auto hyps = lau::load_tokenized_lines(a.hyp);
  const auto refs = lau::load_tokenized_lines(a.ref);
  const bool case_sensitive = !a.case_insensitive;
  const lau::BleuReport rep = lau::corpus_bleu(hyps, refs, case_sensitive);

  const double ratio =
      rep.ref_len > 0 ? static_cast<double>(rep.hyp_len) / static_cast<double>(rep.ref_len) : 0;
  std::printf("BLEU = %.2f, %.1f/%.1f/%.1f/%.1f (BP=%.3f, ratio=%.3f, hyp_len=%lld, ref_len=%lld)\n",
              rep.bleu, rep.precisions[0] * 100, rep.precisions[1] * 100, rep.precisions[2] * 100,
              rep.precisions[3] * 100, rep.bp, ratio, static_cast<long long>(rep.hyp_len),
              static_cast<long long>(rep.ref_len));

  if (a.src.empty()) {
    std::printf("%s", lau::bleu_kv(rep).c_str());
  } else {
    const auto src = lau::load_tokenized_lines(a.src);
    lau::check(src.size() == hyps.size(), "eval: source line count differs from hypotheses");
    std::vector<int> lens;
    lens.reserve(src.size());
    for (const auto& s : src) lens.push_back(static_cast<int>(s.size()));
    const auto buckets = lau::bleu_by_length(hyps, refs, lens, {10, 20, 30, 40, 50, 60},
                                             case_sensitive);
    std::printf("%s", lau::bleu_kv(rep, &buckets).c_str());
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckArgs {
  int seeds = 20;
  uint64_t seed = 1;
  double threshold = 1e-4;
  double fd_step = 1e-5;
  bool inject_fault = false;
};

int run_gradcheck_cmd(const GradcheckArgs& a) {
  lau::GradCheckOptions opt;
  opt.seeds = a.seeds;
  opt.seed0 = a.seed;
  opt.threshold = a.threshold;
  opt.fd_step = a.fd_step;
  opt.inject_fault = a.inject_fault;
  const auto reports = lau::run_gradcheck(opt);
  std::printf("%s", lau::gradcheck_text(reports).c_str());
  return lau::gradcheck_passed(reports) ? kOk : kCheck;
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
  std::string cell = "both";          // gru | lau | both
  std::string probe = "time";         // time | depth | both
  std::string direction = "forward";  // forward | alternating
  int hidden = 64;
  int input_dim = 64;
  int seq_len = 51;
  int layers = 1;
  int trials = 100;
  std::vector<int> separations = {1, 5, 10, 20, 50};
  std::vector<int> depths = {2, 4, 8};
  uint64_t seed = 1;
  double stddev = 0.04;
  bool residual = false;
  std::string tsv;
};

int run_diagnose(const DiagnoseArgs& a) {
  lau::FlowProbe probe;
  probe.hidden_dim = a.hidden;
  probe.input_dim = a.input_dim;
  probe.seq_len = a.seq_len;
  probe.separations = a.separations;
  probe.depths = a.depths;
  probe.num_layers = a.layers;
  probe.direction = a.direction == "forward" ? lau::DirectionPolicy::kFixedForward
                                             : lau::DirectionPolicy::kAlternating;
  probe.residual = a.residual;
  probe.trials = a.trials;
  probe.seed = a.seed;
  probe.stddev = a.stddev;

  std::vector<lau::CellKind> kinds;
  if (a.cell == "gru" || a.cell == "both") kinds.push_back(lau::CellKind::kGru);
  if (a.cell == "lau" || a.cell == "both") kinds.push_back(lau::CellKind::kLau);

  std::string tsv_out;
  bool first = true;
  for (const lau::CellKind kind : kinds) {
    if (a.probe == "time" || a.probe == "both") {
      const lau::FlowReport rep = lau::measure_time_flow(probe, kind);
      std::printf("%s", lau::flow_kv(rep).c_str());
      tsv_out += lau::flow_tsv(rep, first);
      first = false;
    }
    if (a.probe == "depth" || a.probe == "both") {
      const lau::FlowReport rep = lau::measure_depth_flow(probe, kind, a.residual);
      std::printf("%s", lau::flow_kv(rep).c_str());
      tsv_out += lau::flow_tsv(rep, first);
      first = false;
    }
  }
  if (!a.tsv.empty()) {
    std::ofstream out(a.tsv, std::ios::binary | std::ios::trunc);
    lau::check(out.good(), "diagnose: cannot write " + a.tsv);
    out << tsv_out;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string task = "copy";
  int vocab = 20;
  int min_len = 3;
  int max_len = 12;
  int count = 1000;
  uint64_t seed = 1;
  std::string out_prefix;
};

int run_synth(const SynthArgs& a) {
  lau::SyntheticTaskSpec spec;
  spec.kind = lau::synth_kind_from_name(a.task);
  spec.vocab_size = a.vocab;
  spec.min_len = a.min_len;
  spec.max_len = a.max_len;
  spec.count = a.count;
  spec.seed = a.seed;
  const lau::ParallelCorpus corpus = lau::generate_synthetic(spec);
  lau::save_lines(corpus.src, a.out_prefix + ".src");
  lau::save_lines(corpus.tgt, a.out_prefix + ".tgt");
  std::printf("wrote %zu pairs to %s.src / %s.tgt\n", corpus.size(), a.out_prefix.c_str(),
              a.out_prefix.c_str());
  return kOk;
}

// configuration complaints are usage errors; everything else is bad data
int classify(const std::invalid_argument& e) {
  return std::string(e.what()).rfind("config:", 0) == 0 ? kUsage : kData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequence-to-sequence toolkit built around the linear associative unit"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train a model and write run artifacts");
  train->add_option("--config", train_args.config_path, "key=value configuration file");
  train->add_option("--set", train_args.sets, "override a configuration key (key=value)");
  train->add_option("--run-dir", train_args.run_dir,
                    "directory for checkpoints, vocabularies and the metrics log");
  train->add_flag("--resume", train_args.resume, "continue from <run-dir>/last.ckpt");
  train->add_flag("--quiet", train_args.quiet, "do not mirror metrics lines to stdout");

  TranslateArgs tr_args;
  CLI::App* translate = app.add_subcommand("translate", "decode a file with beam search");
  translate->add_option("--model", tr_args.model, "model checkpoint")->required();
  translate->add_option("--src-vocab", tr_args.src_vocab, "source vocabulary file")->required();
  translate->add_option("--tgt-vocab", tr_args.tgt_vocab, "target vocabulary file")->required();
  translate->add_option("--input", tr_args.input, "source sentences, one per line")->required();
  translate->add_option("--output", tr_args.output, "where to write translations")->required();
  translate->add_option("--beam-width", tr_args.beam_width, "beam width")
      ->check(CLI::PositiveNumber);
  translate->add_option("--max-len", tr_args.max_len,
                        "decoding length cap (0 = 2×source length + 5)")
      ->check(CLI::NonNegativeNumber);
  translate->add_option("--alignments", tr_args.alignments,
                        "also write attention weights per sentence");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "score hypotheses against references with BLEU");
  eval->add_option("--hyp", eval_args.hyp, "hypothesis file")->required();
  eval->add_option("--ref", eval_args.ref, "reference file")->required();
  eval->add_option("--src", eval_args.src, "source file; enables length-bucket reporting");
  eval->add_flag("--case-insensitive", eval_args.case_insensitive,
                 "lowercase both sides before scoring");

  GradcheckArgs gc_args;
  CLI::App* gradcheck = app.add_subcommand("gradcheck",
                                           "finite-difference audit of all backward passes");
  gradcheck->add_option("--seeds", gc_args.seeds, "random seeds per component")
      ->check(CLI::PositiveNumber);
  gradcheck->add_option("--seed", gc_args.seed, "base seed");
  gradcheck->add_option("--threshold", gc_args.threshold, "max relative error allowed")
      ->check(CLI::PositiveNumber);
  gradcheck->add_option("--fd-step", gc_args.fd_step, "central-difference step")
      ->check(CLI::PositiveNumber);
  gradcheck->add_flag("--inject-fault", gc_args.inject_fault,
                      "corrupt one analytic gradient to verify the audit fails");

  DiagnoseArgs diag_args;
  CLI::App* diagnose = app.add_subcommand("diagnose", "measure gradient flow through the cells");
  diagnose->add_option("--cell", diag_args.cell, "which cell to probe")
      ->check(CLI::IsMember({"gru", "lau", "both"}));
  diagnose->add_option("--probe", diag_args.probe, "time (across steps) or depth (across layers)")
      ->check(CLI::IsMember({"time", "depth", "both"}));
  diagnose->add_option("--direction", diag_args.direction, "stack direction policy")
      ->check(CLI::IsMember({"forward", "alternating"}));
  diagnose->add_option("--hidden", diag_args.hidden, "hidden dimension")
      ->check(CLI::PositiveNumber);
  diagnose->add_option("--input-dim", diag_args.input_dim, "input dimension")
      ->check(CLI::PositiveNumber);
  diagnose->add_option("--seq-len", diag_args.seq_len, "sequence length")
      ->check(CLI::PositiveNumber);
  diagnose->add_option("--layers", diag_args.layers, "stack depth for the time probe")
      ->check(CLI::PositiveNumber);
  diagnose->add_option("--trials", diag_args.trials, "random restarts per measurement")
      ->check(CLI::PositiveNumber);
  diagnose->add_option("--separations", diag_args.separations, "time separations to report");
  diagnose->add_option("--depths", diag_args.depths, "stack depths for the depth probe");
  diagnose->add_option("--seed", diag_args.seed, "base seed");
  diagnose->add_option("--stddev", diag_args.stddev, "weight init standard deviation")
      ->check(CLI::PositiveNumber);
  diagnose->add_flag("--residual", diag_args.residual, "use residual connections");
  diagnose->add_option("--tsv", diag_args.tsv, "also write a plot-ready table here");

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic parallel corpus");
  synth->add_option("--task", synth_args.task, "generator")
      ->check(CLI::IsMember({"copy", "reverse", "lexswap"}));
  synth->add_option("--vocab", synth_args.vocab, "distinct word types")
      ->check(CLI::PositiveNumber);
  synth->add_option("--min-len", synth_args.min_len, "shortest sentence")
      ->check(CLI::PositiveNumber);
  synth->add_option("--max-len", synth_args.max_len, "longest sentence")
      ->check(CLI::PositiveNumber);
  synth->add_option("--count", synth_args.count, "number of pairs")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_args.seed, "generator seed");
  synth->add_option("--out-prefix", synth_args.out_prefix, "writes <prefix>.src and <prefix>.tgt")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (train->parsed()) return run_train(train_args);
    if (translate->parsed()) return run_translate(tr_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (gradcheck->parsed()) return run_gradcheck_cmd(gc_args);
    if (diagnose->parsed()) return run_diagnose(diag_args);
    if (synth->parsed()) return run_synth(synth_args);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "lau: %s\n", e.what());
    return classify(e);
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "lau: %s\n", e.what());
    return kCheck;
  }
  return kUsage;
}
