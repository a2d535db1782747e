// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Trainer and gradient-audit tests. Everything here runs against tiny models
// so the whole file stays in the low seconds on one core.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "lau/gradcheck.hpp"
#include "lau/train.hpp"

using lau::Batch;
using lau::ParallelCorpus;
using lau::RunConfig;
using lau::Vocab;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string sub(const std::string& leaf) const { return (path / leaf).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(bool(is));
  return std::string(std::istreambuf_iterator<char>(is), {});
}

ParallelCorpus copy_corpus(int count, uint64_t seed) {
  lau::SyntheticTaskSpec spec;
  spec.kind = lau::SynthKind::kCopy;
  spec.vocab_size = 10;
  spec.min_len = 2;
  spec.max_len = 5;
  spec.count = count;
  spec.seed = seed;
  return lau::generate_synthetic(spec);
}

RunConfig tiny_config() {
  RunConfig cfg;
  cfg.cell = "lau";
  cfg.embed_dim = 6;
  cfg.hidden_dim = 10;
  cfg.attn_dim = 6;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.dropout = 0;
  cfg.src_vocab_size = 20;
  cfg.tgt_vocab_size = 20;
  cfg.batch_size = 8;
  cfg.epochs = 2;
  cfg.eval_every = 7;
  cfg.beam_width = 1;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("evaluate_dev agrees with a by-hand reimplementation", "[train]") {
  ParallelCorpus dev = copy_corpus(12, 31);
  Vocab vsrc = lau::build_vocab(dev.src, 20);
  Vocab vtgt = lau::build_vocab(dev.tgt, 20);

  lau::ModelConfig mc;
  mc.src_vocab = vsrc.size();
  mc.tgt_vocab = vtgt.size();
  mc.embed_dim = 5;
  mc.hidden_dim = 8;
  mc.attn_dim = 4;
  mc.enc_layers = 1;
  mc.dec_layers = 1;
  mc.cell_kind = lau::CellKind::kLau;
  mc.dropout = 0;
  lau::Rng rng(7);
  auto m = lau::make_model<double>(mc, rng, 0.3);

  double matched = 0, total = 0, exact = 0;
  std::vector<std::vector<std::string>> hyps, refs;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    std::vector<int32_t> src_ids = lau::to_ids(vsrc, dev.src[i]);
    src_ids.push_back(lau::kEosId);
    const std::vector<int32_t> ref_ids = lau::to_ids(vtgt, dev.tgt[i]);
    const std::vector<int32_t> greedy = lau::greedy_decode(m, src_ids);
    for (std::size_t j = 0; j < ref_ids.size(); ++j)
      if (j < greedy.size() && greedy[j] == ref_ids[j]) matched += 1;
    total += static_cast<double>(ref_ids.size());
    if (greedy == ref_ids) exact += 1;
    hyps.push_back(lau::to_tokens(vtgt, lau::beam_search(m, src_ids, 3).tokens));
    refs.push_back(dev.tgt[i]);
  }

  const lau::EvalResult got = lau::evaluate_dev(m, dev, vsrc, vtgt, 3);
  REQUIRE(got.bleu == lau::corpus_bleu(hyps, refs).bleu);
  REQUIRE(got.token_acc == matched / total);
  REQUIRE(got.seq_acc == exact / static_cast<double>(dev.size()));

  // width 1 must be the greedy search, bit for bit
  const lau::EvalResult w1a = lau::evaluate_dev(m, dev, vsrc, vtgt, 1);
  const lau::EvalResult w1b = lau::evaluate_dev(m, dev, vsrc, vtgt, 1);
  REQUIRE(w1a.bleu == w1b.bleu);
  REQUIRE(w1a.token_acc == w1b.token_acc);
}

TEST_CASE("sharded gradients match the single-worker pass", "[train]") {
  // one batch of 9 equal-length rows so every worker gets real work
  lau::SyntheticTaskSpec spec;
  spec.kind = lau::SynthKind::kCopy;
  spec.vocab_size = 10;
  spec.min_len = 4;
  spec.max_len = 4;
  spec.count = 9;
  spec.seed = 5;
  const ParallelCorpus corpus = lau::generate_synthetic(spec);
  Vocab vsrc = lau::build_vocab(corpus.src, 20);
  Vocab vtgt = lau::build_vocab(corpus.tgt, 20);
  const std::vector<Batch> batches = lau::make_batches(corpus, vsrc, vtgt, 9, 80);
  REQUIRE(batches.size() == 1);

  lau::ModelConfig mc;
  mc.src_vocab = vsrc.size();
  mc.tgt_vocab = vtgt.size();
  mc.embed_dim = 5;
  mc.hidden_dim = 8;
  mc.attn_dim = 4;
  mc.enc_layers = 2;
  mc.dec_layers = 2;
  mc.cell_kind = lau::CellKind::kLau;
  mc.dropout = 0;  // so shard-local dropout streams cannot matter
  lau::Rng rng(3);
  auto m = lau::make_model<double>(mc, rng, 0.2);

  auto g1 = lau::zeros_like(m);
  auto g3 = lau::zeros_like(m);
  const double loss1 = lau::batch_gradients(m, batches[0], 1, 99, g1);
  const double loss3 = lau::batch_gradients(m, batches[0], 3, 99, g3);
  REQUIRE(loss3 == Catch::Approx(loss1).epsilon(1e-12));

  const auto p1 = lau::tensor_ptrs(g1);
  const auto p3 = lau::tensor_ptrs(g3);
  REQUIRE(p1.size() == p3.size());
  double worst = 0;
  for (std::size_t k = 0; k < p1.size(); ++k)
    for (std::size_t i = 0; i < p1[k]->size(); ++i) {
      const double a = p1[k]->data()[i], b = p3[k]->data()[i];
      worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}));
    }
  REQUIRE(worst < 1e-9);
}

TEST_CASE("training twice with one config is byte-identical", "[train]") {
  TempDir dir("lau_train_twin");
  ParallelCorpus train = copy_corpus(48, 1);
  ParallelCorpus dev = copy_corpus(12, 2);
  RunConfig cfg = tiny_config();
  Vocab vsrc = lau::build_vocab(train.src, cfg.src_vocab_size);
  Vocab vtgt = lau::build_vocab(train.tgt, cfg.tgt_vocab_size);

  lau::TrainOptions a, b;
  a.run_dir = dir.sub("a");
  b.run_dir = dir.sub("b");
  const lau::TrainResult ra = lau::train_model(cfg, train, dev, vsrc, vtgt, a);
  const lau::TrainResult rb = lau::train_model(cfg, train, dev, vsrc, vtgt, b);

  const int per_epoch =
      static_cast<int>(lau::make_batches(train, vsrc, vtgt, cfg.batch_size, cfg.max_len).size());
  REQUIRE(ra.updates == rb.updates);
  REQUIRE(ra.updates == per_epoch * cfg.epochs);
  REQUIRE(slurp(ra.metrics_path) == slurp(rb.metrics_path));
  REQUIRE(slurp(ra.last_path) == slurp(rb.last_path));
  REQUIRE(slurp(ra.best_path) == slurp(rb.best_path));

  // the log carries one update line per update plus one eval line per eval
  const std::string log = slurp(ra.metrics_path);
  const std::regex update_re("update=\\d+ epoch=\\d+ loss=-?\\d+\\.\\d{6} tau=\\d+\\.\\d{6}");
  const std::regex eval_re(
      "update=\\d+ dev_bleu=\\d+\\.\\d{6} dev_token_acc=\\d+\\.\\d{6} "
      "dev_seq_acc=\\d+\\.\\d{6} tau=\\d+\\.\\d{6} best=[01]");
  int updates = 0, evals = 0;
  std::istringstream lines(log);
  std::string line;
  while (std::getline(lines, line)) {
    if (std::regex_match(line, update_re)) ++updates;
    else if (std::regex_match(line, eval_re)) ++evals;
    else FAIL("unrecognized metrics line: " + line);
  }
  REQUIRE(updates == ra.updates);
  REQUIRE(evals == ra.evals);
  REQUIRE(evals == ra.updates / cfg.eval_every);  // fires exactly at multiples

  // best checkpoint carries its provenance in the manifest
  std::map<std::string, std::string> extra;
  lau::load_model_checkpoint(ra.best_path, &extra);
  REQUIRE(extra.count("train.update") == 1);
  REQUIRE(extra.count("train.dev_bleu") == 1);
}

TEST_CASE("a dropout run is still deterministic", "[train]") {
  TempDir dir("lau_train_dropout");
  ParallelCorpus train = copy_corpus(24, 3);
  ParallelCorpus dev = copy_corpus(8, 4);
  RunConfig cfg = tiny_config();
  cfg.dropout = 0.3;
  cfg.epochs = 1;
  cfg.eval_every = 3;
  Vocab vsrc = lau::build_vocab(train.src, cfg.src_vocab_size);
  Vocab vtgt = lau::build_vocab(train.tgt, cfg.tgt_vocab_size);

  lau::TrainOptions a, b;
  a.run_dir = dir.sub("a");
  b.run_dir = dir.sub("b");
  const auto ra = lau::train_model(cfg, train, dev, vsrc, vtgt, a);
  const auto rb = lau::train_model(cfg, train, dev, vsrc, vtgt, b);
  REQUIRE(slurp(ra.metrics_path) == slurp(rb.metrics_path));
  REQUIRE(slurp(ra.last_path) == slurp(rb.last_path));

  // and a different seed must actually change the trajectory
  RunConfig other = cfg;
  other.seed = 12;
  lau::TrainOptions c;
  c.run_dir = dir.sub("c");
  const auto rc = lau::train_model(other, train, dev, vsrc, vtgt, c);
  REQUIRE(slurp(rc.metrics_path) != slurp(ra.metrics_path));
}

TEST_CASE("resuming reproduces the uninterrupted run exactly", "[train]") {
  TempDir dir("lau_train_resume");
  ParallelCorpus train = copy_corpus(48, 6);
  ParallelCorpus dev = copy_corpus(12, 7);
  RunConfig cfg = tiny_config();
  Vocab vsrc = lau::build_vocab(train.src, cfg.src_vocab_size);
  Vocab vtgt = lau::build_vocab(train.tgt, cfg.tgt_vocab_size);

  lau::TrainOptions whole;
  whole.run_dir = dir.sub("whole");
  const auto rw = lau::train_model(cfg, train, dev, vsrc, vtgt, whole);
  REQUIRE(rw.updates > 6);

  // interrupt mid-epoch, then resume to the end
  RunConfig head = cfg;
  head.max_updates = 5;
  lau::TrainOptions part;
  part.run_dir = dir.sub("part");
  lau::train_model(head, train, dev, vsrc, vtgt, part);
  lau::TrainOptions tail = part;
  tail.resume = true;
  const auto rt = lau::train_model(cfg, train, dev, vsrc, vtgt, tail);

  REQUIRE(rt.updates == rw.updates);
  REQUIRE(slurp(rt.metrics_path) == slurp(rw.metrics_path));
  REQUIRE(slurp(rt.last_path) == slurp(rw.last_path));
  REQUIRE(slurp(rt.best_path) == slurp(rw.best_path));
}

TEST_CASE("resume refuses a mismatched architecture", "[train]") {
  TempDir dir("lau_train_mismatch");
  ParallelCorpus train = copy_corpus(16, 8);
  ParallelCorpus dev = copy_corpus(8, 9);
  RunConfig cfg = tiny_config();
  cfg.epochs = 1;
  Vocab vsrc = lau::build_vocab(train.src, cfg.src_vocab_size);
  Vocab vtgt = lau::build_vocab(train.tgt, cfg.tgt_vocab_size);

  lau::TrainOptions opt;
  opt.run_dir = dir.sub("run");
  lau::train_model(cfg, train, dev, vsrc, vtgt, opt);

  RunConfig wider = cfg;
  wider.hidden_dim = cfg.hidden_dim + 2;
  lau::TrainOptions res = opt;
  res.resume = true;
  REQUIRE_THROWS_AS(lau::train_model(wider, train, dev, vsrc, vtgt, res), std::invalid_argument);

  lau::TrainOptions missing;
  missing.run_dir = dir.sub("never_ran");
  missing.resume = true;
  REQUIRE_THROWS_AS(lau::train_model(cfg, train, dev, vsrc, vtgt, missing),
                    std::invalid_argument);
}

TEST_CASE("gradient audit passes clean and catches a planted fault", "[gradcheck]") {
  lau::GradCheckOptions opt;
  opt.seeds = 2;
  const auto reports = lau::run_gradcheck(opt);
  REQUIRE(reports.size() == 9);
  const char* expected[] = {"cell_gru",          "cell_lau",  "stack_gru",
                            "stack_lau",         "stack_gru_residual",
                            "stack_lau_residual", "attention", "model_gru",
                            "model_lau"};
  for (std::size_t i = 0; i < reports.size(); ++i) {
    REQUIRE(reports[i].component == expected[i]);
    REQUIRE(reports[i].pass);
    REQUIRE(reports[i].max_rel_error < 1e-5);
  }
  REQUIRE(lau::gradcheck_passed(reports));

  const std::string text = lau::gradcheck_text(reports);
  REQUIRE(text.find("component=cell_gru max_rel_error=") != std::string::npos);
  REQUIRE(text.find("gradcheck=pass") != std::string::npos);

  lau::GradCheckOptions bad = opt;
  bad.seeds = 1;
  bad.inject_fault = true;
  const auto faulty = lau::run_gradcheck(bad);
  REQUIRE_FALSE(lau::gradcheck_passed(faulty));
  REQUIRE(lau::gradcheck_text(faulty).find("component=model_lau") != std::string::npos);
  REQUIRE(lau::gradcheck_text(faulty).find("status=fail") != std::string::npos);
}
