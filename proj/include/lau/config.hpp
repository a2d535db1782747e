// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: a flat key=value file ('#' starts a comment, blank lines
// ignored) plus command-line overrides of the same syntax. Every key is
// defaulted, unknown keys are rejected, and render_config() writes the fully
// resolved configuration back out so a run can be reproduced from its
// artifacts alone.

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lau/cells.hpp"
#include "lau/model.hpp"
#include "lau/tensor.hpp"

namespace lau {

struct RunConfig {
  // model
  std::string cell = "lau";
  int embed_dim = 512;
  int hidden_dim = 512;
  int attn_dim = 0;  // 0 = hidden_dim
  int enc_layers = 4;
  int dec_layers = 4;
  bool residual = false;
  double dropout = 0.5;
  int src_vocab_size = 30000;  // cap when building vocabularies
  int tgt_vocab_size = 30000;

  // optimizer
  double rho = 0.95;
  double epsilon = 1e-6;
  double tau = 1.0;
  double tau_min = 0.125;
  double delta_min = 0.2;
  int plateau_window = 3;
  double init_stddev = 0.04;  // weight init scale; small tasks want ~0.2

  // training
  int batch_size = 128;
  int max_len = 80;
  int epochs = 10;
  int max_updates = 0;  // 0 = no cap
  int eval_every = 500;
  int workers = 1;  // >1 sums shard gradients; documented as non-bit-exact
  uint64_t seed = 1;
  std::string checkpoint_dir = "checkpoints";

  // decoding
  int beam_width = 10;

  // data
  std::string train_src, train_tgt;
  std::string dev_src, dev_tgt;
  std::string src_vocab, tgt_vocab;  // optional prebuilt vocab files

  ModelConfig model_config(int src_vocab_actual, int tgt_vocab_actual) const {
    ModelConfig m;
    m.src_vocab = src_vocab_actual;
    m.tgt_vocab = tgt_vocab_actual;
    m.embed_dim = embed_dim;
    m.hidden_dim = hidden_dim;
    m.attn_dim = attn_dim;
    m.enc_layers = enc_layers;
    m.dec_layers = dec_layers;
    m.cell_kind = cell_kind_from_name(cell);
    m.residual = residual;
    m.dropout = dropout;
    return m;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": " + v);
}

inline int parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    int r = std::stoi(v, &used);
    check(used == v.size(), "config: bad integer for " + key + ": " + v);
    return r;
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("config: bad integer for " + key + ": " + v);
  }
}

inline double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    double r = std::stod(v, &used);
    check(used == v.size(), "config: bad number for " + key + ": " + v);
    return r;
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("config: bad number for " + key + ": " + v);
  }
}

}  // namespace detail

inline void set_config_key(RunConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_int;
  if (key == "cell") {
    check(value == "gru" || value == "lau", "config: cell must be gru or lau, got " + value);
    c.cell = value;
  } else if (key == "embed_dim") {
    c.embed_dim = parse_int(value, key);
  } else if (key == "hidden_dim") {
    c.hidden_dim = parse_int(value, key);
  } else if (key == "attn_dim") {
    c.attn_dim = parse_int(value, key);
  } else if (key == "enc_layers") {
    c.enc_layers = parse_int(value, key);
  } else if (key == "dec_layers") {
    c.dec_layers = parse_int(value, key);
  } else if (key == "residual") {
    c.residual = parse_bool(value, key);
  } else if (key == "dropout") {
    c.dropout = parse_double(value, key);
  } else if (key == "src_vocab_size") {
    c.src_vocab_size = parse_int(value, key);
  } else if (key == "tgt_vocab_size") {
    c.tgt_vocab_size = parse_int(value, key);
  } else if (key == "rho") {
    c.rho = parse_double(value, key);
  } else if (key == "epsilon") {
    c.epsilon = parse_double(value, key);
  } else if (key == "tau") {
    c.tau = parse_double(value, key);
  } else if (key == "tau_min") {
    c.tau_min = parse_double(value, key);
  } else if (key == "delta_min") {
    c.delta_min = parse_double(value, key);
  } else if (key == "init_stddev") {
    c.init_stddev = parse_double(value, key);
  } else if (key == "plateau_window") {
    c.plateau_window = parse_int(value, key);
  } else if (key == "batch_size") {
    c.batch_size = parse_int(value, key);
  } else if (key == "max_len") {
    c.max_len = parse_int(value, key);
  } else if (key == "epochs") {
    c.epochs = parse_int(value, key);
  } else if (key == "max_updates") {
    c.max_updates = parse_int(value, key);
  } else if (key == "eval_every") {
    c.eval_every = parse_int(value, key);
  } else if (key == "workers") {
    c.workers = parse_int(value, key);
  } else if (key == "seed") {
    c.seed = static_cast<uint64_t>(std::stoull(value));
  } else if (key == "checkpoint_dir") {
    c.checkpoint_dir = value;
  } else if (key == "beam_width") {
    c.beam_width = parse_int(value, key);
  } else if (key == "train_src") {
    c.train_src = value;
  } else if (key == "train_tgt") {
    c.train_tgt = value;
  } else if (key == "dev_src") {
    c.dev_src = value;
  } else if (key == "dev_tgt") {
    c.dev_tgt = value;
  } else if (key == "src_vocab") {
    c.src_vocab = value;
  } else if (key == "tgt_vocab") {
    c.tgt_vocab = value;
  } else {
    throw std::invalid_argument("config: unknown key: " + key);
  }
}

inline void apply_config_line(RunConfig& c, const std::string& raw, const std::string& where) {
  std::string line = raw;
  std::size_t hash = line.find('#');
  if (hash != std::string::npos) line = line.substr(0, hash);
  line = detail::trim(line);
  if (line.empty()) return;
  std::size_t eq = line.find('=');
  check(eq != std::string::npos, "config: expected key=value " + where + ": " + raw);
  std::string key = detail::trim(line.substr(0, eq));
  std::string value = detail::trim(line.substr(eq + 1));
  check(!key.empty(), "config: empty key " + where);
  set_config_key(c, key, value);
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  check(bool(is), "config: cannot open: " + path);
  RunConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    apply_config_line(c, line, "at " + path + ":" + std::to_string(lineno));
  }
  return c;
}

// command-line overrides, each "key=value", applied after the file
inline void apply_overrides(RunConfig& c, const std::vector<std::string>& sets) {
  for (const auto& s : sets) apply_config_line(c, s, "in --set " + s);
}

inline void validate_run_config(const RunConfig& c) {
  check(c.embed_dim > 0 && c.hidden_dim > 0, "config: dims must be positive");
  check(c.attn_dim >= 0, "config: attn_dim must be >= 0");
  check(c.enc_layers >= 1 && c.dec_layers >= 1, "config: need at least one layer per stack");
  check(c.dropout >= 0.0 && c.dropout < 1.0, "config: dropout must be in [0,1)");
  check(c.src_vocab_size > kNumSpecialTokens && c.tgt_vocab_size > kNumSpecialTokens,
        "config: vocab caps must exceed the reserved specials");
  check(c.rho > 0.0 && c.rho < 1.0, "config: rho must be in (0,1)");
  check(c.epsilon > 0.0, "config: epsilon must be positive");
  check(c.tau > 0.0 && c.tau_min > 0.0 && c.tau >= c.tau_min, "config: tau must be >= tau_min > 0");
  check(c.delta_min >= 0.0, "config: delta_min must be >= 0");
  check(c.init_stddev > 0.0, "config: init_stddev must be positive");
  check(c.plateau_window >= 2, "config: plateau_window must be >= 2");
  check(c.batch_size >= 1, "config: batch_size must be >= 1");
  check(c.max_len >= 1, "config: max_len must be >= 1");
  check(c.epochs >= 1, "config: epochs must be >= 1");
  check(c.max_updates >= 0, "config: max_updates must be >= 0");
  check(c.eval_every >= 1, "config: eval_every must be >= 1");
  check(c.workers >= 1, "config: workers must be >= 1");
  check(c.beam_width >= 1, "config: beam_width must be >= 1");
}

// canonical emission: parseable by load_run_config, stable key order
inline std::string render_config(const RunConfig& c) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "cell=" << c.cell << "\n";
  os << "embed_dim=" << c.embed_dim << "\n";
  os << "hidden_dim=" << c.hidden_dim << "\n";
  os << "attn_dim=" << c.attn_dim << "\n";
  os << "enc_layers=" << c.enc_layers << "\n";
  os << "dec_layers=" << c.dec_layers << "\n";
  os << "residual=" << (c.residual ? "true" : "false") << "\n";
  os << "dropout=" << num(c.dropout) << "\n";
  os << "src_vocab_size=" << c.src_vocab_size << "\n";
  os << "tgt_vocab_size=" << c.tgt_vocab_size << "\n";
  os << "rho=" << num(c.rho) << "\n";
  os << "epsilon=" << num(c.epsilon) << "\n";
  os << "tau=" << num(c.tau) << "\n";
  os << "tau_min=" << num(c.tau_min) << "\n";
  os << "delta_min=" << num(c.delta_min) << "\n";
  os << "init_stddev=" << num(c.init_stddev) << "\n";
  os << "plateau_window=" << c.plateau_window << "\n";
  os << "batch_size=" << c.batch_size << "\n";
  os << "max_len=" << c.max_len << "\n";
  os << "epochs=" << c.epochs << "\n";
  os << "max_updates=" << c.max_updates << "\n";
  os << "eval_every=" << c.eval_every << "\n";
  os << "workers=" << c.workers << "\n";
  os << "seed=" << c.seed << "\n";
  os << "checkpoint_dir=" << c.checkpoint_dir << "\n";
  os << "beam_width=" << c.beam_width << "\n";
  os << "train_src=" << c.train_src << "\n";
  os << "train_tgt=" << c.train_tgt << "\n";
  os << "dev_src=" << c.dev_src << "\n";
  os << "dev_tgt=" << c.dev_tgt << "\n";
  os << "src_vocab=" << c.src_vocab << "\n";
  os << "tgt_vocab=" << c.tgt_vocab << "\n";
  return os.str();
}

}  // namespace lau
