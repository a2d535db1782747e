// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint archive: a single binary file holding a string manifest plus a
// list of named tensors.
//
//   magic "LAUCKPT1" | u32 version | u32 manifest entries | (key, value)*
//   | u32 tensor count | (name, "f64", u64 rows, u64 cols, payload)*
//
// Strings are u32-length-prefixed UTF-8; integers and doubles are written
// little-endian regardless of host order, so archives move across machines.
// Loading is strict: wrong magic, unknown version, missing manifest keys,
// unexpected tensor names, or shape mismatches are hard errors - a checkpoint
// either round-trips exactly or it does not load.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "lau/model.hpp"
#include "lau/optimizer.hpp"

namespace lau {

namespace detail {

inline void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_str(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void write_f64(std::ostream& os, double d) { write_u64(os, std::bit_cast<uint64_t>(d)); }

inline uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  check(bool(is), "checkpoint: truncated file");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

inline uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  check(bool(is), "checkpoint: truncated file");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

inline std::string read_str(std::istream& is) {
  uint32_t n = read_u32(is);
  check(n <= (1u << 20), "checkpoint: implausible string length");
  std::string s(n, '\0');
  is.read(s.data(), n);
  check(bool(is), "checkpoint: truncated file");
  return s;
}

inline double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

inline void write_tensor(std::ostream& os, const std::string& name, const Tensor<double>& t) {
  write_str(os, name);
  write_str(os, "f64");
  write_u64(os, t.rows());
  write_u64(os, t.cols());
  for (std::size_t i = 0; i < t.size(); ++i) write_f64(os, t.data()[i]);
}

}  // namespace detail

inline constexpr char kCheckpointMagic[9] = "LAUCKPT1";
inline constexpr uint32_t kCheckpointVersion = 1;

struct Archive {
  std::map<std::string, std::string> manifest;
  std::vector<std::pair<std::string, Tensor<double>>> tensors;  // in file order

  const Tensor<double>& tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors)
      if (n == name) return t;
    throw std::invalid_argument("checkpoint: missing tensor " + name);
  }
  const std::string& value(const std::string& key) const {
    auto it = manifest.find(key);
    check(it != manifest.end(), "checkpoint: missing manifest key " + key);
    return it->second;
  }
};

inline void save_archive(const std::string& path, const Archive& ar) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  check(bool(os), "checkpoint: cannot open for writing: " + path);
  os.write(kCheckpointMagic, 8);
  detail::write_u32(os, kCheckpointVersion);
  detail::write_u32(os, static_cast<uint32_t>(ar.manifest.size()));
  for (const auto& [k, v] : ar.manifest) {
    detail::write_str(os, k);
    detail::write_str(os, v);
  }
  detail::write_u32(os, static_cast<uint32_t>(ar.tensors.size()));
  for (const auto& [name, t] : ar.tensors) detail::write_tensor(os, name, t);
  os.flush();
  check(bool(os), "checkpoint: write failed: " + path);
}

inline Archive load_archive(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  check(bool(is), "checkpoint: cannot open: " + path);
  char magic[8];
  is.read(magic, 8);
  check(bool(is) && std::memcmp(magic, kCheckpointMagic, 8) == 0, "checkpoint: bad magic");
  uint32_t version = detail::read_u32(is);
  check(version == kCheckpointVersion, "checkpoint: unsupported version");

  Archive ar;
  uint32_t entries = detail::read_u32(is);
  for (uint32_t i = 0; i < entries; ++i) {
    std::string k = detail::read_str(is);
    ar.manifest[k] = detail::read_str(is);
  }
  uint32_t tensor_count = detail::read_u32(is);
  for (uint32_t i = 0; i < tensor_count; ++i) {
    std::string name = detail::read_str(is);
    std::string dtype = detail::read_str(is);
    check(dtype == "f64", "checkpoint: unsupported dtype " + dtype);
    uint64_t rows = detail::read_u64(is);
    uint64_t cols = detail::read_u64(is);
    check(rows * cols <= (1ull << 32), "checkpoint: implausible tensor size");
    Tensor<double> t(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (std::size_t j = 0; j < t.size(); ++j) t.data()[j] = detail::read_f64(is);
    ar.tensors.emplace_back(std::move(name), std::move(t));
  }
  // trailing garbage means the file is not what we wrote
  is.peek();
  check(is.eof(), "checkpoint: trailing bytes");
  return ar;
}

// ---- model-level helpers ----

inline void manifest_put_config(std::map<std::string, std::string>& m, const ModelConfig& cfg) {
  m["cfg.src_vocab"] = std::to_string(cfg.src_vocab);
  m["cfg.tgt_vocab"] = std::to_string(cfg.tgt_vocab);
  m["cfg.embed_dim"] = std::to_string(cfg.embed_dim);
  m["cfg.hidden_dim"] = std::to_string(cfg.hidden_dim);
  m["cfg.enc_layers"] = std::to_string(cfg.enc_layers);
  m["cfg.dec_layers"] = std::to_string(cfg.dec_layers);
  m["cfg.cell"] = cell_kind_name(cfg.cell_kind);
  m["cfg.residual"] = cfg.residual ? "1" : "0";
  char drop[32];
  std::snprintf(drop, sizeof drop, "%.17g", cfg.dropout);
  m["cfg.dropout"] = drop;
  m["cfg.attn_dim"] = std::to_string(cfg.attn_dim);
}

inline ModelConfig manifest_config(const Archive& ar) {
  ModelConfig cfg;
  cfg.src_vocab = std::stoi(ar.value("cfg.src_vocab"));
  cfg.tgt_vocab = std::stoi(ar.value("cfg.tgt_vocab"));
  cfg.embed_dim = std::stoi(ar.value("cfg.embed_dim"));
  cfg.hidden_dim = std::stoi(ar.value("cfg.hidden_dim"));
  cfg.enc_layers = std::stoi(ar.value("cfg.enc_layers"));
  cfg.dec_layers = std::stoi(ar.value("cfg.dec_layers"));
  cfg.cell_kind = cell_kind_from_name(ar.value("cfg.cell"));
  cfg.residual = ar.value("cfg.residual") == "1";
  cfg.dropout = std::stod(ar.value("cfg.dropout"));
  cfg.attn_dim = std::stoi(ar.value("cfg.attn_dim"));
  return cfg;
}

// copies the archived tensors prefixed `prefix.` into a co-shaped ModelParams
inline void fill_model_from(const Archive& ar, const std::string& prefix,
                            ModelParams<double>& m) {
  std::size_t used = 0;
  for_each_model_tensor(m, [&](const std::string& name, Tensor<double>& t) {
    const Tensor<double>& src = ar.tensor(prefix + "." + name);
    check(src.rows() == t.rows() && src.cols() == t.cols(),
          "checkpoint: shape mismatch for " + name);
    t = src;
    ++used;
  });
  std::size_t available = 0;
  for (const auto& [n, t] : ar.tensors)
    if (n.rfind(prefix + ".", 0) == 0) ++available;
  check(used == available, "checkpoint: stray tensors under prefix " + prefix);
}

// model-only checkpoint (what `translate` and `eval` load)
inline void save_model_checkpoint(const std::string& path, const ModelParams<double>& m,
                                  std::map<std::string, std::string> extra = {}) {
  Archive ar;
  ar.manifest = std::move(extra);
  manifest_put_config(ar.manifest, m.cfg);
  for_each_model_tensor(const_cast<ModelParams<double>&>(m),
                        [&](const std::string& name, Tensor<double>& t) {
                          ar.tensors.emplace_back("model." + name, t);
                        });
  save_archive(path, ar);
}

inline ModelParams<double> load_model_checkpoint(const std::string& path,
                                                 std::map<std::string, std::string>* extra = nullptr) {
  Archive ar = load_archive(path);
  ModelConfig cfg = manifest_config(ar);
  Rng rng(0);
  ModelParams<double> m = make_model<double>(cfg, rng, 0.0);
  fill_model_from(ar, "model", m);
  if (extra) *extra = ar.manifest;
  return m;
}

// full training state: model, Adadelta accumulators, clip schedule
inline void save_training_checkpoint(const std::string& path, const ModelParams<double>& m,
                                     const AdadeltaState<double>& opt, const ClipSchedule& clip,
                                     std::map<std::string, std::string> extra = {}) {
  Archive ar;
  ar.manifest = std::move(extra);
  manifest_put_config(ar.manifest, m.cfg);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", opt.rho);
  ar.manifest["opt.rho"] = buf;
  std::snprintf(buf, sizeof buf, "%.17g", opt.epsilon);
  ar.manifest["opt.epsilon"] = buf;
  std::snprintf(buf, sizeof buf, "%.17g", clip.tau);
  ar.manifest["clip.tau"] = buf;
  std::snprintf(buf, sizeof buf, "%.17g", clip.tau_min);
  ar.manifest["clip.tau_min"] = buf;
  std::snprintf(buf, sizeof buf, "%.17g", clip.delta_min);
  ar.manifest["clip.delta_min"] = buf;
  ar.manifest["clip.window"] = std::to_string(clip.window);
  ar.manifest["clip.last_halve_at"] = std::to_string(clip.last_halve_at);

  auto push_all = [&](const std::string& prefix, const ModelParams<double>& p) {
    for_each_model_tensor(const_cast<ModelParams<double>&>(p),
                          [&](const std::string& name, Tensor<double>& t) {
                            ar.tensors.emplace_back(prefix + "." + name, t);
                          });
  };
  push_all("model", m);
  push_all("eg2", opt.eg2);
  push_all("edx2", opt.edx2);
  save_archive(path, ar);
}

struct TrainingCheckpoint {
  ModelParams<double> model;
  AdadeltaState<double> opt;
  ClipSchedule clip;
  std::map<std::string, std::string> manifest;
};

inline TrainingCheckpoint load_training_checkpoint(const std::string& path) {
  Archive ar = load_archive(path);
  TrainingCheckpoint out;
  ModelConfig cfg = manifest_config(ar);
  Rng rng(0);
  out.model = make_model<double>(cfg, rng, 0.0);
  fill_model_from(ar, "model", out.model);
  out.opt = make_adadelta_state(out.model);
  fill_model_from(ar, "eg2", out.opt.eg2);
  fill_model_from(ar, "edx2", out.opt.edx2);
  out.opt.rho = std::stod(ar.value("opt.rho"));
  out.opt.epsilon = std::stod(ar.value("opt.epsilon"));
  out.clip.tau = std::stod(ar.value("clip.tau"));
  out.clip.tau_min = std::stod(ar.value("clip.tau_min"));
  out.clip.delta_min = std::stod(ar.value("clip.delta_min"));
  out.clip.window = std::stoi(ar.value("clip.window"));
  out.clip.last_halve_at = std::stoi(ar.value("clip.last_halve_at"));
  out.manifest = ar.manifest;
  return out;
}

}  // namespace lau
