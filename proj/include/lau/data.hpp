// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Corpus ingestion, vocabulary construction, length-bucketed batching and the
// synthetic task generators used for desk-scale experiments.
//
// File formats:
//   corpus  — UTF-8 text, one sentence per line, whitespace-tokenized,
//             source and target sides in separate parallel files;
//   vocab   — one non-special token per line; line i holds the token with
//             id i + 4 (ids 0..3 are the implicit PAD/BOS/EOS/UNK specials).
//
// Batching groups pairs by exact (src_len, tgt_len) so no batch ever needs
// padding or masks. EOS is appended to both sides here; BOS is injected by
// the teacher-forcing loop at use time and never stored.

#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "lau/model.hpp"

namespace lau {

class Vocab {
 public:
  Vocab() = default;

  // `ordered` holds the non-special tokens, id = position + 4
  explicit Vocab(std::vector<std::string> ordered) : tokens_(std::move(ordered)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i)
      map_.emplace(tokens_[i], static_cast<int32_t>(i) + kNumSpecialTokens);
  }

  int32_t size() const { return static_cast<int32_t>(tokens_.size()) + kNumSpecialTokens; }

  int32_t id(const std::string& token) const {
    auto it = map_.find(token);
    return it == map_.end() ? kUnkId : it->second;
  }

  const std::string& token(int32_t id) const {
    static const std::string specials[] = {"<pad>", "<bos>", "<eos>", "<unk>"};
    check(id >= 0 && id < size(), "Vocab::token: id out of range");
    if (id < kNumSpecialTokens) return specials[id];
    return tokens_[static_cast<std::size_t>(id - kNumSpecialTokens)];
  }

  const std::vector<std::string>& ordered_tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> map_;
};

// Frequency-ranked vocabulary: top (max_size - 4) tokens, ties broken by
// first occurrence in the corpus.
inline Vocab build_vocab(const std::vector<std::vector<std::string>>& side, int32_t max_size) {
  check(max_size > kNumSpecialTokens, "build_vocab: max_size must exceed the specials");
  check(!side.empty(), "build_vocab: empty corpus");
  std::unordered_map<std::string, std::pair<int64_t, int64_t>> stats;  // token -> (count, first)
  int64_t position = 0;
  for (const auto& sent : side)
    for (const auto& tok : sent) {
      auto [it, inserted] = stats.emplace(tok, std::make_pair(int64_t{0}, position));
      it->second.first += 1;
      ++position;
    }
  std::vector<std::pair<std::string, std::pair<int64_t, int64_t>>> ranked(stats.begin(),
                                                                          stats.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.first != b.second.first) return a.second.first > b.second.first;
    return a.second.second < b.second.second;
  });
  const std::size_t keep =
      std::min(ranked.size(), static_cast<std::size_t>(max_size - kNumSpecialTokens));
  std::vector<std::string> tokens;
  tokens.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) tokens.push_back(ranked[i].first);
  return Vocab(std::move(tokens));
}

inline void save_vocab(const Vocab& v, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  check(out.good(), "save_vocab: cannot open " + path);
  for (const auto& tok : v.ordered_tokens()) out << tok << '\n';
}

inline Vocab load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "load_vocab: cannot open " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }
  return Vocab(std::move(tokens));
}

inline std::vector<int32_t> to_ids(const Vocab& v, const std::vector<std::string>& tokens) {
  std::vector<int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(v.id(t));
  return ids;
}

inline std::vector<std::string> to_tokens(const Vocab& v, const std::vector<int32_t>& ids) {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (int32_t id : ids) tokens.push_back(v.token(id));
  return tokens;
}

// ---------------------------------------------------------------------------
// corpora

struct ParallelCorpus {
  std::vector<std::vector<std::string>> src, tgt;

  std::size_t size() const { return src.size(); }
};

inline std::vector<std::string> split_tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> toks;
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

inline std::string join_tokens(const std::vector<std::string>& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out += ' ';
    out += toks[i];
  }
  return out;
}

inline std::vector<std::vector<std::string>> load_tokenized_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "load_tokenized_lines: cannot open " + path);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(split_tokens(line));
  }
  return out;
}

// Loads a sentence-aligned pair of files, dropping pairs where either side is
// empty.
inline ParallelCorpus load_parallel(const std::string& src_path, const std::string& tgt_path) {
  auto src = load_tokenized_lines(src_path);
  auto tgt = load_tokenized_lines(tgt_path);
  check(src.size() == tgt.size(), "load_parallel: sides have different line counts");
  ParallelCorpus corpus;
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].empty() || tgt[i].empty()) continue;
    corpus.src.push_back(std::move(src[i]));
    corpus.tgt.push_back(std::move(tgt[i]));
  }
  check(!corpus.src.empty(), "load_parallel: no usable pairs");
  return corpus;
}

inline void save_lines(const std::vector<std::vector<std::string>>& sents,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  check(out.good(), "save_lines: cannot open " + path);
  for (const auto& s : sents) out << join_tokens(s) << '\n';
}

// ---------------------------------------------------------------------------
// batching

// Groups pairs by exact (src_len, tgt_len) and chunks each group into batches
// of at most batch_size, preserving corpus order. Pairs with either side
// longer than max_len tokens are dropped. EOS is appended to both sides.
inline std::vector<Batch> make_batches(const ParallelCorpus& corpus, const Vocab& vsrc,
                                       const Vocab& vtgt, int batch_size, int max_len) {
  check(batch_size >= 1, "make_batches: batch_size must be positive");
  check(max_len >= 1, "make_batches: max_len must be positive");
  std::map<std::pair<int, int>, std::vector<std::size_t>> buckets;
  std::vector<std::pair<int, int>> bucket_order;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const int sl = static_cast<int>(corpus.src[i].size());
    const int tl = static_cast<int>(corpus.tgt[i].size());
    if (sl == 0 || tl == 0 || sl > max_len || tl > max_len) continue;
    const auto key = std::make_pair(sl, tl);
    auto [it, inserted] = buckets.emplace(key, std::vector<std::size_t>{});
    if (inserted) bucket_order.push_back(key);
    it->second.push_back(i);
  }
  check(!bucket_order.empty(), "make_batches: nothing survives the length filter");

  std::vector<Batch> out;
  for (const auto& key : bucket_order) {
    const auto& members = buckets.at(key);
    for (std::size_t start = 0; start < members.size(); start += static_cast<std::size_t>(batch_size)) {
      Batch b;
      const std::size_t end =
          std::min(members.size(), start + static_cast<std::size_t>(batch_size));
      for (std::size_t k = start; k < end; ++k) {
        auto s = to_ids(vsrc, corpus.src[members[k]]);
        auto t = to_ids(vtgt, corpus.tgt[members[k]]);
        s.push_back(kEosId);
        t.push_back(kEosId);
        b.src.push_back(std::move(s));
        b.tgt.push_back(std::move(t));
      }
      out.push_back(std::move(b));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// synthetic tasks

enum class SynthKind { kCopy, kReverse, kLexiconSwap };

inline const char* synth_kind_name(SynthKind k) {
  switch (k) {
    case SynthKind::kCopy: return "copy";
    case SynthKind::kReverse: return "reverse";
    case SynthKind::kLexiconSwap: return "lexswap";
  }
  return "copy";
}

inline SynthKind synth_kind_from_name(const std::string& s) {
  if (s == "copy") return SynthKind::kCopy;
  if (s == "reverse") return SynthKind::kReverse;
  if (s == "lexswap") return SynthKind::kLexiconSwap;
  throw std::invalid_argument("unknown synthetic task: " + s);
}

struct SyntheticTaskSpec {
  SynthKind kind = SynthKind::kCopy;
  int vocab_size = 20;  // distinct word types per side
  int min_len = 3;
  int max_len = 12;
  int count = 1000;
  uint64_t seed = 1;
};

// Pure function of the spec. Source words are w0..w{V-1}; lexicon-swap maps
// through a seed-fixed bijection onto v0..v{V-1} and reverses the order, so
// the model must learn both the lexicon and the reordering.
inline ParallelCorpus generate_synthetic(const SyntheticTaskSpec& spec) {
  check(spec.vocab_size >= 1, "generate_synthetic: vocab_size must be positive");
  check(spec.min_len >= 1 && spec.min_len <= spec.max_len, "generate_synthetic: bad length range");
  check(spec.count >= 1, "generate_synthetic: count must be positive");
  Rng rng(spec.seed);

  std::vector<int> swap(static_cast<std::size_t>(spec.vocab_size));
  for (int i = 0; i < spec.vocab_size; ++i) swap[static_cast<std::size_t>(i)] = i;
  if (spec.kind == SynthKind::kLexiconSwap) rng.shuffle(swap);

  ParallelCorpus corpus;
  corpus.src.reserve(static_cast<std::size_t>(spec.count));
  corpus.tgt.reserve(static_cast<std::size_t>(spec.count));
  for (int n = 0; n < spec.count; ++n) {
    const int len = spec.min_len + static_cast<int>(rng.below(
                                       static_cast<uint64_t>(spec.max_len - spec.min_len + 1)));
    std::vector<int> words(static_cast<std::size_t>(len));
    for (auto& w : words) w = static_cast<int>(rng.below(static_cast<uint64_t>(spec.vocab_size)));

    std::vector<std::string> src, tgt;
    src.reserve(words.size());
    tgt.reserve(words.size());
    for (int w : words) src.push_back("w" + std::to_string(w));
    switch (spec.kind) {
      case SynthKind::kCopy:
        tgt = src;
        break;
      case SynthKind::kReverse:
        tgt.assign(src.rbegin(), src.rend());
        break;
      case SynthKind::kLexiconSwap:
        for (auto it = words.rbegin(); it != words.rend(); ++it)
          tgt.push_back("v" + std::to_string(swap[static_cast<std::size_t>(*it)]));
        break;
    }
    corpus.src.push_back(std::move(src));
    corpus.tgt.push_back(std::move(tgt));
  }
  return corpus;
}

}  // namespace lau
