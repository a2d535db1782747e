// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Corpus BLEU-4 in the multi-bleu.pl formulation: clipped n-gram matches are
// summed over the whole corpus, the four precisions are combined by a
// geometric mean, and the brevity penalty is min(1, e^{1-r/c}). There is no
// smoothing — a zero match count at any order makes the corpus score 0,
// exactly like the reference script. Scores live on [0, 100].
//
// Single reference per sentence. Case-insensitive mode lowercases ASCII
// letters on both sides before n-gram extraction.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lau/tensor.hpp"

namespace lau {

struct BleuReport {
  double bleu = 0.0;  // [0, 100]
  double bp = 1.0;
  std::array<double, 4> precisions{};       // p1..p4 in [0, 1]
  std::array<int64_t, 4> matched{};         // clipped matches per order
  std::array<int64_t, 4> total{};           // candidate n-gram counts per order
  int64_t hyp_len = 0, ref_len = 0;
  int64_t sentences = 0;
};

namespace detail {

inline std::string fold_case(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

// counts of order-n n-grams (n-grams joined with a separator byte)
inline std::map<std::string, int64_t> ngram_counts(const std::vector<std::string>& tokens, int n) {
  std::map<std::string, int64_t> counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    std::string key;
    for (int k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += tokens[i + static_cast<std::size_t>(k)];
    }
    counts[key] += 1;
  }
  return counts;
}

}  // namespace detail

inline BleuReport corpus_bleu(const std::vector<std::vector<std::string>>& hyps,
                              const std::vector<std::vector<std::string>>& refs,
                              bool case_sensitive = true) {
  check(!hyps.empty(), "corpus_bleu: empty corpus");
  check(hyps.size() == refs.size(), "corpus_bleu: hypothesis/reference count mismatch");

  BleuReport rep;
  rep.sentences = static_cast<int64_t>(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    std::vector<std::string> hyp = hyps[i], ref = refs[i];
    if (!case_sensitive) {
      for (auto& t : hyp) t = detail::fold_case(t);
      for (auto& t : ref) t = detail::fold_case(t);
    }
    rep.hyp_len += static_cast<int64_t>(hyp.size());
    rep.ref_len += static_cast<int64_t>(ref.size());
    for (int n = 1; n <= 4; ++n) {
      auto hyp_counts = detail::ngram_counts(hyp, n);
      auto ref_counts = detail::ngram_counts(ref, n);
      for (const auto& [gram, count] : hyp_counts) {
        rep.total[static_cast<std::size_t>(n - 1)] += count;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end())
          rep.matched[static_cast<std::size_t>(n - 1)] += std::min(count, it->second);
      }
    }
  }

  bool any_zero = false;
  for (int n = 0; n < 4; ++n) {
    rep.precisions[static_cast<std::size_t>(n)] =
        rep.total[static_cast<std::size_t>(n)] > 0
            ? static_cast<double>(rep.matched[static_cast<std::size_t>(n)]) /
                  static_cast<double>(rep.total[static_cast<std::size_t>(n)])
            : 0.0;
    if (rep.precisions[static_cast<std::size_t>(n)] == 0.0) any_zero = true;
  }
  rep.bp = rep.hyp_len >= rep.ref_len
               ? 1.0
               : std::exp(1.0 - static_cast<double>(rep.ref_len) / static_cast<double>(rep.hyp_len));
  if (any_zero || rep.hyp_len == 0) {
    rep.bleu = 0.0;
    return rep;
  }
  double log_avg = 0;
  for (int n = 0; n < 4; ++n) log_avg += std::log(rep.precisions[static_cast<std::size_t>(n)]);
  rep.bleu = 100.0 * rep.bp * std::exp(log_avg / 4.0);
  return rep;
}

// BLEU restricted to pairs whose SOURCE is longer than a threshold; absent
// buckets (no qualifying pair) are reported, not scored as zero.
struct BucketReport {
  int threshold = 0;
  bool present = false;
  int64_t pairs = 0;
  BleuReport report;
};

inline std::vector<BucketReport> bleu_by_length(
    const std::vector<std::vector<std::string>>& hyps,
    const std::vector<std::vector<std::string>>& refs, const std::vector<int>& src_lengths,
    const std::vector<int>& thresholds = {10, 20, 30, 40, 50, 60}, bool case_sensitive = true) {
  check(hyps.size() == refs.size() && hyps.size() == src_lengths.size(),
        "bleu_by_length: aligned inputs required");
  std::vector<BucketReport> out;
  for (int thr : thresholds) {
    BucketReport bucket;
    bucket.threshold = thr;
    std::vector<std::vector<std::string>> h, r;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      if (src_lengths[i] > thr) {
        h.push_back(hyps[i]);
        r.push_back(refs[i]);
      }
    }
    bucket.pairs = static_cast<int64_t>(h.size());
    if (!h.empty()) {
      bucket.present = true;
      bucket.report = corpus_bleu(h, r, case_sensitive);
    }
    out.push_back(std::move(bucket));
  }
  return out;
}

// key=value block, one line per field, plot-ready
inline std::string bleu_kv(const BleuReport& rep, const std::vector<BucketReport>* buckets =
                                                      nullptr) {
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof buf, "bleu=%.6f\n", rep.bleu);
  out += buf;
  std::snprintf(buf, sizeof buf, "bp=%.6f\n", rep.bp);
  out += buf;
  for (int n = 0; n < 4; ++n) {
    std::snprintf(buf, sizeof buf, "p%d=%.6f\n", n + 1, rep.precisions[static_cast<std::size_t>(n)]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "hyp_len=%lld\nref_len=%lld\n",
                static_cast<long long>(rep.hyp_len), static_cast<long long>(rep.ref_len));
  out += buf;
  if (buckets) {
    for (const auto& b : *buckets) {
      if (b.present)
        std::snprintf(buf, sizeof buf, "bucket_gt%d=%.6f\n", b.threshold, b.report.bleu);
      else
        std::snprintf(buf, sizeof buf, "bucket_gt%d=absent\n", b.threshold);
      out += buf;
    }
  }
  return out;
}

}  // namespace lau
