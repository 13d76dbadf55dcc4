#pragma once

#include <array>
#include <cmath>
#include <cstdlib>

#include "vist/metrics/eval_pair.hpp"

namespace vist::metrics {

inline constexpr std::size_t kMaxBleuN = 4;

// Clipped n-gram matches and candidate n-gram totals per order, plus the
// candidate and effective reference lengths. Summing these over a corpus
// gives corpus-level BLEU.
struct BleuStats {
  std::array<double, kMaxBleuN> matches{};
  std::array<double, kMaxBleuN> totals{};
  double cand_len = 0.0;
  double ref_len = 0.0;

  BleuStats& operator+=(const BleuStats& o) {
    for (std::size_t n = 0; n < kMaxBleuN; ++n) {
      matches[n] += o.matches[n];
      totals[n] += o.totals[n];
    }
    cand_len += o.cand_len;
    ref_len += o.ref_len;
    return *this;
  }
};

// Reference length closest to the candidate length; the shorter on ties.
inline std::size_t closest_ref_length(std::size_t cand, const std::vector<Tokens>& refs) {
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    const auto d = [&](std::size_t len) { return len > cand ? len - cand : cand - len; };
    if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
  }
  return best;
}

inline BleuStats bleu_stats(const TokenizedPair& p) {
  BleuStats s;
  s.cand_len = static_cast<double>(p.candidate.size());
  s.ref_len = static_cast<double>(closest_ref_length(p.candidate.size(), p.references));
  for (std::size_t n = 1; n <= kMaxBleuN; ++n) {
    NgramCounts max_ref;
    for (const auto& r : p.references) {
      for (const auto& [g, c] : ngram_counts(r, n)) max_ref[g] = std::max(max_ref[g], c);
    }
    for (const auto& [g, c] : ngram_counts(p.candidate, n)) {
      const auto it = max_ref.find(g);
      s.matches[n - 1] += std::min(c, it == max_ref.end() ? 0 : it->second);
      s.totals[n - 1] += c;
    }
  }
  return s;
}

// BLEU-1..4 from accumulated statistics: geometric mean of the modified
// precisions up to n, times the brevity penalty. No smoothing: any zero
// precision (including an empty candidate) gives 0.
inline std::array<double, kMaxBleuN> bleu_from_stats(const BleuStats& s) {
  std::array<double, kMaxBleuN> out{};
  if (s.cand_len <= 0.0) return out;
  const double bp = s.cand_len > s.ref_len ? 1.0 : std::exp(1.0 - s.ref_len / s.cand_len);
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kMaxBleuN; ++n) {
    if (s.matches[n] <= 0.0) break;  // this and higher orders stay 0
    log_sum += std::log(s.matches[n] / s.totals[n]);
    out[n] = bp * std::exp(log_sum / static_cast<double>(n + 1));
  }
  return out;
}

inline std::array<double, kMaxBleuN> corpus_bleu(const std::vector<TokenizedPair>& pairs) {
  if (pairs.empty()) throw InvalidArgument("bleu: empty corpus");
  BleuStats total;
  for (const auto& p : pairs) total += bleu_stats(p);
  return bleu_from_stats(total);
}

inline std::array<double, kMaxBleuN> corpus_bleu(const std::vector<EvalPair>& pairs) {
  return corpus_bleu(tokenize_pairs(pairs));
}

}  // namespace vist::metrics
