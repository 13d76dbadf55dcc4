#pragma once

#include <algorithm>

#include "vist/metrics/eval_pair.hpp"

namespace vist::metrics {

inline constexpr double kRougeBeta = 1.2;

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// LCS F-measure weighted toward recall; best reference wins.
inline double rouge_l(const TokenizedPair& p) {
  double best = 0.0;
  for (const auto& ref : p.references) {
    const auto lcs = static_cast<double>(lcs_length(p.candidate, ref));
    if (lcs == 0.0) continue;
    const double prec = lcs / static_cast<double>(p.candidate.size());
    const double rec = lcs / static_cast<double>(ref.size());
    const double b2 = kRougeBeta * kRougeBeta;
    best = std::max(best, (1.0 + b2) * prec * rec / (rec + b2 * prec));
  }
  return best;
}

inline double rouge_l(const EvalPair& p) { return rouge_l(tokenize_pair(p)); }

}  // namespace vist::metrics
