#pragma once

#include <cmath>
#include <set>

#include "vist/metrics/eval_pair.hpp"

namespace vist::metrics {

inline constexpr std::size_t kCiderMaxN = 4;

// Document frequencies over reference sets: df(g) counts the stories whose
// references contain g at least once.
class CiderScorer {
 public:
  explicit CiderScorer(const std::vector<TokenizedPair>& corpus) : n_docs_(static_cast<double>(corpus.size())) {
    if (corpus.size() < 2) throw InvalidArgument("cider: corpus needs at least 2 stories");
    for (const auto& p : corpus) {
      for (std::size_t n = 1; n <= kCiderMaxN; ++n) {
        std::set<Tokens> seen;
        for (const auto& r : p.references) {
          for (const auto& [g, c] : ngram_counts(r, n)) seen.insert(g);
        }
        for (const auto& g : seen) ++df_[g];
      }
    }
  }

  // 10 x mean over n of the TF-IDF cosine, averaged over references.
  double score(const TokenizedPair& p) const {
    double total = 0.0;
    for (std::size_t n = 1; n <= kCiderMaxN; ++n) {
      const auto cand = weights(ngram_counts(p.candidate, n));
      double sim = 0.0;
      for (const auto& r : p.references) sim += cosine(cand, weights(ngram_counts(r, n)));
      total += sim / static_cast<double>(p.references.size());
    }
    return 10.0 * total / static_cast<double>(kCiderMaxN);
  }

  // Unseen n-grams get df 1, i.e. idf log N.
  double idf(const Tokens& g) const {
    const auto it = df_.find(g);
    const double df = it == df_.end() ? 1.0 : std::max(1.0, it->second);
    return std::log(n_docs_ / df);
  }

 private:
  using Weights = std::map<Tokens, double>;

  Weights weights(const NgramCounts& counts) const {
    Weights w;
    for (const auto& [g, c] : counts) w[g] = c * idf(g);
    return w;
  }

  static double cosine(const Weights& a, const Weights& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [g, x] : a) {
      na += x * x;
      const auto it = b.find(g);
      if (it != b.end()) dot += x * it->second;
    }
    for (const auto& [g, y] : b) nb += y * y;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
  }

  double n_docs_;
  std::map<Tokens, double> df_;
};

// Per-story CIDEr scores in corpus order.
inline std::vector<double> cider_scores(const std::vector<TokenizedPair>& corpus) {
  const CiderScorer scorer(corpus);
  std::vector<double> out;
  out.reserve(corpus.size());
  for (const auto& p : corpus) out.push_back(scorer.score(p));
  return out;
}

inline double corpus_cider(const std::vector<TokenizedPair>& corpus) {
  double sum = 0.0;
  for (const double s : cider_scores(corpus)) sum += s;
  return sum / static_cast<double>(corpus.size());
}

}  // namespace vist::metrics
