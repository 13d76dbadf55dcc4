#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "vist/numerics/random.hpp"
#include "vist/numerics/tensor.hpp"
#include "vist/text/vocab.hpp"

namespace vist::text {

template <typename T>
struct EmbeddingTable {
  Matrix<T> table;  // vocab_size x embed_dim, one row per token id
  bool trainable = true;

  Eigen::Index vocab_size() const { return table.rows(); }
  Eigen::Index embed_dim() const { return table.cols(); }
};

struct SkipgramConfig {
  int embed_dim = 128;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double lr = 0.025;
  std::uint64_t seed = 1;
};

struct SkipgramStats {
  std::vector<double> epoch_loss;  // mean loss per (center, context) pair
};

// (center, context) pairs in sentence order, fixed window on both sides.
inline std::vector<std::pair<TokenId, TokenId>> skipgram_pairs(const std::vector<TokenId>& sentence,
                                                               int window) {
  std::vector<std::pair<TokenId, TokenId>> pairs;
  const auto n = static_cast<std::ptrdiff_t>(sentence.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - window);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + window);
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      if (j != i) pairs.emplace_back(sentence[i], sentence[j]);
    }
  }
  return pairs;
}

// Input-vector initialization used by train_skipgram: uniform in
// [-0.5/D, 0.5/D], drawn row-major from a generator seeded with cfg.seed.
template <typename T>
EmbeddingTable<T> skipgram_initial_table(std::size_t vocab_size, const SkipgramConfig& cfg) {
  Rng rng(cfg.seed);
  EmbeddingTable<T> out;
  out.table = Matrix<T>::Zero(static_cast<Eigen::Index>(vocab_size), cfg.embed_dim);
  const double s = 0.5 / cfg.embed_dim;
  for (Eigen::Index r = 0; r < out.table.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.table.cols(); ++c) {
      out.table(r, c) = static_cast<T>(uniform(rng, -s, s));
    }
  }
  return out;
}

namespace detail {

// Cumulative unigram^(3/4) distribution over token ids.
inline std::vector<double> negative_sampling_cdf(const std::vector<std::vector<TokenId>>& corpus,
                                                 std::size_t vocab_size) {
  std::vector<double> weight(vocab_size, 0.0);
  for (const auto& s : corpus) {
    for (const auto id : s) weight[id] += 1.0;
  }
  double total = 0.0;
  for (auto& w : weight) {
    w = std::pow(w, 0.75);
    total += w;
    w = total;
  }
  for (auto& w : weight) w /= total;
  return weight;
}

inline TokenId sample_negative(const std::vector<double>& cdf, Rng& rng) {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto id = static_cast<std::size_t>(it - cdf.begin());
  return static_cast<TokenId>(std::min(id, cdf.size() - 1));
}

}  // namespace detail

// Skip-gram with negative sampling. The learning rate decays linearly to
// 1e-4 * lr over the run. Single-threaded, deterministic for a fixed seed.
template <typename T>
EmbeddingTable<T> train_skipgram(const std::vector<std::vector<TokenId>>& corpus,
                                 std::size_t vocab_size, const SkipgramConfig& cfg,
                                 SkipgramStats* stats = nullptr) {
  if (cfg.window < 1) throw InvalidArgument("train_skipgram: window must be >= 1");
  if (cfg.negatives < 1) throw InvalidArgument("train_skipgram: negatives must be >= 1");
  if (cfg.embed_dim < 1) throw InvalidArgument("train_skipgram: embed_dim must be >= 1");
  std::size_t total_tokens = 0;
  for (const auto& s : corpus) {
    for (const auto id : s) {
      if (id >= vocab_size) throw InvalidArgument("train_skipgram: token id outside vocabulary");
    }
    total_tokens += s.size();
  }
  if (total_tokens < static_cast<std::size_t>(cfg.window) + 1) {
    throw InvalidArgument("train_skipgram: corpus shorter than window + 1 tokens");
  }

  EmbeddingTable<T> in = skipgram_initial_table<T>(vocab_size, cfg);
  if (cfg.epochs <= 0) return in;

  Matrix<T> out = Matrix<T>::Zero(in.table.rows(), in.table.cols());
  const auto cdf = detail::negative_sampling_cdf(corpus, vocab_size);
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<std::vector<std::pair<TokenId, TokenId>>> pairs;
  std::size_t pairs_per_epoch = 0;
  for (const auto& s : corpus) {
    pairs.push_back(skipgram_pairs(s, cfg.window));
    pairs_per_epoch += pairs.back().size();
  }
  const double total_steps = static_cast<double>(pairs_per_epoch) * cfg.epochs;
  double step = 0.0;

  // Rows are contiguous in a row-major copy; the table is small enough.
  using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor vin = in.table;
  RowMajor vout = out;
  Vector<T> grad(cfg.embed_dim);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss = 0.0;
    for (const auto& sentence_pairs : pairs) {
      for (const auto& [center, context] : sentence_pairs) {
        const T lr = static_cast<T>(cfg.lr * std::max(1e-4, 1.0 - step / total_steps));
        step += 1.0;
        auto v = vin.row(center);
        grad.setZero();
        for (int k = 0; k <= cfg.negatives; ++k) {
          TokenId target = context;
          T label = T(1);
          if (k > 0) {
            target = detail::sample_negative(cdf, rng);
            if (target == context) continue;
            label = T(0);
          }
          auto u = vout.row(target);
          const T score = sigmoid<T>(v.dot(u));
          const T p = label > T(0) ? score : T(1) - score;
          loss -= std::log(std::max<double>(static_cast<double>(p), 1e-300));
          const T g = (label - score) * lr;
          grad.noalias() += g * u.transpose();
          u += g * v;
        }
        v += grad.transpose();
      }
    }
    if (stats) stats->epoch_loss.push_back(pairs_per_epoch ? loss / pairs_per_epoch : 0.0);
  }
  in.table = vin;
  return in;
}

}  // namespace vist::text
