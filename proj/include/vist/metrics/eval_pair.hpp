#pragma once

#include <map>
#include <string>
#include <vector>

#include "vist/errors.hpp"
#include "vist/text/tokenizer.hpp"

namespace vist::metrics {

using Tokens = std::vector<std::string>;

// A candidate story and its references, all as text.
struct EvalPair {
  std::string story_id;
  std::string candidate;
  std::vector<std::string> references;
};

// The same pair after tokenization.
struct TokenizedPair {
  Tokens candidate;
  std::vector<Tokens> references;
};

inline TokenizedPair tokenize_pair(const EvalPair& p) {
  if (p.references.empty()) throw InvalidArgument("story " + p.story_id + ": no reference");
  TokenizedPair out{text::tokenize(p.candidate), {}};
  for (const auto& r : p.references) {
    out.references.push_back(text::tokenize(r));
    if (out.references.back().empty()) throw InvalidArgument("story " + p.story_id + ": empty reference");
  }
  return out;
}

inline std::vector<TokenizedPair> tokenize_pairs(const std::vector<EvalPair>& pairs) {
  std::vector<TokenizedPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(tokenize_pair(p));
  return out;
}

using NgramCounts = std::map<Tokens, int>;

inline NgramCounts ngram_counts(const Tokens& t, std::size_t n) {
  NgramCounts out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) ++out[Tokens(t.begin() + i, t.begin() + i + n)];
  return out;
}

}  // namespace vist::metrics
