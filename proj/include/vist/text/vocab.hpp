#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "vist/errors.hpp"

namespace vist::text {

using TokenId = std::uint32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr TokenId kNumReserved = 4;

class Vocab {
 public:
  Vocab() {
    for (const char* t : {"<pad>", "<bos>", "<eos>", "<unk>"}) add(t, 0);
  }

  // Tokens with frequency >= min_count get ids after the reserved ones,
  // most frequent first, ties broken lexicographically.
  static Vocab build(const std::vector<std::vector<std::string>>& corpus, std::uint64_t min_count) {
    if (min_count < 1) throw InvalidArgument("build_vocab: min_count must be >= 1");
    std::map<std::string, std::uint64_t> counts;
    for (const auto& sentence : corpus) {
      for (const auto& tok : sentence) ++counts[tok];
    }
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    for (auto& [tok, n] : counts) {
      if (n >= min_count && !is_reserved_token(tok)) kept.emplace_back(tok, n);
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocab v;
    for (auto& [tok, n] : kept) v.add(tok, n);
    return v;
  }

  // Rebuilds a vocabulary from a serialized id-ordered token list.
  static Vocab from_tokens(const std::vector<std::string>& tokens,
                           const std::vector<std::uint64_t>& counts) {
    if (tokens.size() < kNumReserved || tokens.size() != counts.size()) {
      throw FormatError(FormatError::Kind::kMalformed, "vocab: bad token table");
    }
    Vocab v;
    for (TokenId id = 0; id < kNumReserved; ++id) {
      if (tokens[id] != v.tokens_[id]) {
        throw FormatError(FormatError::Kind::kMalformed, "vocab: reserved ids out of place");
      }
    }
    for (std::size_t i = kNumReserved; i < tokens.size(); ++i) {
      if (v.index_.count(tokens[i])) {
        throw FormatError(FormatError::Kind::kDuplicate, "vocab: duplicate token '" + tokens[i] + "'");
      }
      v.add(tokens[i], counts[i]);
    }
    return v;
  }

  std::size_t size() const { return tokens_.size(); }

  TokenId id(const std::string& token) const {
    const auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
  }

  bool contains(const std::string& token) const { return index_.count(token) != 0; }

  const std::string& token(TokenId id) const {
    if (id >= tokens_.size()) throw InvalidArgument("vocab: id out of range");
    return tokens_[id];
  }

  std::uint64_t count(TokenId id) const { return counts_.at(id); }

  std::vector<TokenId> ids_of(const std::vector<std::string>& tokens) const {
    std::vector<TokenId> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(id(t));
    return out;
  }

  // Reserved markers other than <unk> are dropped.
  std::vector<std::string> tokens_of(const std::vector<TokenId>& ids) const {
    std::vector<std::string> out;
    for (const auto id : ids) {
      if (id == kPad || id == kBos || id == kEos) continue;
      out.push_back(token(id));
    }
    return out;
  }

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.tokens_ == b.tokens_ && a.counts_ == b.counts_;
  }

 private:
  static bool is_reserved_token(const std::string& t) {
    return t == "<pad>" || t == "<bos>" || t == "<eos>" || t == "<unk>";
  }

  void add(const std::string& token, std::uint64_t n) {
    index_.emplace(token, static_cast<TokenId>(tokens_.size()));
    tokens_.push_back(token);
    counts_.push_back(n);
  }

  std::unordered_map<std::string, TokenId> index_;
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
};

}  // namespace vist::text
