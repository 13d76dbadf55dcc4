#include <gtest/gtest.h>

#include <sstream>

#include "vist/numerics/random.hpp"
#include "vist/text/embedding_io.hpp"
#include "vist/text/skipgram.hpp"
#include "vist/text/tokenizer.hpp"
#include "vist/text/vocab.hpp"

namespace vist::text {
namespace {

using Tokens = std::vector<std::string>;

TEST(Tokenize, SplitsTrailingPunctuation) {
  EXPECT_EQ(tokenize("This is a picture of a store."), (Tokens{"this", "is", "a", "picture", "of", "a", "store", "."}));
}

TEST(Tokenize, SplitsApostrophe) { EXPECT_EQ(tokenize("Don't stop"), (Tokens{"don", "'", "t", "stop"})); }

TEST(Tokenize, EmptyAndBlank) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" \t\n ").empty());
}

TEST(Tokenize, PunctuationRuns) {
  EXPECT_EQ(tokenize("Wow!!  (really?)"), (Tokens{"wow", "!", "!", "(", "really", "?", ")"}));
}

TEST(Tokenize, NonAsciiBytesKept) { EXPECT_EQ(tokenize("Café OK"), (Tokens{"café", "ok"})); }

TEST(Tokenize, DetokenizeRoundTripIsIdempotent) {
  Rng rng(3);
  const std::string alphabet = "abcXYZ .,!'?-\t";
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    const auto len = uniform_index(rng, 30);
    for (std::uint64_t i = 0; i < len; ++i) s += alphabet[uniform_index(rng, alphabet.size())];
    const auto once = tokenize(s);
    EXPECT_EQ(tokenize(detokenize(once)), once) << '"' << s << '"';
  }
}

TEST(Vocab, FrequencyOrder) {
  const auto v = Vocab::build({{"a", "a", "b"}}, 1);
  EXPECT_EQ(v.size(), 6u);
  EXPECT_EQ(v.id("a"), 4u);
  EXPECT_EQ(v.id("b"), 5u);
  EXPECT_EQ(v.token(kPad), "<pad>");
  EXPECT_EQ(v.token(kUnk), "<unk>");
}

TEST(Vocab, MinCountMapsRareToUnk) {
  const auto v = Vocab::build({{"a", "a", "b"}}, 2);
  EXPECT_EQ(v.size(), 5u);
  EXPECT_EQ(v.id("b"), kUnk);
  EXPECT_FALSE(v.contains("b"));
}

TEST(Vocab, TiesAreLexicographicAndStable) {
  const auto v1 = Vocab::build({{"pear", "apple", "fig"}, {"fig", "apple", "pear"}}, 1);
  const auto v2 = Vocab::build({{"apple", "pear", "fig"}, {"pear", "fig", "apple"}}, 1);
  EXPECT_EQ(v1, v2);
  EXPECT_EQ(v1.id("apple"), 4u);
  EXPECT_EQ(v1.id("fig"), 5u);
  EXPECT_EQ(v1.id("pear"), 6u);
}

TEST(Vocab, LookupIsTotalAndInverse) {
  const auto v = Vocab::build({{"the", "dog", "ran", "the", "end"}}, 1);
  EXPECT_EQ(v.id("unseen"), kUnk);
  const Tokens words = {"the", "end", "dog"};
  EXPECT_EQ(v.tokens_of(v.ids_of(words)), words);
  const std::vector<TokenId> ids = {4, 5, 6};
  EXPECT_EQ(v.ids_of(v.tokens_of(ids)), ids);
}

TEST(Vocab, TokensOfDropsControlIds) {
  const auto v = Vocab::build({{"x"}}, 1);
  EXPECT_EQ(v.tokens_of({kBos, 4, kEos, kPad}), Tokens{"x"});
  EXPECT_EQ(v.tokens_of({kUnk}), Tokens{"<unk>"});
}

TEST(Skipgram, PairsWindowOne) {
  const std::vector<std::pair<TokenId, TokenId>> want = {{4, 5}, {5, 4}, {5, 6}, {6, 5}};
  EXPECT_EQ(skipgram_pairs({4, 5, 6}, 1), want);
}

TEST(Skipgram, PairsWindowClampedAtEdges) { EXPECT_EQ(skipgram_pairs({4, 5}, 5).size(), 2u); }

double cosine(const Matrix<double>& t, TokenId a, TokenId b) {
  return t.row(a).dot(t.row(b)) / (t.row(a).norm() * t.row(b).norm());
}

// x and y always appear together, surrounded by fillers from one set; z
// appears alone among fillers from a disjoint set.
std::vector<std::vector<TokenId>> cooccurrence_corpus() {
  const TokenId x = 4, y = 5, z = 6;
  Rng rng(17);
  auto shared = [&] { return static_cast<TokenId>(7 + uniform_index(rng, 4)); };
  auto other = [&] { return static_cast<TokenId>(11 + uniform_index(rng, 4)); };
  std::vector<std::vector<TokenId>> corpus;
  for (int i = 0; i < 100; ++i) {
    corpus.push_back({shared(), x, shared(), y, shared()});
    corpus.push_back({other(), z, other()});
  }
  return corpus;
}

TEST(Skipgram, CooccurringTokensEndUpCloser) {
  SkipgramConfig cfg;
  cfg.embed_dim = 8;
  cfg.window = 2;
  const auto t = train_skipgram<double>(cooccurrence_corpus(), 15, cfg);
  EXPECT_GT(cosine(t.table, 4, 5), cosine(t.table, 4, 6));
}

TEST(Skipgram, ZeroEpochsIsInitialTable) {
  SkipgramConfig cfg;
  cfg.embed_dim = 8;
  cfg.epochs = 0;
  const auto t = train_skipgram<double>(cooccurrence_corpus(), 15, cfg);
  EXPECT_EQ(t.table, skipgram_initial_table<double>(15, cfg).table);
}

TEST(Skipgram, EpochLossNonIncreasing) {
  SkipgramConfig cfg;
  cfg.embed_dim = 8;
  cfg.window = 2;
  SkipgramStats stats;
  train_skipgram<double>(cooccurrence_corpus(), 15, cfg, &stats);
  ASSERT_EQ(stats.epoch_loss.size(), 5u);
  for (std::size_t e = 1; e < stats.epoch_loss.size(); ++e) {
    EXPECT_LE(stats.epoch_loss[e], stats.epoch_loss[e - 1]) << "epoch " << e;
  }
}

TEST(Skipgram, Deterministic) {
  SkipgramConfig cfg;
  cfg.embed_dim = 8;
  cfg.epochs = 2;
  EXPECT_EQ(train_skipgram<double>(cooccurrence_corpus(), 15, cfg).table,
            train_skipgram<double>(cooccurrence_corpus(), 15, cfg).table);
}

TEST(Skipgram, Errors) {
  SkipgramConfig cfg;
  cfg.window = 5;
  EXPECT_THROW(train_skipgram<double>({{4, 5, 6}}, 7, cfg), InvalidArgument);
  cfg.window = 0;
  EXPECT_THROW(train_skipgram<double>(cooccurrence_corpus(), 15, cfg), InvalidArgument);
  cfg.window = 1;
  cfg.negatives = 0;
  EXPECT_THROW(train_skipgram<double>(cooccurrence_corpus(), 15, cfg), InvalidArgument);
  cfg.negatives = 5;
  EXPECT_THROW(train_skipgram<double>({{4, 5, 99}}, 13, cfg), InvalidArgument);
}

TEST(EmbeddingText, RoundTripIsExact) {
  const auto vocab = Vocab::build({{"a", "b", "c"}}, 1);
  SkipgramConfig cfg;
  cfg.embed_dim = 5;
  const auto table = skipgram_initial_table<double>(vocab.size(), cfg);
  std::stringstream ss;
  write_embeddings(ss, vocab, table);
  const auto back = read_embeddings(ss);
  EXPECT_EQ(back.tokens, vocab.tokens());
  EXPECT_EQ(back.table, table.table);
}

TEST(EmbeddingText, AlignPlacesRowsByToken) {
  std::stringstream ss("2 2\nzeta 1 2\nalpha 3 4\n");
  const auto imported = read_embeddings(ss);
  const auto vocab = Vocab::build({{"alpha", "alpha", "beta"}}, 1);
  EmbeddingTable<double> fallback{Matrix<double>::Zero(static_cast<Eigen::Index>(vocab.size()), 2), true};
  const auto out = align_embeddings(imported, vocab, fallback);
  EXPECT_EQ(out.table(vocab.id("alpha"), 0), 3.0);
  EXPECT_EQ(out.table(vocab.id("alpha"), 1), 4.0);
  EXPECT_EQ(out.table.row(vocab.id("beta")).norm(), 0.0);
}

TEST(EmbeddingText, MalformedAndTruncated) {
  std::stringstream bad_header("x 2\n");
  EXPECT_THROW(read_embeddings(bad_header), FormatError);
  std::stringstream short_rows("2 2\na 1 2\n");
  try {
    read_embeddings(short_rows);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatError::Kind::kTruncated);
  }
  std::stringstream bad_value("1 2\na 1 zz\n");
  EXPECT_THROW(read_embeddings(bad_value), FormatError);
}

}  // namespace
}  // namespace vist::text
