#pragma once

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "vist/errors.hpp"
#include "vist/text/skipgram.hpp"
#include "vist/text/vocab.hpp"

namespace vist::text {

// Text embedding format:
//   vocab_size embed_dim
//   token v1 v2 ... vD
// One row per token id, written with enough digits to round-trip exactly.
template <typename T>
void write_embeddings(std::ostream& os, const Vocab& vocab, const EmbeddingTable<T>& emb) {
  if (static_cast<std::size_t>(emb.vocab_size()) != vocab.size()) {
    throw DimensionError("write_embeddings: table rows do not match vocabulary size");
  }
  os << emb.vocab_size() << ' ' << emb.embed_dim() << '\n';
  char buf[64];
  for (Eigen::Index r = 0; r < emb.vocab_size(); ++r) {
    os << vocab.token(static_cast<TokenId>(r));
    for (Eigen::Index c = 0; c < emb.embed_dim(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof buf, emb.table(r, c));
      os << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    os << '\n';
  }
}

struct TextEmbeddings {
  std::vector<std::string> tokens;
  Matrix<double> table;
};

inline TextEmbeddings read_embeddings(std::istream& is) {
  auto malformed = [](std::size_t line, const std::string& why) {
    return FormatError(FormatError::Kind::kMalformed,
                       "embeddings line " + std::to_string(line) + ": " + why);
  };
  std::string line;
  if (!std::getline(is, line)) throw malformed(1, "missing header");
  std::istringstream header(line);
  long rows = -1, dim = -1;
  if (!(header >> rows >> dim) || rows < 0 || dim < 1) throw malformed(1, "bad header");

  TextEmbeddings out;
  out.table.resize(rows, dim);
  for (long r = 0; r < rows; ++r) {
    const std::size_t lineno = static_cast<std::size_t>(r) + 2;
    if (!std::getline(is, line)) {
      throw FormatError(FormatError::Kind::kTruncated,
                        "embeddings: expected " + std::to_string(rows) + " rows, got " +
                            std::to_string(r));
    }
    std::istringstream fields(line);
    std::string tok;
    if (!(fields >> tok)) throw malformed(lineno, "empty row");
    std::string value;
    long c = 0;
    while (fields >> value) {
      if (c >= dim) throw malformed(lineno, "too many values");
      double v = 0;
      const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
      if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        throw malformed(lineno, "bad number '" + value + "'");
      }
      out.table(r, c++) = v;
    }
    if (c != dim) throw malformed(lineno, "expected " + std::to_string(dim) + " values");
    out.tokens.push_back(std::move(tok));
  }
  return out;
}

// Places imported rows at the ids `vocab` assigns; tokens absent from the
// file keep the rows of `fallback`.
template <typename T>
EmbeddingTable<T> align_embeddings(const TextEmbeddings& imported, const Vocab& vocab,
                                   const EmbeddingTable<T>& fallback) {
  if (fallback.embed_dim() != imported.table.cols()) {
    throw DimensionError("align_embeddings: embedding dimension mismatch");
  }
  EmbeddingTable<T> out = fallback;
  for (std::size_t r = 0; r < imported.tokens.size(); ++r) {
    if (!vocab.contains(imported.tokens[r])) continue;
    out.table.row(vocab.id(imported.tokens[r])) =
        imported.table.row(static_cast<Eigen::Index>(r)).template cast<T>();
  }
  return out;
}

}  // namespace vist::text
