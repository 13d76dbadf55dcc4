#pragma once

#include <vector>

#include "vist/data/embedding_store.hpp"
#include "vist/data/stories.hpp"
#include "vist/model/objective.hpp"
#include "vist/text/tokenizer.hpp"
#include "vist/text/vocab.hpp"

namespace vist::data {

// Every segment text as a token list, in record order.
inline std::vector<std::vector<std::string>> segment_corpus(const std::vector<StoryRecord>& records) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : records) {
    for (const auto& t : r.texts) out.push_back(text::tokenize(t));
  }
  return out;
}

inline std::vector<std::vector<text::TokenId>> segment_ids(const std::vector<StoryRecord>& records,
                                                           const text::Vocab& vocab) {
  std::vector<std::vector<text::TokenId>> out;
  for (const auto& tokens : segment_corpus(records)) out.push_back(vocab.ids_of(tokens));
  return out;
}

inline model::Story reference_story(const StoryRecord& rec, const text::Vocab& vocab) {
  model::Story s;
  for (std::size_t k = 0; k < kNumImages; ++k) s.segments[k] = vocab.ids_of(text::tokenize(rec.texts[k]));
  return s;
}

// Joins records with their embeddings; throws MissingEmbedding before any
// example is built if a photo is unresolvable.
template <typename T>
std::vector<model::Example<T>> build_examples(const std::vector<StoryRecord>& records,
                                              const EmbeddingStore& store, const text::Vocab& vocab) {
  check_joined(store, records);
  std::vector<model::Example<T>> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(model::Example<T>{resolve_images<T>(store, r), reference_story(r, vocab)});
  }
  return out;
}

}  // namespace vist::data
