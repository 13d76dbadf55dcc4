#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "vist/data/candidates.hpp"
#include "vist/text/tokenizer.hpp"

namespace vist::cli {

inline constexpr std::size_t kRepeatN = 4;

// True when some n-gram occurs in two different segments of one story.
inline bool repeats_across_segments(const std::array<std::string, model::kNumImages>& texts,
                                    std::size_t n = kRepeatN) {
  std::map<std::vector<std::string>, std::size_t> first_segment;
  for (std::size_t k = 0; k < texts.size(); ++k) {
    const auto tokens = text::tokenize(texts[k]);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::vector<std::string> gram(tokens.begin() + static_cast<long>(i), tokens.begin() + static_cast<long>(i + n));
      const auto [it, fresh] = first_segment.emplace(std::move(gram), k);
      if (!fresh && it->second != k) return true;
    }
  }
  return false;
}

struct RepetitionSummary {
  double fraction = 0.0;
  std::vector<std::string> flagged;
};

inline RepetitionSummary repetition_summary(const std::vector<data::CandidateRecord>& stories) {
  RepetitionSummary s;
  for (const auto& c : stories) {
    if (repeats_across_segments(c.texts)) s.flagged.push_back(c.story_id);
  }
  if (!stories.empty()) s.fraction = static_cast<double>(s.flagged.size()) / static_cast<double>(stories.size());
  return s;
}

}  // namespace vist::cli
