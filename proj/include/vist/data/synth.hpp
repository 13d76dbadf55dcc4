#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vist/data/embedding_store.hpp"
#include "vist/data/stories.hpp"
#include "vist/numerics/random.hpp"

namespace vist::data {

// Word lists for the template grammar. The opener marker appears only in
// position-1 texts and the closer marker only in position-5 texts.
struct SynthVocab {
  std::vector<std::string> nouns = {"dog",  "cake", "beach", "car",   "tree",  "baby",
                                    "band", "boat", "house", "horse", "bride", "train"};
  std::vector<std::string> adjectives = {"big", "red", "happy", "old", "small", "bright", "quiet", "new"};
  std::vector<std::string> verbs = {"played", "waited", "danced", "slept", "jumped", "smiled", "stood", "ran"};
  std::vector<std::string> places = {"park", "city", "garden", "street"};
  std::string opener = "once";
  std::string closer = "end";
};

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t n_stories = 10;
  std::size_t image_dim = 64;
  double noise = 0.3;  // isotropic noise norm relative to the unit noun prototype
  double val_fraction = 0.0;
  double test_fraction = 0.0;
  SynthVocab vocab;
};

struct SynthDataset {
  std::vector<StoryRecord> records;
  EmbeddingStore store;
};

namespace detail {

inline std::vector<float> unit_gaussian(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = standard_normal(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

template <typename E>
const E& pick(const std::vector<E>& items, Rng& rng) {
  return items[static_cast<std::size_t>(uniform_index(rng, items.size()))];
}

}  // namespace detail

// Deterministic desk-scale dataset. Each photo embedding is a unit-norm
// noisy copy of a prototype for the noun its segment mentions; segment
// texts follow position-dependent templates.
inline SynthDataset synth_dataset(const SynthConfig& cfg) {
  if (cfg.n_stories < 1) throw InvalidArgument("synth_dataset: n_stories must be >= 1");
  if (cfg.image_dim < 1) throw InvalidArgument("synth_dataset: image_dim must be >= 1");
  const auto& voc = cfg.vocab;
  if (voc.nouns.empty() || voc.adjectives.empty() || voc.verbs.empty() || voc.places.empty()) {
    throw InvalidArgument("synth_dataset: every word list must be non-empty");
  }

  Rng proto_rng(cfg.seed ^ 0x5bd1e995ULL);
  std::vector<std::vector<float>> prototypes;
  for (std::size_t n = 0; n < voc.nouns.size(); ++n) {
    prototypes.push_back(detail::unit_gaussian(proto_rng, cfg.image_dim));
  }

  Rng rng(cfg.seed);
  SynthDataset out{{}, EmbeddingStore(cfg.image_dim)};
  const auto n_test = static_cast<std::size_t>(std::floor(cfg.test_fraction * cfg.n_stories));
  const auto n_val = static_cast<std::size_t>(std::floor(cfg.val_fraction * cfg.n_stories));
  const std::size_t n_train = cfg.n_stories - std::min(cfg.n_stories, n_test + n_val);

  for (std::size_t s = 0; s < cfg.n_stories; ++s) {
    StoryRecord rec;
    rec.story_id = "synth" + std::to_string(s);
    rec.split = s < n_train ? "train" : (s < n_train + n_val ? "val" : "test");
    for (std::size_t k = 0; k < kNumImages; ++k) {
      const auto noun_idx = static_cast<std::size_t>(uniform_index(rng, voc.nouns.size()));
      const std::string& noun = voc.nouns[noun_idx];
      const std::string& adj = detail::pick(voc.adjectives, rng);
      const std::string& verb = detail::pick(voc.verbs, rng);
      const std::string& place = detail::pick(voc.places, rng);
      const auto variant = uniform_index(rng, 2);

      std::string text;
      if (k == 0) {
        text = variant == 0 ? voc.opener + " there was a " + adj + " " + noun + " ."
                            : voc.opener + " we saw the " + noun + " in the " + place + " .";
      } else if (k + 1 == kNumImages) {
        text = variant == 0 ? "in the " + voc.closer + " the " + noun + " " + verb + " ."
                            : "at the " + voc.closer + " the " + adj + " " + noun + " " + verb + " .";
      } else {
        text = variant == 0 ? "the " + noun + " " + verb + " in the " + place + " ."
                            : "a " + adj + " " + noun + " " + verb + " .";
      }
      rec.texts[k] = text;

      const auto noise = detail::unit_gaussian(rng, cfg.image_dim);
      std::vector<float> v(cfg.image_dim);
      double norm = 0.0;
      for (std::size_t i = 0; i < cfg.image_dim; ++i) {
        v[i] = static_cast<float>(prototypes[noun_idx][i] + cfg.noise * noise[i]);
        norm += static_cast<double>(v[i]) * v[i];
      }
      norm = std::sqrt(norm);
      for (auto& x : v) x = static_cast<float>(x / norm);
      rec.photos[k] = rec.story_id + "_p" + std::to_string(k + 1);
      out.store.insert(rec.photos[k], std::move(v));
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace vist::data
