#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vist/numerics/lstm.hpp"
#include "vist/numerics/random.hpp"
#include "vist/numerics/tensor.hpp"
#include "vist/text/vocab.hpp"

namespace vist::model {

using text::TokenId;

// One decoder (and one story segment) per image.
inline constexpr std::size_t kNumImages = 5;

enum class DecoderInit {
  kHiddenAndCell,  // decoders start from the encoder's final (h, c)
  kHiddenOnly,     // decoders start from (h, 0)
};

struct ModelConfig {
  int image_dim = 2048;
  int embed_dim = 128;  // also the LSTM input size: images are projected here
  int hidden_dim = 256;
  int vocab_size = 0;
  bool share_embeddings = true;
  bool freeze_embeddings = false;
  DecoderInit decoder_init = DecoderInit::kHiddenAndCell;

  void validate() const {
    if (image_dim < 1 || embed_dim < 1 || hidden_dim < 1) {
      throw InvalidArgument("ModelConfig: dimensions must be positive");
    }
    if (vocab_size < static_cast<int>(text::kNumReserved)) {
      throw InvalidArgument("ModelConfig: vocab_size must include the reserved tokens");
    }
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Every trainable tensor. The same struct doubles as the gradient and the
// Adam moment containers.
template <typename T>
struct StoryParams {
  Matrix<T> image_proj;  // embed_dim x image_dim, shared by encoder and decoders
  LstmParams<T> encoder;
  std::array<LstmParams<T>, kNumImages> decoders;
  std::vector<Matrix<T>> embeddings;  // vocab x embed_dim; one table, or one per decoder
  std::array<Matrix<T>, kNumImages> out_w;  // vocab x hidden_dim
  std::array<Vector<T>, kNumImages> out_b;

  static StoryParams zeros(const ModelConfig& cfg) {
    StoryParams p;
    p.image_proj = Matrix<T>::Zero(cfg.embed_dim, cfg.image_dim);
    p.encoder = LstmParams<T>(cfg.embed_dim, cfg.hidden_dim);
    for (auto& d : p.decoders) d = LstmParams<T>(cfg.embed_dim, cfg.hidden_dim);
    p.embeddings.assign(cfg.share_embeddings ? 1 : kNumImages,
                        Matrix<T>::Zero(cfg.vocab_size, cfg.embed_dim));
    for (auto& w : p.out_w) w = Matrix<T>::Zero(cfg.vocab_size, cfg.hidden_dim);
    for (auto& b : p.out_b) b = Vector<T>::Zero(cfg.vocab_size);
    return p;
  }

  std::size_t embedding_index(std::size_t decoder) const {
    return embeddings.size() == 1 ? 0 : decoder;
  }
};

// Calls f(name, a.tensor, b.tensor, ...) for every tensor, in a fixed order,
// over any number of structurally identical StoryParams.
template <typename F, typename P0, typename... Ps>
void zip_params(F&& f, P0& p0, Ps&... ps) {
  f(std::string("image_proj"), p0.image_proj, ps.image_proj...);
  f(std::string("encoder.w"), p0.encoder.w, ps.encoder.w...);
  f(std::string("encoder.u"), p0.encoder.u, ps.encoder.u...);
  f(std::string("encoder.b"), p0.encoder.b, ps.encoder.b...);
  for (std::size_t k = 0; k < kNumImages; ++k) {
    const std::string d = "decoder" + std::to_string(k + 1);
    f(d + ".w", p0.decoders[k].w, ps.decoders[k].w...);
    f(d + ".u", p0.decoders[k].u, ps.decoders[k].u...);
    f(d + ".b", p0.decoders[k].b, ps.decoders[k].b...);
  }
  for (std::size_t e = 0; e < p0.embeddings.size(); ++e) {
    f("embedding" + std::to_string(e), p0.embeddings[e], ps.embeddings[e]...);
  }
  for (std::size_t k = 0; k < kNumImages; ++k) {
    const std::string h = "output" + std::to_string(k + 1);
    f(h + ".w", p0.out_w[k], ps.out_w[k]...);
    f(h + ".b", p0.out_b[k], ps.out_b[k]...);
  }
}

template <typename T>
std::size_t parameter_count(const StoryParams<T>& p) {
  std::size_t n = 0;
  zip_params([&](const std::string&, const auto& t) { n += static_cast<std::size_t>(t.size()); }, p);
  return n;
}

template <typename T>
struct StoryModel {
  ModelConfig config;
  StoryParams<T> params;

  static StoryModel zeros(const ModelConfig& cfg) {
    cfg.validate();
    return StoryModel{cfg, StoryParams<T>::zeros(cfg)};
  }

  // Weights uniform in [-s, s], s = 1/sqrt(hidden_dim); LSTM forget biases 1;
  // other biases 0.
  static StoryModel initialized(const ModelConfig& cfg, std::uint64_t seed) {
    StoryModel m = zeros(cfg);
    Rng rng(seed);
    const double s = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim));
    fill_uniform(m.params.image_proj, rng, s);
    m.params.encoder.init(rng);
    for (auto& d : m.params.decoders) d.init(rng);
    for (auto& e : m.params.embeddings) fill_uniform(e, rng, s);
    for (auto& w : m.params.out_w) fill_uniform(w, rng, s);
    return m;
  }

  // Copies a pretrained (e.g. skip-gram) table into every embedding slot.
  void set_embeddings(const Matrix<T>& table) {
    if (table.rows() != config.vocab_size || table.cols() != config.embed_dim) {
      throw DimensionError("set_embeddings: table shape does not match the model");
    }
    for (auto& e : params.embeddings) e = table;
  }

  void check_shapes() const {
    const auto want = StoryParams<T>::zeros(config);
    zip_params(
        [](const std::string& name, const auto& have, const auto& expect) {
          if (have.rows() != expect.rows() || have.cols() != expect.cols()) {
            throw DimensionError("StoryModel: tensor '" + name + "' has the wrong shape");
          }
        },
        params, want);
  }
};

template <typename T>
using ImageSequence = std::array<Vector<T>, kNumImages>;

// Final encoder state (h, c); seeds every decoder.
template <typename T>
using ContextVector = LstmState<T>;

// Decoded or reference story: one token-id segment per image. Generated
// segments keep a trailing <eos> when the decoder emitted one.
struct Story {
  std::array<std::vector<TokenId>, kNumImages> segments;

  friend bool operator==(const Story&, const Story&) = default;
};

inline std::vector<TokenId> strip_eos(const std::vector<TokenId>& seg) {
  std::vector<TokenId> out = seg;
  if (!out.empty() && out.back() == text::kEos) out.pop_back();
  return out;
}

inline std::string segment_text(const text::Vocab& vocab, const std::vector<TokenId>& seg) {
  std::string out;
  for (const auto& tok : vocab.tokens_of(seg)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

// The five segments joined in image order.
inline std::string story_text(const text::Vocab& vocab, const Story& story) {
  std::string out;
  for (const auto& seg : story.segments) {
    const std::string s = segment_text(vocab, seg);
    if (s.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += s;
  }
  return out;
}

}  // namespace vist::model
