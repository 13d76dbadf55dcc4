#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <vector>

#include "vist/model/story_model.hpp"
#include "vist/numerics/loss.hpp"

namespace vist::model {

struct DecodeConfig {
  int max_len = 30;    // content tokens per segment, <eos> excluded
  int beam_width = 1;  // 1 is greedy
};

namespace detail {

template <typename T>
void check_image(const ModelConfig& cfg, const Vector<T>& img) {
  require_dim(img.size(), cfg.image_dim, "image embedding");
  require_finite(img, "image embedding");
}

template <typename T>
Vector<T> project(const StoryModel<T>& m, const Vector<T>& img) {
  check_image(m.config, img);
  return m.params.image_proj * img;
}

template <typename T>
LstmState<T> decoder_initial_state(const ModelConfig& cfg, const ContextVector<T>& ctx) {
  require_dim(ctx.h.size(), cfg.hidden_dim, "context h");
  require_dim(ctx.c.size(), cfg.hidden_dim, "context c");
  if (cfg.decoder_init == DecoderInit::kHiddenOnly) {
    return LstmState<T>(ctx.h, Vector<T>::Zero(cfg.hidden_dim));
  }
  return ctx;
}

// Output-layer scores with the tokens a decoder may never emit masked out.
template <typename T>
Vector<T> masked_logits(const StoryModel<T>& m, std::size_t decoder, const Vector<T>& h) {
  Vector<T> logits = m.params.out_b[decoder];
  logits.noalias() += m.params.out_w[decoder] * h;
  require_finite(logits, "decoder logits");
  logits(text::kPad) = -std::numeric_limits<T>::infinity();
  logits(text::kBos) = -std::numeric_limits<T>::infinity();
  return logits;
}

// Lowest id wins ties.
template <typename T>
TokenId argmax(const Vector<T>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return static_cast<TokenId>(best);
}

template <typename T>
Vector<T> word_input(const StoryModel<T>& m, std::size_t decoder, TokenId tok) {
  return m.params.embeddings[m.params.embedding_index(decoder)].row(tok).transpose();
}

inline std::size_t checked_decoder(int position) {
  if (position < 1 || position > static_cast<int>(kNumImages)) {
    throw InvalidArgument("decoder position must be in 1..5, got " + std::to_string(position));
  }
  return static_cast<std::size_t>(position - 1);
}

template <typename T>
std::vector<TokenId> greedy(const StoryModel<T>& m, std::size_t k, LstmState<T> state,
                            const Vector<T>& x0, int max_len) {
  std::vector<TokenId> out;
  if (max_len <= 0) return out;
  const auto& dec = m.params.decoders[k];
  state = lstm_step(dec, x0, state);
  int content = 0;
  for (;;) {
    const TokenId tok = argmax(masked_logits(m, k, state.h));
    out.push_back(tok);
    if (tok == text::kEos || ++content == max_len) break;
    state = lstm_step(dec, word_input(m, k, tok), state);
  }
  return out;
}

template <typename T>
struct Hypothesis {
  std::vector<TokenId> tokens;
  LstmState<T> state;  // after consuming the last input
  double logp = 0.0;
};

// Expands every live hypothesis over the vocabulary and keeps the best
// `width` by cumulative log-probability. Finished hypotheses (<eos> or
// max_len content tokens) are ranked by log-probability per token.
template <typename T>
std::vector<TokenId> beam(const StoryModel<T>& m, std::size_t k, LstmState<T> state,
                          const Vector<T>& x0, int max_len, int width) {
  if (max_len <= 0) return {};
  const auto& dec = m.params.decoders[k];
  const auto w = static_cast<std::size_t>(width);

  std::vector<Hypothesis<T>> live(1);
  live[0].state = lstm_step(dec, x0, state);
  std::vector<Hypothesis<T>> done;

  struct Candidate {
    double logp;
    std::size_t parent;
    TokenId token;
  };
  while (!live.empty() && done.size() < w) {
    std::vector<Candidate> cands;
    for (std::size_t p = 0; p < live.size(); ++p) {
      const Vector<T> lp = log_softmax(masked_logits(m, k, live[p].state.h));
      for (Eigen::Index v = 0; v < lp.size(); ++v) {
        if (v == text::kPad || v == text::kBos) continue;
        cands.push_back({live[p].logp + static_cast<double>(lp(v)), p, static_cast<TokenId>(v)});
      }
    }
    const std::size_t keep = std::min(w, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.logp != b.logp) return a.logp > b.logp;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    std::vector<Hypothesis<T>> next;
    for (std::size_t c = 0; c < keep; ++c) {
      const auto& cand = cands[c];
      Hypothesis<T> h;
      h.tokens = live[cand.parent].tokens;
      h.tokens.push_back(cand.token);
      h.logp = cand.logp;
      if (cand.token == text::kEos || static_cast<int>(h.tokens.size()) == max_len) {
        done.push_back(std::move(h));
      } else {
        h.state = lstm_step(dec, word_input(m, k, cand.token), live[cand.parent].state);
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }

  const Hypothesis<T>* best = nullptr;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& h : done) {
    const double score = h.logp / static_cast<double>(h.tokens.size());
    if (!best || score > best_score) {
      best = &h;
      best_score = score;
    }
  }
  return best ? best->tokens : std::vector<TokenId>{};
}

}  // namespace detail

// Runs the encoder over the projected images, in order, from a zero state.
template <typename T>
ContextVector<T> encode_sequence(const StoryModel<T>& m, const ImageSequence<T>& seq) {
  LstmState<T> state(m.config.hidden_dim);
  for (const auto& img : seq) {
    state = lstm_step(m.params.encoder, detail::project(m, img), state);
  }
  return state;
}

// Decoder `position` (1-based) starts from the context, reads the projected
// image first and then its own previous outputs.
template <typename T>
std::vector<TokenId> decode_segment(const StoryModel<T>& m, int position, const ContextVector<T>& ctx,
                                    const std::type_identity_t<Vector<T>>& img, const DecodeConfig& cfg) {
  const std::size_t k = detail::checked_decoder(position);
  if (cfg.max_len < 0) throw InvalidArgument("decode: max_len must be >= 0");
  if (cfg.beam_width < 1) throw InvalidArgument("decode: beam_width must be >= 1");
  const Vector<T> x0 = detail::project(m, img);
  auto init = detail::decoder_initial_state(m.config, ctx);
  if (cfg.beam_width == 1) return detail::greedy(m, k, std::move(init), x0, cfg.max_len);
  return detail::beam(m, k, std::move(init), x0, cfg.max_len, cfg.beam_width);
}

template <typename T>
Story generate_story(const StoryModel<T>& m, const ImageSequence<T>& seq, const DecodeConfig& cfg) {
  const auto ctx = encode_sequence(m, seq);
  Story story;
  for (std::size_t k = 0; k < kNumImages; ++k) {
    story.segments[k] = decode_segment(m, static_cast<int>(k + 1), ctx, seq[k], cfg);
  }
  return story;
}

}  // namespace vist::model
