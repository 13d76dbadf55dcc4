#pragma once

#include <span>
#include <type_traits>
#include <vector>

#include "vist/model/inference.hpp"
#include "vist/numerics/loss.hpp"

namespace vist::model {

// One teacher-forced training example. Reference segments hold content
// tokens only; a trailing <eos> is tolerated and ignored.
template <typename T>
struct Example {
  ImageSequence<T> images;
  Story reference;
};

template <typename T>
struct LossResult {
  double loss = 0.0;        // mean cross-entropy per predicted token
  std::size_t tokens = 0;   // predictions, <eos> included
  StoryParams<T> grads;
};

namespace detail {

// Loss sums are kept in double unless the scalar type is wider.
template <typename T>
using LossAccum = std::conditional_t<(sizeof(T) > sizeof(double)), T, double>;

inline std::size_t prediction_count(const Story& ref) {
  std::size_t n = 0;
  for (const auto& seg : ref.segments) n += strip_eos(seg).size() + 1;
  return n;
}

template <typename T>
void check_reference(const ModelConfig& cfg, const Story& ref) {
  bool any = false;
  for (const auto& seg : ref.segments) {
    for (const auto tok : strip_eos(seg)) {
      any = true;
      if (tok >= static_cast<TokenId>(cfg.vocab_size) || tok == text::kPad) {
        throw InvalidArgument("reference token id " + std::to_string(tok) + " is not valid");
      }
    }
  }
  if (!any) throw InvalidArgument("forward_loss: empty reference story");
}

// Adds scale * d(sum of token losses)/d(params) into `g`; returns the
// unscaled loss sum.
template <typename T>
LossAccum<T> accumulate_example(const StoryModel<T>& m, const Example<T>& ex, T scale,
                          StoryParams<T>& g) {
  const auto& cfg = m.config;
  const auto& p = m.params;
  const Eigen::Index hd = cfg.hidden_dim;

  std::array<Vector<T>, kNumImages> xs;
  for (std::size_t t = 0; t < kNumImages; ++t) xs[t] = project(m, ex.images[t]);

  std::array<StepCache<T>, kNumImages> enc_cache;
  LstmState<T> state(hd);
  for (std::size_t t = 0; t < kNumImages; ++t) {
    auto step = lstm_forward(p.encoder, xs[t], state);
    state = std::move(step.state);
    enc_cache[t] = std::move(step.cache);
  }
  const ContextVector<T> ctx = state;

  LossAccum<T> loss = 0;
  std::array<Vector<T>, kNumImages> dxs;
  for (auto& d : dxs) d = Vector<T>::Zero(cfg.embed_dim);
  Vector<T> dctx_h = Vector<T>::Zero(hd);
  Vector<T> dctx_c = Vector<T>::Zero(hd);

  for (std::size_t k = 0; k < kNumImages; ++k) {
    const auto& dec = p.decoders[k];
    const std::size_t e = p.embedding_index(k);
    const auto ref = strip_eos(ex.reference.segments[k]);
    const std::size_t steps = ref.size() + 1;

    std::vector<StepCache<T>> caches(steps);
    std::vector<Vector<T>> dh_out(steps);
    LstmState<T> s = decoder_initial_state(cfg, ctx);
    for (std::size_t j = 0; j < steps; ++j) {
      const Vector<T> x = j == 0 ? xs[k] : word_input(m, k, ref[j - 1]);
      auto step = lstm_forward(dec, x, s);
      s = std::move(step.state);
      caches[j] = std::move(step.cache);

      Vector<T> logits = p.out_b[k];
      logits.noalias() += p.out_w[k] * s.h;
      const TokenId target = j < ref.size() ? ref[j] : text::kEos;
      auto ce = softmax_cross_entropy(logits, target);
      loss += static_cast<LossAccum<T>>(ce.loss);
      ce.dlogits *= scale;
      g.out_w[k].noalias() += ce.dlogits * s.h.transpose();
      g.out_b[k] += ce.dlogits;
      dh_out[j].noalias() = p.out_w[k].transpose() * ce.dlogits;
    }

    Vector<T> dh = Vector<T>::Zero(hd);
    Vector<T> dc = Vector<T>::Zero(hd);
    for (std::size_t j = steps; j-- > 0;) {
      const Vector<T> dh_total = dh_out[j] + dh;
      auto bw = lstm_backward(dec, caches[j], dh_total, dc, g.decoders[k]);
      if (j == 0) {
        dxs[k] += bw.dx;
      } else if (!cfg.freeze_embeddings) {
        g.embeddings[e].row(ref[j - 1]) += bw.dx.transpose();
      }
      dh = std::move(bw.dh_prev);
      dc = std::move(bw.dc_prev);
    }
    dctx_h += dh;
    if (cfg.decoder_init == DecoderInit::kHiddenAndCell) dctx_c += dc;
  }

  Vector<T> dh = dctx_h;
  Vector<T> dc = dctx_c;
  for (std::size_t t = kNumImages; t-- > 0;) {
    auto bw = lstm_backward(p.encoder, enc_cache[t], dh, dc, g.encoder);
    dxs[t] += bw.dx;
    dh = std::move(bw.dh_prev);
    dc = std::move(bw.dc_prev);
  }
  for (std::size_t t = 0; t < kNumImages; ++t) {
    g.image_proj.noalias() += dxs[t] * ex.images[t].transpose();
  }
  return loss;
}

}  // namespace detail

// Teacher-forced loss over a batch: summed per-token cross-entropy of all
// five decoders, divided by the total number of predicted tokens in the
// batch, together with its exact gradient.
template <typename T>
LossResult<T> batch_loss(const StoryModel<T>& m, std::span<const Example<T>* const> batch) {
  if (batch.empty()) throw InvalidArgument("batch_loss: empty batch");
  LossResult<T> out;
  out.grads = StoryParams<T>::zeros(m.config);
  for (const auto* ex : batch) {
    detail::check_reference<T>(m.config, ex->reference);
    out.tokens += detail::prediction_count(ex->reference);
  }
  const T scale = T(1) / static_cast<T>(out.tokens);
  double sum = 0.0;
  for (const auto* ex : batch) sum += static_cast<double>(detail::accumulate_example(m, *ex, scale, out.grads));
  out.loss = sum / static_cast<double>(out.tokens);
  return out;
}

template <typename T>
LossResult<T> forward_loss(const StoryModel<T>& m, const ImageSequence<T>& seq, const Story& reference) {
  const Example<T> ex{seq, reference};
  const Example<T>* one[] = {&ex};
  return batch_loss<T>(m, one);
}

// Loss only; same value as forward_loss().loss.
template <typename T>
double evaluate_loss(const StoryModel<T>& m, std::span<const Example<T> > examples) {
  std::vector<const Example<T>*> ptrs;
  for (const auto& ex : examples) ptrs.push_back(&ex);
  return batch_loss<T>(m, ptrs).loss;
}

}  // namespace vist::model
