#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "vist/model/story_model.hpp"

namespace vist::training {

using model::StoryParams;

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;
  int batch_size = 16;
  int epochs = 10;
  std::uint64_t seed = 1;
  std::string precision = "double";  // "double" or "float"

  void validate() const {
    if (!(lr > 0.0)) throw InvalidArgument("TrainConfig: lr must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw InvalidArgument("TrainConfig: beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw InvalidArgument("TrainConfig: beta2 must be in [0, 1)");
    if (!(eps > 0.0)) throw InvalidArgument("TrainConfig: eps must be > 0");
    if (!(clip_norm > 0.0)) throw InvalidArgument("TrainConfig: clip_norm must be > 0");
    if (batch_size < 1) throw InvalidArgument("TrainConfig: batch_size must be >= 1");
    if (epochs < 0) throw InvalidArgument("TrainConfig: epochs must be >= 0");
    if (precision != "double" && precision != "float") {
      throw InvalidArgument("TrainConfig: precision must be \"double\" or \"float\"");
    }
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

template <typename T>
struct OptimState {
  StoryParams<T> m;
  StoryParams<T> v;
  std::uint64_t t = 0;

  static OptimState zeros(const model::ModelConfig& cfg) {
    return OptimState{StoryParams<T>::zeros(cfg), StoryParams<T>::zeros(cfg), 0};
  }
};

template <typename T>
double global_norm(const StoryParams<T>& g) {
  double sq = 0.0;
  zip_params([&](const std::string&, const auto& t) { sq += t.template cast<double>().squaredNorm(); }, g);
  return std::sqrt(sq);
}

// Scales `grads` in place so its global L2 norm is at most clip_norm.
// Returns the scale applied (1 when already inside the ball).
template <typename T>
double clip_gradients(StoryParams<T>& grads, double clip_norm) {
  const double norm = global_norm(grads);
  if (!(norm > clip_norm)) return 1.0;
  const double scale = clip_norm / norm;
  zip_params([&](const std::string&, auto& t) { t *= static_cast<T>(scale); }, grads);
  return scale;
}

struct AdamReport {
  bool applied = false;
  double grad_norm = 0.0;  // before clipping
  double clip_scale = 1.0;
};

// Bias-corrected Adam after global-norm clipping. A non-finite gradient
// rejects the step and leaves params and state untouched.
template <typename T>
AdamReport adam_update(StoryParams<T>& params, StoryParams<T>& grads, OptimState<T>& state,
                       const TrainConfig& cfg) {
  AdamReport report;
  report.grad_norm = global_norm(grads);
  if (!std::isfinite(report.grad_norm)) return report;
  report.clip_scale = clip_gradients(grads, cfg.clip_norm);

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(cfg.beta1, t));
  const T c2 = static_cast<T>(1.0 - std::pow(cfg.beta2, t));
  const T lr = static_cast<T>(cfg.lr);
  const T eps = static_cast<T>(cfg.eps);
  zip_params(
      [&](const std::string&, auto& p, auto& g, auto& m, auto& v) {
        m = b1 * m + (T(1) - b1) * g;
        v = b2 * v + (T(1) - b2) * g.cwiseProduct(g);
        p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
      },
      params, grads, state.m, state.v);
  report.applied = true;
  return report;
}

}  // namespace vist::training
