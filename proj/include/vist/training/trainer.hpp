#pragma once

#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "vist/model/objective.hpp"
#include "vist/training/adam.hpp"

namespace vist::training {

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;  // per predicted token, measured before each batch's update
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
};

template <typename T>
struct TrainResult {
  model::StoryModel<T> model;
  OptimState<T> optim;
  std::vector<EpochStats> epochs;
};

// Mini-batch training with a seeded per-epoch shuffle. Deterministic for a
// fixed seed and precision. `on_epoch` may be used for logging.
template <typename T>
TrainResult<T> train(model::StoryModel<T> m, std::span<const model::Example<T>> dataset,
                     const TrainConfig& cfg, std::optional<OptimState<T>> resume = std::nullopt,
                     const std::function<void(const EpochStats&)>& on_epoch = {}) {
  cfg.validate();
  if (dataset.empty()) throw InvalidArgument("train: empty dataset");
  m.check_shapes();

  auto optim = resume ? std::move(*resume) : OptimState<T>::zeros(m.config);
  TrainResult<T> out{std::move(m), std::move(optim), {}};
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order, rng);
    EpochStats stats;
    stats.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t tokens = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::vector<const model::Example<T>*> items;
      for (std::size_t i = start; i < std::min(order.size(), start + batch); ++i) {
        items.push_back(&dataset[order[i]]);
      }
      auto res = model::batch_loss<T>(out.model, items);
      loss_sum += res.loss * static_cast<double>(res.tokens);
      tokens += res.tokens;
      const auto report = adam_update(out.model.params, res.grads, out.optim, cfg);
      ++stats.steps;
      if (!report.applied) ++stats.rejected_steps;
    }
    stats.mean_loss = loss_sum / static_cast<double>(tokens);
    if (on_epoch) on_epoch(stats);
    out.epochs.push_back(stats);
  }
  return out;
}

}  // namespace vist::training
