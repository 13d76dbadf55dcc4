#pragma once

#include <cmath>
#include <cstddef>

#include "vist/numerics/tensor.hpp"

namespace vist {

template <typename T>
struct CrossEntropy {
  T loss;
  Vector<T> dlogits;
};

// loss = -log softmax(logits)[target]; dlogits = softmax(logits) - onehot(target).
template <typename T>
CrossEntropy<T> softmax_cross_entropy(const Vector<T>& logits, std::size_t target) {
  if (logits.size() == 0) throw InvalidArgument("softmax_cross_entropy: empty logits");
  if (target >= static_cast<std::size_t>(logits.size())) {
    throw InvalidArgument("softmax_cross_entropy: target " + std::to_string(target) +
                          " out of range for " + std::to_string(logits.size()) + " classes");
  }
  require_finite(logits, "logits");
  const T mx = logits.maxCoeff();
  Vector<T> p = (logits.array() - mx).exp().matrix();
  const T sum = p.sum();
  p /= sum;
  CrossEntropy<T> out;
  out.loss = -(logits(static_cast<Eigen::Index>(target)) - mx - std::log(sum));
  p(static_cast<Eigen::Index>(target)) -= T(1);
  out.dlogits = std::move(p);
  return out;
}

// log softmax, used by beam search.
template <typename T>
Vector<T> log_softmax(const Vector<T>& logits) {
  const T mx = logits.maxCoeff();
  const T lse = mx + std::log((logits.array() - mx).exp().sum());
  return (logits.array() - lse).matrix();
}

}  // namespace vist
