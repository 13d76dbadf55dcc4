#pragma once

#include <cmath>
#include <type_traits>

#include "vist/numerics/random.hpp"
#include "vist/numerics/tensor.hpp"

namespace vist {

// Gate blocks are stacked row-wise in the order input, forget, output,
// candidate; each block has hidden_dim rows.
enum class Gate : int { kInput = 0, kForget = 1, kOutput = 2, kCandidate = 3 };

template <typename T>
struct LstmParams {
  Matrix<T> w;  // 4H x input_dim
  Matrix<T> u;  // 4H x H
  Vector<T> b;  // 4H

  LstmParams() = default;
  LstmParams(Eigen::Index input_dim, Eigen::Index hidden_dim)
      : w(Matrix<T>::Zero(4 * hidden_dim, input_dim)),
        u(Matrix<T>::Zero(4 * hidden_dim, hidden_dim)),
        b(Vector<T>::Zero(4 * hidden_dim)) {}

  Eigen::Index input_dim() const { return w.cols(); }
  Eigen::Index hidden_dim() const { return u.cols(); }

  void set_zero() {
    w.setZero();
    u.setZero();
    b.setZero();
  }

  // Uniform in [-s, s] with s = 1/sqrt(hidden_dim); forget bias starts at 1.
  void init(Rng& rng) {
    const double s = 1.0 / std::sqrt(static_cast<double>(hidden_dim()));
    fill_uniform(w, rng, s);
    fill_uniform(u, rng, s);
    b.setZero();
    gate(b, Gate::kForget).setConstant(T(1));
  }

  template <typename V>
  static auto gate(V& stacked, Gate g) {
    const Eigen::Index h = stacked.rows() / 4;
    return stacked.middleRows(static_cast<int>(g) * h, h);
  }

  void check_shapes() const {
    const Eigen::Index h = hidden_dim();
    if (w.rows() != 4 * h || u.rows() != 4 * h || b.size() != 4 * h) {
      throw DimensionError("LstmParams: gate blocks inconsistent with hidden_dim");
    }
  }

  template <typename F>
  void for_each(F&& f) {
    f("w", w);
    f("u", u);
    f("b", b);
  }
};

template <typename T>
struct LstmState {
  Vector<T> h;
  Vector<T> c;

  LstmState() = default;
  explicit LstmState(Eigen::Index hidden_dim)
      : h(Vector<T>::Zero(hidden_dim)), c(Vector<T>::Zero(hidden_dim)) {}
  LstmState(Vector<T> h_, Vector<T> c_) : h(std::move(h_)), c(std::move(c_)) {}
};

// Everything the backward pass needs from one forward step.
template <typename T>
struct StepCache {
  Vector<T> x;
  Vector<T> h_prev;
  Vector<T> c_prev;
  Vector<T> gates;  // activated i, f, o, g stacked like LstmParams::b
  Vector<T> c;
  Vector<T> tanh_c;

  bool empty() const { return gates.size() == 0; }
};

template <typename T>
struct LstmStep {
  LstmState<T> state;
  StepCache<T> cache;
};

namespace detail {

template <typename T>
Vector<T> lstm_preactivation(const LstmParams<T>& p, const Vector<T>& x, const LstmState<T>& s) {
  p.check_shapes();
  require_dim(x.size(), p.input_dim(), "lstm input x");
  require_dim(s.h.size(), p.hidden_dim(), "lstm state h");
  require_dim(s.c.size(), p.hidden_dim(), "lstm state c");
  require_finite(x, "lstm input x");
  Vector<T> z = p.b;
  z.noalias() += p.w * x;
  z.noalias() += p.u * s.h;
  return z;
}

template <typename T>
void activate_gates(Vector<T>& z) {
  const Eigen::Index h = z.size() / 4;
  for (Eigen::Index k = 0; k < 3 * h; ++k) z(k) = sigmoid(z(k));
  for (Eigen::Index k = 3 * h; k < 4 * h; ++k) z(k) = std::tanh(z(k));
}

}  // namespace detail

// One LSTM step that keeps its activations for lstm_backward.
template <typename T>
LstmStep<T> lstm_forward(const LstmParams<T>& p, const std::type_identity_t<Vector<T>>& x,
                         const LstmState<T>& s) {
  LstmStep<T> out;
  auto& cache = out.cache;
  cache.gates = detail::lstm_preactivation(p, x, s);
  detail::activate_gates(cache.gates);
  const Eigen::Index h = p.hidden_dim();
  const auto i = cache.gates.segment(0, h);
  const auto f = cache.gates.segment(h, h);
  const auto o = cache.gates.segment(2 * h, h);
  const auto g = cache.gates.segment(3 * h, h);

  cache.c = f.cwiseProduct(s.c) + i.cwiseProduct(g);
  cache.tanh_c = cache.c.array().tanh().matrix();
  out.state.c = cache.c;
  out.state.h = o.cwiseProduct(cache.tanh_c);
  require_finite(out.state.h, "lstm hidden state");
  require_finite(out.state.c, "lstm cell state");
  cache.x = x;
  cache.h_prev = s.h;
  cache.c_prev = s.c;
  return out;
}

// Inference-only step; no cache is retained.
template <typename T>
LstmState<T> lstm_step(const LstmParams<T>& p, const std::type_identity_t<Vector<T>>& x,
                       const LstmState<T>& s) {
  Vector<T> z = detail::lstm_preactivation(p, x, s);
  detail::activate_gates(z);
  const Eigen::Index h = p.hidden_dim();
  LstmState<T> next;
  next.c = z.segment(h, h).cwiseProduct(s.c) + z.segment(0, h).cwiseProduct(z.segment(3 * h, h));
  next.h = z.segment(2 * h, h).cwiseProduct(next.c.array().tanh().matrix());
  require_finite(next.h, "lstm hidden state");
  require_finite(next.c, "lstm cell state");
  return next;
}

template <typename T>
struct LstmBackward {
  Vector<T> dx;
  Vector<T> dh_prev;
  Vector<T> dc_prev;
};

// Backpropagates upstream gradients (dh, dc) w.r.t. the step's outputs.
// Parameter gradients are accumulated into `grads` so the caller can sum
// over time steps.
template <typename T>
LstmBackward<T> lstm_backward(const LstmParams<T>& p, const StepCache<T>& cache,
                              const std::type_identity_t<Vector<T>>& dh,
                              const std::type_identity_t<Vector<T>>& dc, LstmParams<T>& grads) {
  if (cache.empty()) {
    throw InvalidArgument("lstm_backward: missing step cache (forward not run in training mode)");
  }
  const Eigen::Index h = p.hidden_dim();
  require_dim(cache.gates.size(), 4 * h, "lstm cache gates");
  require_dim(dh.size(), h, "lstm upstream dh");
  require_dim(dc.size(), h, "lstm upstream dc");
  require_dim(grads.w.rows(), p.w.rows(), "lstm grad rows");
  require_dim(grads.w.cols(), p.w.cols(), "lstm grad cols");

  const auto i = cache.gates.segment(0, h).array();
  const auto f = cache.gates.segment(h, h).array();
  const auto o = cache.gates.segment(2 * h, h).array();
  const auto g = cache.gates.segment(3 * h, h).array();
  const auto tc = cache.tanh_c.array();

  const auto dct = (dc.array() + dh.array() * o * (T(1) - tc.square())).eval();

  Vector<T> dz(4 * h);
  dz.segment(0, h) = (dct * g * i * (T(1) - i)).matrix();
  dz.segment(h, h) = (dct * cache.c_prev.array() * f * (T(1) - f)).matrix();
  dz.segment(2 * h, h) = (dh.array() * tc * o * (T(1) - o)).matrix();
  dz.segment(3 * h, h) = (dct * i * (T(1) - g.square())).matrix();

  grads.w.noalias() += dz * cache.x.transpose();
  grads.u.noalias() += dz * cache.h_prev.transpose();
  grads.b += dz;

  LstmBackward<T> out;
  out.dx.noalias() = p.w.transpose() * dz;
  out.dh_prev.noalias() = p.u.transpose() * dz;
  out.dc_prev = (dct * f).matrix();
  return out;
}

}  // namespace vist
