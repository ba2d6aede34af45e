#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dispatch/errors.hpp"
#include "dispatch/rng.hpp"

namespace dispatch::rl {

template <std::floating_point T>
constexpr T leaky_relu(T z, T slope) noexcept {
  return z >= T(0) ? z : slope * z;
}

// Huber loss with unit threshold.
template <std::floating_point T>
constexpr T smooth_l1(T prediction, T target) noexcept {
  const T d = prediction - target;
  const T a = d < T(0) ? -d : d;
  return a < T(1) ? T(0.5) * d * d : a - T(0.5);
}

// d smooth_l1 / d prediction.
template <std::floating_point T>
constexpr T smooth_l1_grad(T prediction, T target) noexcept {
  const T d = prediction - target;
  if (d >= T(1)) return T(1);
  if (d <= T(-1)) return T(-1);
  return d;
}

// Fully connected network with leaky-rectifier hidden layers and a linear
// scalar output. All parameters live in one flat buffer, layer by layer,
// weights (row-major, out x in) before biases.
template <std::floating_point T>
class Mlp {
 public:
  // Activations kept by a forward pass for the backward pass.
  struct Tape {
    std::vector<std::vector<T>> pre;
    std::vector<std::vector<T>> post;
  };

  Mlp() = default;
  Mlp(std::vector<std::size_t> dims, T negative_slope) : dims_(std::move(dims)), slope_(negative_slope) {
    if (dims_.size() < 2) throw Error("network needs at least an input and an output layer");
    if (dims_.back() != 1) throw Error("network output must be scalar");
    for (auto d : dims_) {
      if (d == 0) throw Error("layer widths must be positive");
    }
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      weight_offset_.push_back(offset);
      offset += dims_[l] * dims_[l + 1];
      bias_offset_.push_back(offset);
      offset += dims_[l + 1];
    }
    params_.assign(offset, T(0));
  }

  // Glorot-uniform weights, zero biases.
  void init_uniform(Rng& rng) {
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const double limit = std::sqrt(6.0 / static_cast<double>(dims_[l] + dims_[l + 1]));
      std::uniform_real_distribution<double> u(-limit, limit);
      for (T& w : weights(l)) w = static_cast<T>(u(rng));
      for (T& b : biases(l)) b = T(0);
    }
  }

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t num_layers() const noexcept { return dims_.empty() ? 0 : dims_.size() - 1; }
  std::size_t input_size() const noexcept { return dims_.empty() ? 0 : dims_.front(); }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  T negative_slope() const noexcept { return slope_; }

  std::span<T> params() noexcept { return params_; }
  std::span<const T> params() const noexcept { return params_; }
  std::span<T> weights(std::size_t l) { return {params_.data() + weight_offset_.at(l), dims_[l] * dims_[l + 1]}; }
  std::span<const T> weights(std::size_t l) const {
    return {params_.data() + weight_offset_.at(l), dims_[l] * dims_[l + 1]};
  }
  std::span<T> biases(std::size_t l) { return {params_.data() + bias_offset_.at(l), dims_[l + 1]}; }
  std::span<const T> biases(std::size_t l) const { return {params_.data() + bias_offset_.at(l), dims_[l + 1]}; }

  T forward(std::span<const T> x, Tape& tape) const {
    if (x.size() != input_size()) throw Error("input width mismatch");
    const std::size_t layers = num_layers();
    tape.pre.resize(layers);
    tape.post.resize(layers);
    std::span<const T> in = x;
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t n_in = dims_[l];
      const std::size_t n_out = dims_[l + 1];
      auto& z = tape.pre[l];
      auto& a = tape.post[l];
      z.resize(n_out);
      a.resize(n_out);
      const T* w = params_.data() + weight_offset_[l];
      const T* b = params_.data() + bias_offset_[l];
      const bool hidden = l + 1 < layers;
      bool finite = true;
      for (std::size_t o = 0; o < n_out; ++o) {
        const T* row = w + o * n_in;
        T acc = b[o];
        for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * in[i];
        z[o] = acc;
        a[o] = hidden ? leaky_relu(acc, slope_) : acc;
        finite = finite && std::isfinite(acc);
      }
      if (!finite) throw NumericalError(l, "non-finite activation");
      in = a;
    }
    return tape.post.back()[0];
  }

  T forward(std::span<const T> x) const {
    thread_local Tape tape;
    return forward(x, tape);
  }

  // Accumulates upstream * d(output)/d(params) into `grad`, using the tape
  // of a forward pass on `x`.
  void backward(std::span<const T> x, const Tape& tape, T upstream, std::span<T> grad) const {
    if (grad.size() != params_.size()) throw Error("gradient buffer size mismatch");
    const std::size_t layers = num_layers();
    thread_local std::vector<T> delta;
    thread_local std::vector<T> next_delta;
    delta.assign(1, upstream);
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t n_in = dims_[l];
      const std::size_t n_out = dims_[l + 1];
      const T* in = l == 0 ? x.data() : tape.post[l - 1].data();
      T* gw = grad.data() + weight_offset_[l];
      T* gb = grad.data() + bias_offset_[l];
      for (std::size_t o = 0; o < n_out; ++o) {
        const T d = delta[o];
        gb[o] += d;
        T* row = gw + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) row[i] += d * in[i];
      }
      if (l == 0) break;
      const T* w = params_.data() + weight_offset_[l];
      next_delta.assign(n_in, T(0));
      for (std::size_t o = 0; o < n_out; ++o) {
        const T d = delta[o];
        const T* row = w + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) next_delta[i] += d * row[i];
      }
      const auto& z = tape.pre[l - 1];
      for (std::size_t i = 0; i < n_in; ++i) {
        if (z[i] < T(0)) next_delta[i] *= slope_;
      }
      std::swap(delta, next_delta);
    }
  }

  void copy_parameters_from(const Mlp& other) {
    if (other.dims_ != dims_) throw Error("cannot copy parameters between different shapes");
    std::copy(other.params_.begin(), other.params_.end(), params_.begin());
  }

  template <std::floating_point U>
  Mlp<U> cast() const {
    Mlp<U> out(dims_, static_cast<U>(slope_));
    auto dst = out.params();
    for (std::size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
    return out;
  }

  friend bool operator==(const Mlp& a, const Mlp& b) {
    return a.dims_ == b.dims_ && a.slope_ == b.slope_ && a.params_ == b.params_;
  }

 private:
  std::vector<std::size_t> dims_;
  T slope_ = T(0.01);
  std::vector<std::size_t> weight_offset_;
  std::vector<std::size_t> bias_offset_;
  std::vector<T> params_;
};

template <std::floating_point T>
struct AdamConfig {
  T learning_rate = T(1e-3);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T epsilon = T(1e-8);
};

// Adam with bias-corrected first and second moments.
template <std::floating_point T>
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, AdamConfig<T> cfg) : cfg_(cfg), m_(n, T(0)), v_(n, T(0)) {}

  void step(std::span<T> params, std::span<const T> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
      throw Error("adam: gradient shape does not match parameters");
    }
    ++t_;
    const T c1 = T(1) - static_cast<T>(std::pow(static_cast<double>(cfg_.beta1), static_cast<double>(t_)));
    const T c2 = T(1) - static_cast<T>(std::pow(static_cast<double>(cfg_.beta2), static_cast<double>(t_)));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const T g = grad[i];
      m_[i] = cfg_.beta1 * m_[i] + (T(1) - cfg_.beta1) * g;
      v_[i] = cfg_.beta2 * v_[i] + (T(1) - cfg_.beta2) * g * g;
      const T m_hat = m_[i] / c1;
      const T v_hat = v_[i] / c2;
      params[i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
    }
  }

  std::uint64_t steps() const noexcept { return t_; }
  const AdamConfig<T>& config() const noexcept { return cfg_; }

 private:
  AdamConfig<T> cfg_;
  std::vector<T> m_;
  std::vector<T> v_;
  std::uint64_t t_ = 0;
};

template <std::floating_point T>
struct RegressionSample {
  std::span<const T> input;
  T target;
};

// Mean smooth-L1 loss of `net` over the batch; writes the gradient of that
// mean into `grad` (overwritten, not accumulated).
template <std::floating_point T>
T batch_loss_and_gradient(const Mlp<T>& net, std::span<const RegressionSample<T>> batch, std::span<T> grad) {
  std::fill(grad.begin(), grad.end(), T(0));
  if (batch.empty()) return T(0);
  typename Mlp<T>::Tape tape;
  const T scale = T(1) / static_cast<T>(batch.size());
  T loss = T(0);
  for (const auto& s : batch) {
    const T q = net.forward(s.input, tape);
    loss += smooth_l1(q, s.target);
    net.backward(s.input, tape, scale * smooth_l1_grad(q, s.target), grad);
  }
  return loss * scale;
}

// Text checkpoint: header `DQNCKPT v1 <name>`, a line of layer widths, then
// per layer one line of row-major weights and one line of biases, each
// value printed with 9 significant digits (exact for 32-bit floats).
void save_checkpoint(std::ostream& out, const Mlp<float>& net, std::string_view agent_name);
void save_checkpoint(const std::string& path, const Mlp<float>& net, std::string_view agent_name);

struct Checkpoint {
  std::string agent_name;
  Mlp<float> net;
};

// Throws ParseError on malformed content.
Checkpoint load_checkpoint(std::istream& in, float negative_slope);
Checkpoint load_checkpoint(const std::string& path, float negative_slope);

}  // namespace dispatch::rl
