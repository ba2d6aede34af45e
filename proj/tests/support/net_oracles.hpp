#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dispatch/network.hpp"

namespace dispatch::testing {

// Plain matrix-vector forward pass written against the public weight and
// bias views, independent of Mlp::forward.
inline double reference_forward(const rl::Mlp<double>& net, std::span<const double> x) {
  std::vector<double> a(x.begin(), x.end());
  const auto& dims = net.dims();
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto w = net.weights(l);
    const auto b = net.biases(l);
    std::vector<double> z(dims[l + 1]);
    for (std::size_t o = 0; o < dims[l + 1]; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < dims[l]; ++i) acc += w[o * dims[l] + i] * a[i];
      const bool hidden = l + 2 < dims.size();
      z[o] = hidden && acc < 0 ? net.negative_slope() * acc : acc;
    }
    a = std::move(z);
  }
  return a[0];
}

struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t worst_parameter = 0;
};

inline double batch_loss(const rl::Mlp<double>& net, std::span<const rl::RegressionSample<double>> batch) {
  double loss = 0.0;
  for (const auto& s : batch) loss += rl::smooth_l1(reference_forward(net, s.input), s.target);
  return loss / static_cast<double>(batch.size());
}

// Central differences of the mean smooth-L1 batch loss against the analytic
// gradient. The relative error uses max(|analytic|, |numeric|, floor) as the
// denominator so that parameters with vanishing gradients are judged
// absolutely against `floor`.
inline GradientCheck check_gradient(rl::Mlp<double> net, std::span<const rl::RegressionSample<double>> batch,
                                    double h = 1e-4, double floor = 1e-3) {
  std::vector<double> analytic(net.parameter_count());
  rl::batch_loss_and_gradient<double>(net, batch, analytic);
  GradientCheck out;
  auto params = net.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = batch_loss(net, batch);
    params[i] = saved - h;
    const double down = batch_loss(net, batch);
    params[i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > out.max_relative_error) {
      out.max_relative_error = rel;
      out.worst_parameter = i;
    }
  }
  return out;
}

}  // namespace dispatch::testing
