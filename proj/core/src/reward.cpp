#include "dispatch/reward.hpp"

#include <algorithm>
#include <cmath>

namespace dispatch {

double plain_reward(Minutes estimated_drive, double bonus) noexcept {
  return estimated_drive + bonus;
}

double discounted_reward(double reward, double gamma, Minutes tau) noexcept {
  tau = std::max(tau, 1.0);
  // expm1 keeps gamma^tau - 1 accurate when gamma is close to one.
  return reward * std::expm1(tau * std::log(gamma)) / (tau * (gamma - 1.0));
}

double discount_rate(double gamma) noexcept { return -std::log(gamma); }

double discount_factor(double beta, Minutes tau) noexcept { return std::exp(-beta * tau); }

}  // namespace dispatch
