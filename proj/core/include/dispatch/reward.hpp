#pragma once

#include "dispatch/geometry.hpp"

namespace dispatch {

// Reward for an accepted assignment: estimated ride duration plus a fixed bonus.
double plain_reward(Minutes estimated_drive, double bonus) noexcept;

// Reward spread evenly over the service time `tau` and discounted per minute:
// R (gamma^tau - 1) / (tau (gamma - 1)). `tau` below one minute counts as one.
double discounted_reward(double reward, double gamma, Minutes tau) noexcept;

// Continuous-time discount rate with exp(-beta) = gamma.
double discount_rate(double gamma) noexcept;

// exp(-beta * tau).
double discount_factor(double beta, Minutes tau) noexcept;

}  // namespace dispatch
