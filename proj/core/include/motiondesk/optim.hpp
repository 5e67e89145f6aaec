#pragma once

#include <cstdint>
#include <span>

#include "motiondesk/parameter.hpp"

namespace md {

/// Step decay: rate(i) = base_rate * decay_factor^floor(i / decay_interval).
struct LrSchedule {
  double base_rate = 1e-4;
  double decay_factor = 0.1;
  std::uint64_t decay_interval = 1800;

  double rate(std::uint64_t iteration) const;
  void validate() const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update at schedule.rate(iteration) for every
// parameter, then clears their gradients. Throws if any gradient is missing.
void adam_step(std::span<Parameter* const> params, const LrSchedule& schedule, std::uint64_t iteration,
               const AdamConfig& config = {});

void zero_grads(std::span<Parameter* const> params);

}  // namespace md
