#pragma once

#include <cstdint>
#include <string>

#include "motiondesk/rng.hpp"
#include "motiondesk/tensor.hpp"

namespace md {

/// A learnable tensor plus its Adam moment estimates. The gradient lives in
/// value's grad slot. Graphs keep raw pointers to Parameters, so a Parameter
/// must not move while a graph referencing it is alive.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor initial);

  std::string name;
  Tensor value;
  Tensor adam_m;
  Tensor adam_v;
  std::uint64_t step_count = 0;

  void zero_grad() { value.zero_grad(); }
};

// Uniform in [-s, s], s = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(const Shape& shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace md
