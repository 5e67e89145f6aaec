#include "motiondesk/optim.hpp"

#include <cmath>

#include "motiondesk/error.hpp"

namespace md {

Parameter::Parameter(std::string name_, Tensor initial)
    : name(std::move(name_)),
      value(std::move(initial)),
      adam_m(value.shape(), 0.0),
      adam_v(value.shape(), 0.0) {}

Tensor glorot_uniform(const Shape& shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(shape);
  for (double& v : t.data()) v = rng.uniform(-limit, limit);
  return t;
}

double LrSchedule::rate(std::uint64_t iteration) const {
  const auto decays = static_cast<double>(iteration / decay_interval);
  return base_rate * std::pow(decay_factor, decays);
}

void LrSchedule::validate() const {
  if (!(base_rate > 0.0)) throw ConfigError("learning rate: base_rate must be positive");
  if (!(decay_factor > 0.0 && decay_factor < 1.0)) {
    throw ConfigError("learning rate: decay_factor must lie in (0, 1)");
  }
  if (decay_interval == 0) throw ConfigError("learning rate: decay_interval must be positive");
}

void adam_step(std::span<Parameter* const> params, const LrSchedule& schedule, std::uint64_t iteration,
               const AdamConfig& config) {
  for (const Parameter* p : params) {
    if (!p->value.has_grad()) throw Error("adam_step: parameter '" + p->name + "' has no gradient");
  }
  const double rate = schedule.rate(iteration);
  for (Parameter* p : params) {
    p->step_count += 1;
    const double t = static_cast<double>(p->step_count);
    const double correction1 = 1.0 - std::pow(config.beta1, t);
    const double correction2 = 1.0 - std::pow(config.beta2, t);
    auto value = p->value.data();
    auto grad = p->value.grad();
    auto m = p->adam_m.data();
    auto v = p->adam_v.data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
    p->value.clear_grad();
  }
}

void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace md
