#include <cmath>
#include <numbers>

#include "prefdens/error.hpp"
#include "prefdens/kernels.hpp"
#include "prefdens/optim.hpp"

namespace prefdens {

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("adam: lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("adam: betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adam: eps must be positive");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config, std::size_t step_index, double lr) {
  const std::size_t n = params.size();
  if (grads.size() != n || state.m.size() != n || state.v.size() != n) throw Error("adam: shape mismatch");
  if (step_index < 1) throw Error("adam: step index starts at 1");
  const double t = static_cast<double>(step_index);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  kernels::adam_update(params.data(), state.m.data(), state.v.data(), grads.data(), n, lr, config.beta1,
                       config.beta2, bc1, bc2, config.eps);
}

double lr_at(const CosineSchedule& schedule, std::size_t step) {
  if (step >= schedule.total_steps) return 0.0;
  const double frac = static_cast<double>(step) / static_cast<double>(schedule.total_steps);
  return schedule.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

}  // namespace prefdens
