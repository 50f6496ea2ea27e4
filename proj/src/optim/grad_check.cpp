#include <algorithm>
#include <cmath>

#include "prefdens/error.hpp"
#include "prefdens/optim.hpp"

namespace prefdens {

double grad_check(const LossFn& fn, std::vector<double> params, std::size_t probe_count, std::uint64_t seed) {
  if (probe_count < 1) throw ConfigError("grad_check needs at least one probe");
  constexpr double h = 1e-5;
  const std::vector<double> analytic = fn(params).grad;
  if (analytic.size() != params.size()) throw Error("grad_check: gradient size mismatch");
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t probe = 0; probe < probe_count; ++probe) {
    const std::size_t i = rng.below(params.size());
    const double keep = params[i];
    params[i] = keep + h;
    const double up = fn(params).loss;
    params[i] = keep - h;
    const double down = fn(params).loss;
    params[i] = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

double grad_check(const LossSpec& spec, Policy& policy, const TrainingBatch& batch, std::size_t probe_count,
                  std::uint64_t seed) {
  const std::vector<double> original = policy.params();
  auto fn = [&](std::span<const double> p) {
    policy.set_params(p);
    return evaluate(spec, policy, batch);
  };
  double err;
  try {
    err = grad_check(fn, original, probe_count, seed);
  } catch (...) {
    policy.set_params(original);
    throw;
  }
  policy.set_params(original);
  return err;
}

}  // namespace prefdens
