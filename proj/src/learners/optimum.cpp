#include "prefdens/optimum.hpp"

#include "prefdens/error.hpp"

namespace prefdens {

LogDensity theoretical_optimum(const OptimumKind& kind, const LogDensity& prior, const LogDensity& target) {
  require_same_domain(prior.domain, target.domain, "theoretical optimum");
  if (!prior.normalized || !target.normalized) throw ConfigError("theoretical optimum needs normalized inputs");
  double a_prior = 0.0, a_target = 1.0;
  if (const auto* poe = std::get_if<optimum::ProductOfExperts>(&kind)) {
    if (!(poe->beta > 0.0)) throw ConfigError("product of experts needs beta > 0");
    a_prior = 1.0;
    a_target = 1.0 / poe->beta;
  } else if (const auto* gm = std::get_if<optimum::GeometricMean>(&kind)) {
    if (!(gm->alpha >= 0.0 && gm->alpha <= 1.0)) throw ConfigError("geometric mean needs alpha in [0, 1]");
    a_prior = 1.0 - gm->alpha;
    a_target = gm->alpha;
  }
  std::vector<double> raw(target.log_p.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = a_prior * prior.log_p[i] + a_target * target.log_p[i];
  return normalize(std::move(raw), target.domain);
}

}  // namespace prefdens
