#pragma once

#include <variant>

#include "prefdens/density.hpp"

namespace prefdens {

namespace optimum {
struct Identity {};
// prior * target^(1/beta)
struct ProductOfExperts {
  double beta = 1.0;
};
// prior^(1-alpha) * target^alpha
struct GeometricMean {
  double alpha = 1.0;
};
}  // namespace optimum

using OptimumKind = std::variant<optimum::Identity, optimum::ProductOfExperts, optimum::GeometricMean>;

// Closed-form density a mismatched learner converges to, renormalized on the grid.
LogDensity theoretical_optimum(const OptimumKind& kind, const LogDensity& prior, const LogDensity& target);

}  // namespace prefdens
