#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "prefdens/rng.hpp"

namespace prefdens {

// Log of the smallest mass we keep; anything below is clamped here.
inline constexpr double kLogFloor = -690.77552789821368;  // log(1e-300)

struct GridDomain {
  double lo = -10.0;
  double hi = 10.0;
  std::size_t n = 2048;

  GridDomain() = default;
  GridDomain(double lo_, double hi_, std::size_t n_);

  double dx() const { return (hi - lo) / static_cast<double>(n - 1); }
  double x(std::size_t i) const { return i + 1 == n ? hi : lo + static_cast<double>(i) * dx(); }
  // Nearest grid index to x, clamped into range.
  std::size_t snap(double x) const;
  // Trapezoid quadrature weight of point i (dx/2 at the ends, dx inside).
  double weight(std::size_t i) const { return (i == 0 || i + 1 == n) ? 0.5 * dx() : dx(); }
  std::vector<double> weights() const;

  bool operator==(const GridDomain& o) const { return lo == o.lo && hi == o.hi && n == o.n; }
  std::string describe() const;
};

void require_same_domain(const GridDomain& a, const GridDomain& b, const char* what);

struct LogDensity {
  GridDomain domain;
  std::vector<double> log_p;
  bool normalized = false;

  double prob(std::size_t i) const;
  std::vector<double> probs() const;
};

struct TruncatedNormalSpec {
  double mu = 0.0;
  double sigma = 1.0;
  double lo = -10.0;
  double hi = 10.0;
};

struct MixtureSpec {
  std::vector<double> weights;
  std::vector<LogDensity> components;
};

// Trapezoid integral of the given values over the domain.
double trapezoid(const GridDomain& domain, const std::vector<double>& values);

LogDensity normalize(std::vector<double> raw_log_values, const GridDomain& domain);
LogDensity eval_truncated_normal(const TruncatedNormalSpec& spec, const GridDomain& domain);
LogDensity mix(const MixtureSpec& spec);
LogDensity uniform_density(const GridDomain& domain);

double kl(const LogDensity& p, const LogDensity& q);
double total_variation(const LogDensity& p, const LogDensity& q);

// i.i.d. draws from the piecewise-linear density through its exact inverse CDF.
std::vector<double> sample(const LogDensity& p, std::size_t n, Rng& rng);
std::vector<double> sample(const LogDensity& p, std::size_t n, std::uint64_t seed);

struct GridPair {
  std::size_t a;
  std::size_t b;
};

// Pairs uniform on [lo,hi]^2, snapped to grid indices.
GridPair uniform_pair(const GridDomain& domain, Rng& rng);
std::vector<GridPair> uniform_pairs(const GridDomain& domain, std::size_t n, std::uint64_t seed);

std::string density_to_csv(const LogDensity& p);
LogDensity density_from_csv(const std::string& text);

// Stable log(sum(exp(v))). Returns -inf for an empty input.
double log_sum_exp(const std::vector<double>& v);

}  // namespace prefdens
