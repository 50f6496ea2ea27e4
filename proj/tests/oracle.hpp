#pragma once

// Independent reference computations shared by the tests. Nothing here
// calls into the library under test.

#include <cmath>
#include <vector>

namespace oracle {

inline double trapz(const std::vector<double>& y, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) s += 0.5 * dx * (y[i] + y[i + 1]);
  return s;
}

// Grid points of [lo, hi] with n nodes.
inline std::vector<double> grid(double lo, double hi, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = i + 1 == n ? hi : lo + (hi - lo) * double(i) / double(n - 1);
  return x;
}

// Normalized density values from unnormalized positive values.
inline std::vector<double> normalize(std::vector<double> v, double dx) {
  const double z = trapz(v, dx);
  for (double& x : v) x /= z;
  return v;
}

inline std::vector<double> truncnorm(const std::vector<double>& x, double mu, double sigma) {
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = std::exp(-0.5 * std::pow((x[i] - mu) / sigma, 2));
  return normalize(v, x[1] - x[0]);
}

inline double tv(const std::vector<double>& p, const std::vector<double>& q, double dx) {
  std::vector<double> d(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) d[i] = std::abs(p[i] - q[i]);
  return 0.5 * trapz(d, dx);
}

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// Two-component toy target on [-10, 10].
inline std::vector<double> toy_target(const std::vector<double>& x) {
  const auto l = truncnorm(x, -2.5, 0.25), r = truncnorm(x, 2.5, 1.0);
  std::vector<double> p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = 0.4 * l[i] + 0.6 * r[i];
  return p;
}

}  // namespace oracle
