#include <cmath>
#include <sstream>

#include "prefdens/density.hpp"
#include "prefdens/error.hpp"
#include "prefdens/io.hpp"

namespace prefdens {

GridDomain::GridDomain(double lo_, double hi_, std::size_t n_) : lo(lo_), hi(hi_), n(n_) {
  if (!(lo < hi)) throw ConfigError("grid domain needs lo < hi");
  if (n < 2) throw ConfigError("grid domain needs at least 2 points");
}

std::size_t GridDomain::snap(double xv) const {
  const double t = (xv - lo) / dx();
  if (!(t > 0.0)) return 0;
  const auto i = static_cast<std::size_t>(std::llround(t));
  return i >= n ? n - 1 : i;
}

std::vector<double> GridDomain::weights() const {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = weight(i);
  return w;
}

std::string GridDomain::describe() const {
  return "[" + fmt_double(lo) + ", " + fmt_double(hi) + "] n=" + std::to_string(n);
}

void require_same_domain(const GridDomain& a, const GridDomain& b, const char* what) {
  if (!(a == b))
    throw DomainMismatchError(std::string(what) + ": domains differ (" + a.describe() + " vs " +
                              b.describe() + ")");
}

double LogDensity::prob(std::size_t i) const { return std::exp(log_p[i]); }

std::vector<double> LogDensity::probs() const {
  std::vector<double> p(log_p.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_p[i]);
  return p;
}

double log_sum_exp(const std::vector<double>& v) {
  if (v.empty()) return -INFINITY;
  double mx = -INFINITY;
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace prefdens
