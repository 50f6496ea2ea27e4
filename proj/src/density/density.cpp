#include <algorithm>
#include <cmath>

#include "prefdens/density.hpp"
#include "prefdens/error.hpp"
#include "prefdens/io.hpp"

namespace prefdens {

double trapezoid(const GridDomain& domain, const std::vector<double>& values) {
  if (values.size() != domain.n) throw DomainMismatchError("trapezoid: value count != grid size");
  double inner = 0.0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) inner += values[i];
  return domain.dx() * (inner + 0.5 * (values.front() + values.back()));
}

LogDensity normalize(std::vector<double> raw, const GridDomain& domain) {
  if (raw.size() != domain.n) throw DomainMismatchError("normalize: value count != grid size");
  std::vector<double> weighted(raw.size());
  bool any_mass = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (std::isnan(raw[i]) || raw[i] == INFINITY)
      throw DegenerateDensityError("normalize: non-finite log value at index " + std::to_string(i));
    if (raw[i] != -INFINITY) any_mass = true;
    weighted[i] = raw[i] + std::log(domain.weight(i));
  }
  if (!any_mass) throw DegenerateDensityError("normalize: all log values are -inf");
  const double log_z = log_sum_exp(weighted);
  if (!std::isfinite(log_z)) throw DegenerateDensityError("normalize: normalizer is not finite");
  for (double& v : raw) v = std::max(v - log_z, kLogFloor);
  return LogDensity{domain, std::move(raw), true};
}

LogDensity eval_truncated_normal(const TruncatedNormalSpec& spec, const GridDomain& domain) {
  if (!(spec.sigma > 0.0)) throw ConfigError("truncated normal needs sigma > 0");
  if (!(spec.lo < spec.hi)) throw ConfigError("truncated normal needs lo < hi");
  if (spec.lo != domain.lo || spec.hi != domain.hi)
    throw ConfigError("truncated normal bounds must equal the grid domain bounds");
  std::vector<double> raw(domain.n);
  for (std::size_t i = 0; i < domain.n; ++i) {
    const double z = (domain.x(i) - spec.mu) / spec.sigma;
    raw[i] = -0.5 * z * z;
  }
  return normalize(std::move(raw), domain);
}

LogDensity mix(const MixtureSpec& spec) {
  if (spec.components.empty() || spec.weights.size() != spec.components.size())
    throw ConfigError("mixture needs one weight per component");
  double wsum = 0.0;
  for (double w : spec.weights) {
    if (!(w > 0.0)) throw ConfigError("mixture weights must be positive");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12) throw ConfigError("mixture weights must sum to 1");
  const GridDomain& dom = spec.components.front().domain;
  for (const auto& c : spec.components) require_same_domain(dom, c.domain, "mix");
  std::vector<double> raw(dom.n);
  std::vector<double> terms(spec.components.size());
  for (std::size_t i = 0; i < dom.n; ++i) {
    for (std::size_t k = 0; k < terms.size(); ++k)
      terms[k] = std::log(spec.weights[k]) + spec.components[k].log_p[i];
    raw[i] = log_sum_exp(terms);
  }
  return normalize(std::move(raw), dom);
}

LogDensity uniform_density(const GridDomain& domain) {
  return normalize(std::vector<double>(domain.n, 0.0), domain);
}

double kl(const LogDensity& p, const LogDensity& q) {
  require_same_domain(p.domain, q.domain, "kl");
  std::vector<double> v(p.log_p.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(p.log_p[i]) * (p.log_p[i] - q.log_p[i]);
  return trapezoid(p.domain, v);
}

double total_variation(const LogDensity& p, const LogDensity& q) {
  require_same_domain(p.domain, q.domain, "total_variation");
  std::vector<double> v(p.log_p.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(std::exp(p.log_p[i]) - std::exp(q.log_p[i]));
  return 0.5 * trapezoid(p.domain, v);
}

std::vector<double> sample(const LogDensity& p, std::size_t n, Rng& rng) {
  const GridDomain& d = p.domain;
  const double dx = d.dx();
  const std::vector<double> pr = p.probs();
  std::vector<double> cum(d.n - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < d.n; ++i) {
    acc += 0.5 * dx * (pr[i] + pr[i + 1]);
    cum[i] = acc;
  }
  std::vector<double> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double target = rng.uniform() * acc;
    std::size_t cell = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin());
    if (cell >= cum.size()) cell = cum.size() - 1;
    const double before = cell == 0 ? 0.0 : cum[cell - 1];
    // Solve p0*t + (p1-p0)*t^2/2 = r for t in [0,1] (mass in units of dx).
    const double r = (target - before) / dx;
    const double p0 = pr[cell], slope = pr[cell + 1] - pr[cell];
    const double disc = std::max(0.0, p0 * p0 + 2.0 * slope * r);
    const double denom = p0 + std::sqrt(disc);
    double t = denom > 0.0 ? 2.0 * r / denom : 0.5;
    t = std::clamp(t, 0.0, 1.0);
    out[s] = d.x(cell) + t * dx;
  }
  return out;
}

std::vector<double> sample(const LogDensity& p, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample(p, n, rng);
}

GridPair uniform_pair(const GridDomain& domain, Rng& rng) {
  const double a = rng.uniform(domain.lo, domain.hi);
  const double b = rng.uniform(domain.lo, domain.hi);
  return {domain.snap(a), domain.snap(b)};
}

std::vector<GridPair> uniform_pairs(const GridDomain& domain, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GridPair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(uniform_pair(domain, rng));
  return out;
}

std::string density_to_csv(const LogDensity& p) {
  CsvWriter w({"x", "log_p"});
  for (std::size_t i = 0; i < p.log_p.size(); ++i) w.row({fmt_double(p.domain.x(i)), fmt_double(p.log_p[i])});
  return w.str();
}

LogDensity density_from_csv(const std::string& text) {
  const CsvTable t = parse_csv(text);
  const std::size_t cx = t.column("x"), cl = t.column("log_p");
  if (t.rows.size() < 2) throw Error("density CSV needs at least 2 rows");
  std::vector<double> lp;
  lp.reserve(t.rows.size());
  for (const auto& r : t.rows) lp.push_back(std::stod(r[cl]));
  GridDomain dom(std::stod(t.rows.front()[cx]), std::stod(t.rows.back()[cx]), t.rows.size());
  LogDensity out{dom, std::move(lp), false};
  out.normalized = std::abs(trapezoid(dom, out.probs()) - 1.0) < 1e-9;
  return out;
}

}  // namespace prefdens
