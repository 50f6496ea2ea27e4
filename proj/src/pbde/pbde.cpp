#include <cmath>

#include "prefdens/error.hpp"
#include "prefdens/io.hpp"
#include "prefdens/pbde.hpp"

namespace prefdens {

LogDensityFn grid_log_density(LogDensity p) {
  return [p = std::move(p)](const Item& x) {
    if (x.id >= p.log_p.size()) throw DomainMismatchError("item id outside the density grid");
    return p.log_p[x.id];
  };
}

int grid_length(const GridDomain& domain, std::size_t i) {
  const double t = (domain.x(i) - domain.lo) / (domain.hi - domain.lo);
  const int len = 1 + static_cast<int>(std::floor(6.0 * t));
  return len < 1 ? 1 : (len > 6 ? 6 : len);
}

Item grid_item(const GridDomain& domain, std::size_t i, bool with_length) {
  return Item{i, domain.x(i), with_length ? grid_length(domain, i) : 0};
}

std::vector<Item> grid_items(const GridDomain& domain, bool with_length) {
  std::vector<Item> out;
  out.reserve(domain.n);
  for (std::size_t i = 0; i < domain.n; ++i) out.push_back(grid_item(domain, i, with_length));
  return out;
}

PbdeSpec PbdeSpec::shifted(double beta, LogDensityFn reference) {
  if (!(beta > 0.0)) throw ConfigError("Shifted PBDE needs beta > 0");
  return {pbde::Shifted{beta, std::move(reference)}};
}

PbdeSpec PbdeSpec::geometric(double alpha, LogDensityFn reference) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("Geometric PBDE needs alpha in (0, 1]");
  return {pbde::Geometric{alpha, std::move(reference)}};
}

std::string PbdeSpec::name() const {
  struct V {
    std::string operator()(const pbde::Unit&) const { return "unit"; }
    std::string operator()(const pbde::LengthNormalized&) const { return "length-normalized"; }
    std::string operator()(const pbde::Shifted& s) const { return "shifted(beta=" + fmt_double(s.beta) + ")"; }
    std::string operator()(const pbde::Geometric& g) const { return "geometric(alpha=" + fmt_double(g.alpha) + ")"; }
  };
  return std::visit(V{}, kind);
}

static double reference_at(const LogDensityFn& ref, const Item& x) {
  if (!ref) throw ConfigError("PBDE reference density is not set");
  const double v = ref(x);
  if (!std::isfinite(v)) throw Error("PBDE reference log-density is not finite at item " + std::to_string(x.id));
  return v;
}

Coeffs coefficients(const PbdeSpec& spec, const Item& x) {
  struct V {
    const Item& x;
    Coeffs operator()(const pbde::Unit&) const { return {1.0, 0.0}; }
    Coeffs operator()(const pbde::LengthNormalized&) const {
      if (x.length < 1) throw ConfigError("length-normalized PBDE needs items with a length");
      return {1.0 / x.length, 0.0};
    }
    Coeffs operator()(const pbde::Shifted& s) const {
      return {s.beta, -s.beta * reference_at(s.reference, x)};
    }
    Coeffs operator()(const pbde::Geometric& g) const {
      const double inv = 1.0 / g.alpha;
      return {inv, (1.0 - inv) * reference_at(g.reference, x)};
    }
  };
  return std::visit(V{x}, spec.kind);
}

double omega_from(const PbdeSpec& spec, double log_p, const Item& x) {
  const Coeffs c = coefficients(spec, x);
  return c.f * log_p + c.g;
}

double omega(const PbdeSpec& spec, const LogDensityFn& log_p, const Item& x) {
  return omega_from(spec, log_p(x), x);
}

// The negative branch is written as 1 - sigmoid(-t) so that
// sigmoid(t) + sigmoid(-t) == 1 holds exactly. Losses use log_sigmoid.
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  return 1.0 - 1.0 / (1.0 + std::exp(t));
}

double log_sigmoid(double t) {
  if (t >= 0.0) return -std::log1p(std::exp(-t));
  return t - std::log1p(std::exp(t));
}

double pref_prob(const PbdeSpec& spec, const LogDensityFn& log_p, const Item& a, const Item& b) {
  return sigmoid(omega(spec, log_p, a) - omega(spec, log_p, b));
}

double annotator_pref_prob(const Annotator& ann, const Item& x_a, const Item& x_b) {
  if (const auto* s = std::get_if<SingleAnnotator>(&ann)) return pref_prob(s->pbde, s->implicit, x_a, x_b);
  const auto& m = std::get<MixtureAnnotator>(ann);
  if (m.members.empty() || m.members.size() != m.weights.size())
    throw ConfigError("mixture annotator needs one weight per member");
  double wsum = 0.0;
  for (double w : m.weights) wsum += w;
  if (std::abs(wsum - 1.0) > 1e-12) throw ConfigError("mixture annotator weights must sum to 1");
  double p = 0.0;
  for (std::size_t i = 0; i < m.members.size(); ++i)
    p += m.weights[i] * pref_prob(m.members[i].pbde, m.members[i].implicit, x_a, x_b);
  return p;
}

std::string describe(const Annotator& ann) {
  if (const auto* s = std::get_if<SingleAnnotator>(&ann)) return s->desc + " [" + s->pbde.name() + "]";
  const auto& m = std::get<MixtureAnnotator>(ann);
  std::string out = "mixture(";
  for (std::size_t i = 0; i < m.members.size(); ++i) {
    if (i) out += "; ";
    out += fmt_double(m.weights[i]) + " x " + m.members[i].desc + " [" + m.members[i].pbde.name() + "]";
  }
  return out + ")";
}

}  // namespace prefdens
