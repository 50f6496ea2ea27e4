#include <algorithm>
#include <cmath>
#include <memory>

#include "prefdens/error.hpp"
#include "prefdens/policy.hpp"

namespace prefdens {

LogDensity Policy::grid_density() const { throw Error(kind() + " policy has no grid density"); }

double Policy::log_density(const Item& x) const {
  const Item one[1] = {x};
  return forward(one).scores[0];
}

void apply_grad(Policy& policy, std::span<const double> grad, double scale) {
  std::vector<double> p = policy.params();
  if (grad.size() != p.size()) throw Error("apply_grad: gradient size mismatch");
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= scale * grad[i];
  policy.set_params(p);
}

LogDensityFn as_log_density_fn(const Policy& policy) {
  if (policy.has_grid()) return grid_log_density(policy.grid_density());
  std::shared_ptr<const Policy> snapshot = policy.clone();
  return [snapshot](const Item& x) { return snapshot->log_density(x); };
}

namespace {

struct TabularCache final : PolicyCache {
  std::vector<double> q;  // normalized mass per entry
};

void check_finite(std::span<const double> p, const char* who) {
  for (double v : p)
    if (!std::isfinite(v)) throw Error(std::string(who) + ": non-finite parameter");
}

}  // namespace

TabularPolicy::TabularPolicy(const GridDomain& domain, std::vector<double> logits)
    : grid_(true), domain_(domain), logits_(std::move(logits)) {
  if (logits_.size() != domain.n) throw DomainMismatchError("tabular policy: one logit per grid point");
  log_weights_.resize(domain.n);
  for (std::size_t i = 0; i < domain.n; ++i) log_weights_[i] = std::log(domain.weight(i));
}

TabularPolicy::TabularPolicy(std::vector<double> logits)
    : logits_(std::move(logits)), log_weights_(logits_.size(), 0.0) {
  if (logits_.empty()) throw ConfigError("tabular policy needs at least one logit");
}

TabularPolicy TabularPolicy::from_density(const LogDensity& p) { return TabularPolicy(p.domain, p.log_p); }

void TabularPolicy::set_params(std::span<const double> p) {
  if (p.size() != logits_.size()) throw Error("tabular policy: parameter size mismatch");
  check_finite(p, "tabular policy");
  logits_.assign(p.begin(), p.end());
}

std::vector<double> TabularPolicy::log_probs() const {
  std::vector<double> shifted(logits_.size());
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] = logits_[i] + log_weights_[i];
  const double lse = log_sum_exp(shifted);
  std::vector<double> out(logits_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = logits_[i] - lse;
  return out;
}

ForwardPass TabularPolicy::forward(std::span<const Item> items) const {
  std::vector<double> shifted(logits_.size());
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] = logits_[i] + log_weights_[i];
  const double lse = log_sum_exp(shifted);
  auto cache = std::make_unique<TabularCache>();
  cache->q.resize(logits_.size());
  for (std::size_t i = 0; i < shifted.size(); ++i) cache->q[i] = std::exp(shifted[i] - lse);
  ForwardPass fp;
  fp.scores.resize(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].id >= logits_.size()) throw DomainMismatchError("tabular policy: item id out of range");
    fp.scores[i] = logits_[items[i].id] - lse;
  }
  fp.cache = std::move(cache);
  return fp;
}

void TabularPolicy::backward(std::span<const Item> items, const ForwardPass& fp,
                             std::span<const double> dscore, std::span<double> grad) const {
  const auto& q = static_cast<const TabularCache&>(*fp.cache).q;
  double total = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    grad[items[i].id] += dscore[i];
    total += dscore[i];
  }
  for (std::size_t j = 0; j < q.size(); ++j) grad[j] -= total * q[j];
}

LogDensity TabularPolicy::grid_density() const {
  if (!grid_) throw Error("tabular policy over a finite item set has no grid density");
  std::vector<double> lp = log_probs();
  for (double& v : lp) v = std::max(v, kLogFloor);
  return LogDensity{domain_, std::move(lp), true};
}

}  // namespace prefdens
