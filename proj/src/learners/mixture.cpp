#include <cmath>

#include "prefdens/error.hpp"
#include "prefdens/policy.hpp"

namespace prefdens {

namespace {

struct MixtureCache final : PolicyCache {
  std::vector<ForwardPass> heads;
  std::vector<std::vector<double>> resp;  // resp[k][i] = posterior of head k at item i
  std::vector<double> weights;
};

std::vector<double> softmax(const std::vector<double>& logits) {
  const double lse = log_sum_exp(logits);
  std::vector<double> w(logits.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(logits[k] - lse);
  return w;
}

}  // namespace

MixturePolicy::MixturePolicy(std::vector<std::unique_ptr<Policy>> heads, std::vector<double> weight_logits)
    : heads_(std::move(heads)), weight_logits_(std::move(weight_logits)) {
  if (heads_.empty()) throw ConfigError("mixture policy needs at least one head");
  if (weight_logits_.size() != heads_.size()) throw ConfigError("mixture policy: one weight logit per head");
  for (const auto& h : heads_)
    if (h->kind() == "energy-reward") throw ConfigError("mixture heads must be normalized densities");
}

MixturePolicy::MixturePolicy(const MixturePolicy& other) : Policy(other), weight_logits_(other.weight_logits_) {
  for (const auto& h : other.heads_) heads_.push_back(h->clone());
}

std::size_t MixturePolicy::num_params() const {
  std::size_t n = weight_logits_.size();
  for (const auto& h : heads_) n += h->num_params();
  return n;
}

std::size_t MixturePolicy::head_offset(std::size_t k) const {
  std::size_t off = 0;
  for (std::size_t i = 0; i < k; ++i) off += heads_[i]->num_params();
  return off;
}

std::size_t MixturePolicy::weight_offset() const { return head_offset(heads_.size()); }

std::vector<double> MixturePolicy::weights() const { return softmax(weight_logits_); }

std::vector<double> MixturePolicy::params() const {
  std::vector<double> out;
  out.reserve(num_params());
  for (const auto& h : heads_) {
    const auto p = h->params();
    out.insert(out.end(), p.begin(), p.end());
  }
  out.insert(out.end(), weight_logits_.begin(), weight_logits_.end());
  return out;
}

void MixturePolicy::set_params(std::span<const double> p) {
  if (p.size() != num_params()) throw Error("mixture policy: parameter size mismatch");
  std::size_t off = 0;
  for (auto& h : heads_) {
    h->set_params(p.subspan(off, h->num_params()));
    off += h->num_params();
  }
  for (double v : p.subspan(off))
    if (!std::isfinite(v)) throw Error("mixture policy: non-finite weight logit");
  weight_logits_.assign(p.begin() + static_cast<std::ptrdiff_t>(off), p.end());
}

ForwardPass MixturePolicy::forward(std::span<const Item> items) const {
  auto cache = std::make_unique<MixtureCache>();
  cache->weights = weights();
  const std::size_t k_count = heads_.size();
  for (const auto& h : heads_) cache->heads.push_back(h->forward(items));
  cache->resp.assign(k_count, std::vector<double>(items.size()));
  ForwardPass fp;
  fp.scores.resize(items.size());
  std::vector<double> terms(k_count);
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t k = 0; k < k_count; ++k) terms[k] = std::log(cache->weights[k]) + cache->heads[k].scores[i];
    const double lse = log_sum_exp(terms);
    fp.scores[i] = lse;
    for (std::size_t k = 0; k < k_count; ++k) cache->resp[k][i] = std::exp(terms[k] - lse);
  }
  fp.cache = std::move(cache);
  return fp;
}

void MixturePolicy::backward(std::span<const Item> items, const ForwardPass& fp,
                             std::span<const double> dscore, std::span<double> grad) const {
  const auto& cache = static_cast<const MixtureCache&>(*fp.cache);
  std::vector<double> dh(items.size());
  const std::size_t woff = weight_offset();
  for (std::size_t k = 0; k < heads_.size(); ++k) {
    double dlogit = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      dh[i] = dscore[i] * cache.resp[k][i];
      dlogit += dscore[i] * (cache.resp[k][i] - cache.weights[k]);
    }
    heads_[k]->backward(items, cache.heads[k], dh, grad.subspan(head_offset(k), heads_[k]->num_params()));
    grad[woff + k] += dlogit;
  }
}

bool MixturePolicy::has_grid() const {
  for (const auto& h : heads_)
    if (!h->has_grid()) return false;
  return true;
}

LogDensity MixturePolicy::grid_density() const {
  const auto w = weights();
  MixtureSpec spec;
  spec.weights = w;
  // Normalize weights exactly so mix() accepts them.
  double s = 0.0;
  for (double v : spec.weights) s += v;
  for (double& v : spec.weights) v /= s;
  for (const auto& h : heads_) spec.components.push_back(h->grid_density());
  return mix(spec);
}

}  // namespace prefdens
