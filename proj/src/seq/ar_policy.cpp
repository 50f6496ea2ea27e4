#include <cmath>

#include "prefdens/error.hpp"
#include "prefdens/seq.hpp"

namespace prefdens::seq {

namespace {

struct ArCache final : PolicyCache {
  std::vector<double> log_q;
};

}  // namespace

Item pool_item(const std::vector<Sequence>& pool, std::size_t id) {
  if (id >= pool.size()) throw Error("pool item out of range");
  return Item{id, 0.0, int(pool[id].size())};
}

ArPolicy::ArPolicy(const ArTable& init, std::shared_ptr<const std::vector<Sequence>> pool)
    : space_(init.space()), pool_(std::move(pool)) {
  if (!pool_) throw ConfigError("ar policy needs a sequence pool");
  logits_ = init.log_start_vec();
  logits_.insert(logits_.end(), init.log_trans_vec().begin(), init.log_trans_vec().end());
}

void ArPolicy::set_params(std::span<const double> p) {
  if (p.size() != logits_.size()) throw Error("ar policy: parameter size mismatch");
  for (double x : p)
    if (!std::isfinite(x)) throw Error("ar policy: non-finite parameter");
  logits_.assign(p.begin(), p.end());
}

std::vector<double> ArPolicy::log_softmax_rows() const {
  std::vector<double> out(logits_.size());
  auto row = [&](std::size_t off, std::size_t n) {
    double mx = logits_[off];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits_[off + i]);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(logits_[off + i] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t i = 0; i < n; ++i) out[off + i] = logits_[off + i] - lse;
  };
  const std::size_t v = std::size_t(space_.vocab_size);
  row(0, v);
  for (std::size_t a = 0; a < v; ++a) row(v + a * (v + 1), v + 1);
  return out;
}

void ArPolicy::features(const Sequence& s, std::vector<std::size_t>& out) const {
  const std::size_t v = std::size_t(space_.vocab_size);
  out.clear();
  out.push_back(std::size_t(s[0]));
  for (std::size_t i = 1; i < s.size(); ++i) out.push_back(v + std::size_t(s[i - 1]) * (v + 1) + std::size_t(s[i]));
  if (int(s.size()) < space_.max_len) out.push_back(v + std::size_t(s.back()) * (v + 1) + v);
}

ForwardPass ArPolicy::forward(std::span<const Item> items) const {
  auto cache = std::make_unique<ArCache>();
  cache->log_q = log_softmax_rows();
  ForwardPass fp;
  fp.scores.resize(items.size());
  std::vector<std::size_t> f;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].id >= pool_->size()) throw DomainMismatchError("ar policy: item outside the sequence pool");
    features((*pool_)[items[i].id], f);
    double s = 0.0;
    for (std::size_t k : f) s += cache->log_q[k];
    fp.scores[i] = s;
  }
  fp.cache = std::move(cache);
  return fp;
}

void ArPolicy::backward(std::span<const Item> items, const ForwardPass& fp, std::span<const double> dscore,
                        std::span<double> grad) const {
  const auto& cache = static_cast<const ArCache&>(*fp.cache);
  std::vector<double> g(logits_.size(), 0.0);
  std::vector<std::size_t> f;
  for (std::size_t i = 0; i < items.size(); ++i) {
    features((*pool_)[items[i].id], f);
    for (std::size_t k : f) g[k] += dscore[i];
  }
  // d log_softmax_j / d logit_k = [j == k] - q_k, per row.
  auto row = [&](std::size_t off, std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += g[off + i];
    if (total == 0.0) {
      for (std::size_t i = 0; i < n; ++i) grad[off + i] += g[off + i];
      return;
    }
    for (std::size_t i = 0; i < n; ++i) grad[off + i] += g[off + i] - total * std::exp(cache.log_q[off + i]);
  };
  const std::size_t v = std::size_t(space_.vocab_size);
  row(0, v);
  for (std::size_t a = 0; a < v; ++a) row(v + a * (v + 1), v + 1);
}

ArTable ArPolicy::table() const {
  const auto lq = log_softmax_rows();
  const std::size_t v = std::size_t(space_.vocab_size);
  return ArTable(space_, std::vector<double>(lq.begin(), lq.begin() + std::ptrdiff_t(v)),
                 std::vector<double>(lq.begin() + std::ptrdiff_t(v), lq.end()));
}

}  // namespace prefdens::seq
