#include <cmath>

#include "prefdens/error.hpp"
#include "prefdens/kernels.hpp"
#include "prefdens/policy.hpp"
#include "prefdens/rng.hpp"

namespace prefdens {

namespace {

constexpr std::size_t W = EnergyNetwork::kWidth;

// Offsets into the flat parameter vector.
constexpr std::size_t kW0 = 0;
constexpr std::size_t kB0 = W;
constexpr std::size_t hidden_w(std::size_t l) { return 2 * W + (l - 1) * (W * W + W); }
constexpr std::size_t hidden_b(std::size_t l) { return hidden_w(l) + W * W; }
constexpr std::size_t kWout = hidden_w(EnergyNetwork::kHidden);
constexpr std::size_t kBout = kWout + W;
static_assert(kBout + 1 == EnergyNetwork::kParamCount);

}  // namespace

EnergyNetwork::EnergyNetwork(std::uint64_t seed) : params_(kParamCount) {
  Rng rng(seed);
  auto fill = [&](std::size_t off, std::size_t count, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    for (std::size_t i = 0; i < count; ++i) params_[off + i] = rng.uniform(-bound, bound);
  };
  fill(kW0, W, 1.0);
  fill(kB0, W, 1.0);
  for (std::size_t l = 1; l < kHidden; ++l) {
    fill(hidden_w(l), W * W, double(W));
    fill(hidden_b(l), W, double(W));
  }
  fill(kWout, W, double(W));
  fill(kBout, 1, double(W));
}

EnergyNetwork::EnergyNetwork(std::vector<double> params) : params_(std::move(params)) {
  if (params_.size() != kParamCount) throw Error("energy network: wrong parameter count");
}

std::vector<double> EnergyNetwork::forward(std::span<const double> x, Activations* acts) const {
  const std::size_t m = x.size();
  const double* p = params_.data();
  Activations local;
  Activations& a = acts ? *acts : local;
  a.m = m;
  a.input.assign(x.begin(), x.end());
  a.hidden.assign(kHidden, std::vector<double>(m * W));

  double* h = a.hidden[0].data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < W; ++j) h[i * W + j] = p[kW0 + j] * x[i] + p[kB0 + j];
  kernels::tanh_inplace(h, m * W);

  std::vector<double> wt(W * W);
  for (std::size_t l = 1; l < kHidden; ++l) {
    const double* wl = p + hidden_w(l);  // [out][in]
    for (std::size_t o = 0; o < W; ++o)
      for (std::size_t in = 0; in < W; ++in) wt[in * W + o] = wl[o * W + in];
    double* z = a.hidden[l].data();
    const double* bl = p + hidden_b(l);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < W; ++j) z[i * W + j] = bl[j];
    kernels::gemm_acc(m, W, W, a.hidden[l - 1].data(), W, 1, wt.data(), W, z, W);
    kernels::tanh_inplace(z, m * W);
  }

  std::vector<double> out(m);
  const double* last = a.hidden[kHidden - 1].data();
  for (std::size_t i = 0; i < m; ++i) out[i] = p[kBout] + kernels::dot(last + i * W, p + kWout, W);
  return out;
}

void EnergyNetwork::backward(const Activations& a, std::span<const double> dout,
                             std::span<double> grad) const {
  const std::size_t m = a.m;
  if (dout.size() != m || grad.size() != params_.size()) throw Error("energy network: backward size mismatch");
  const double* p = params_.data();
  double* g = grad.data();

  // Output layer.
  const double* last = a.hidden[kHidden - 1].data();
  std::vector<double> dh(m * W);
  for (std::size_t i = 0; i < m; ++i) {
    g[kBout] += dout[i];
    for (std::size_t j = 0; j < W; ++j) dh[i * W + j] = dout[i] * p[kWout + j];
  }
  kernels::gemm_acc(1, W, m, dout.data(), 0, 1, last, W, g + kWout, W);

  std::vector<double> dz(m * W);
  for (std::size_t l = kHidden - 1; l >= 1; --l) {
    const double* hout = a.hidden[l].data();
    const double* hin = a.hidden[l - 1].data();
    for (std::size_t k = 0; k < m * W; ++k) dz[k] = dh[k] * (1.0 - hout[k] * hout[k]);
    double* gb = g + hidden_b(l);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < W; ++j) gb[j] += dz[i * W + j];
    // dW[out][in] += dZ^T H_in
    kernels::gemm_acc(W, W, m, dz.data(), 1, W, hin, W, g + hidden_w(l), W);
    // dH_in = dZ W
    std::fill(dh.begin(), dh.end(), 0.0);
    kernels::gemm_acc(m, W, W, dz.data(), W, 1, p + hidden_w(l), W, dh.data(), W);
  }

  const double* h1 = a.hidden[0].data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < W; ++j) {
      const double d = dh[i * W + j] * (1.0 - h1[i * W + j] * h1[i * W + j]);
      g[kW0 + j] += d * a.input[i];
      g[kB0 + j] += d;
    }
  }
}

namespace {

struct EnergyCache final : PolicyCache {
  EnergyNetwork::Activations acts;
  std::vector<double> q;  // grid softmax, normalized mode only
};

}  // namespace

EnergyPolicy::EnergyPolicy(EnergyNetwork net, Mode mode, const GridDomain& domain)
    : net_(std::move(net)), mode_(mode), domain_(domain) {}

void EnergyPolicy::set_params(std::span<const double> p) {
  if (p.size() != net_.num_params()) throw Error("energy policy: parameter size mismatch");
  for (double v : p)
    if (!std::isfinite(v)) throw Error("energy policy: non-finite parameter");
  net_.mutable_params().assign(p.begin(), p.end());
}

ForwardPass EnergyPolicy::forward(std::span<const Item> items) const {
  auto cache = std::make_unique<EnergyCache>();
  ForwardPass fp;
  if (mode_ == Mode::kRawReward) {
    std::vector<double> xs(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) xs[i] = items[i].x;
    fp.scores = net_.forward(xs, &cache->acts);
  } else {
    std::vector<double> xs(domain_.n);
    for (std::size_t j = 0; j < domain_.n; ++j) xs[j] = domain_.x(j);
    const std::vector<double> r = net_.forward(xs, &cache->acts);
    std::vector<double> shifted(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) shifted[j] = r[j] + std::log(domain_.weight(j));
    const double lse = log_sum_exp(shifted);
    cache->q.resize(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) cache->q[j] = std::exp(shifted[j] - lse);
    fp.scores.resize(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].id >= domain_.n) throw DomainMismatchError("energy policy: item id outside grid");
      fp.scores[i] = r[items[i].id] - lse;
    }
  }
  fp.cache = std::move(cache);
  return fp;
}

void EnergyPolicy::backward(std::span<const Item> items, const ForwardPass& fp,
                            std::span<const double> dscore, std::span<double> grad) const {
  const auto& cache = static_cast<const EnergyCache&>(*fp.cache);
  if (mode_ == Mode::kRawReward) {
    net_.backward(cache.acts, dscore, grad);
    return;
  }
  std::vector<double> dr(domain_.n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    dr[items[i].id] += dscore[i];
    total += dscore[i];
  }
  for (std::size_t j = 0; j < dr.size(); ++j) dr[j] -= total * cache.q[j];
  net_.backward(cache.acts, dr, grad);
}

LogDensity EnergyPolicy::grid_density() const {
  std::vector<double> xs(domain_.n);
  for (std::size_t j = 0; j < domain_.n; ++j) xs[j] = domain_.x(j);
  return normalize(net_.forward(xs, nullptr), domain_);
}

}  // namespace prefdens
