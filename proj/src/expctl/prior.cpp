#include <map>
#include <mutex>
#include <tuple>

#include "prefdens/expctl.hpp"
#include "prefdens/optim.hpp"

namespace prefdens::expctl {

namespace {

Prior regress(const GridDomain& domain, double mu, double sigma, std::uint64_t seed, std::size_t steps) {
  const LogDensity target = eval_truncated_normal({mu, sigma, domain.lo, domain.hi}, domain);
  EnergyNetwork net(derive_seed(seed, "prior-init"));
  std::vector<double> xs(domain.n);
  for (std::size_t i = 0; i < domain.n; ++i) xs[i] = domain.x(i);
  const AdamConfig adam;
  const CosineSchedule schedule{adam.lr, steps};
  AdamState state(net.num_params());
  std::vector<double> grad(net.num_params()), dout(domain.n);
  EnergyNetwork::Activations acts;
  const double inv_n = 1.0 / double(domain.n);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::vector<double> out = net.forward(xs, &acts);
    for (std::size_t i = 0; i < domain.n; ++i) dout[i] = 2.0 * inv_n * (out[i] - target.log_p[i]);
    std::fill(grad.begin(), grad.end(), 0.0);
    net.backward(acts, dout, grad);
    adam_step(net.mutable_params(), grad, state, adam, t + 1, lr_at(schedule, t));
  }
  LogDensity density = normalize(net.forward(xs, nullptr), domain);
  return Prior{std::move(net), std::move(density)};
}

}  // namespace

const Prior& pretrained_prior(const GridDomain& domain, double mu, double sigma, std::uint64_t seed,
                              std::size_t steps) {
  using Key = std::tuple<double, double, std::size_t, double, double, std::uint64_t, std::size_t>;
  static std::mutex mu_lock;
  static std::map<Key, std::unique_ptr<Prior>> cache;
  const Key key{domain.lo, domain.hi, domain.n, mu, sigma, seed, steps};
  std::lock_guard<std::mutex> lock(mu_lock);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<Prior>(regress(domain, mu, sigma, seed, steps))).first;
  return *it->second;
}

}  // namespace prefdens::expctl
