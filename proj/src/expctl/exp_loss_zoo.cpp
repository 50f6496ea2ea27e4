#include "common.hpp"
#include "experiments.hpp"

#include <algorithm>
#include <cmath>

#include "prefdens/error.hpp"

namespace prefdens::expctl::detail {
namespace {

// Mixed batch covering the grid: pairs with soft and hard labels, ranked lists and
// weighted regularization points, so every loss has terms to differentiate.
TrainingBatch probe_batch(const GridDomain& domain, const Annotator& ann, std::uint64_t seed) {
  const PreferenceDataset d = gen_dataset(uniform_grid_proposal(domain, true), ann, 256, seed);
  TrainingBatch b = batch_from_triplets(d.triplets);
  for (std::size_t k = 0; k < b.pairs.size(); k += 3) b.pairs[k].label = 0.25 + 0.5 * double(k % 2);
  const std::size_t m = b.points.size();
  b.lists.push_back({{0, 1 % m, 2 % m, 3 % m}});
  b.lists.push_back({{4 % m, 5 % m, 6 % m}});
  for (std::size_t k = 0; k < 4; ++k) b.reg.push_back({(7 + k) % m, 0.25});
  return b;
}

std::unique_ptr<Policy> make_head(const std::string& kind, const GridDomain& domain, std::uint64_t seed) {
  if (kind == "tabular") {
    Rng rng(seed);
    std::vector<double> logits(domain.n);
    for (double& v : logits) v = 0.5 * rng.normal();
    return std::make_unique<TabularPolicy>(domain, std::move(logits));
  }
  return std::make_unique<EnergyPolicy>(EnergyNetwork(seed), EnergyPolicy::Mode::kGridNormalized, domain);
}

// Items drawn from a grid density in proportion to its grid mass.
ItemSampler density_sampler(const LogDensity& d, std::size_t count) {
  std::vector<double> cdf(d.domain.n);
  double acc = 0.0;
  for (std::size_t i = 0; i < d.domain.n; ++i) cdf[i] = acc += std::exp(d.log_p[i]);
  for (double& c : cdf) c /= acc;
  const GridDomain domain = d.domain;
  return [cdf, domain, count](Rng& rng) {
    std::vector<Item> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = std::size_t(std::lower_bound(cdf.begin(), cdf.end(), rng.uniform()) - cdf.begin());
      out.push_back(grid_item(domain, std::min(i, domain.n - 1), false));
    }
    return out;
  };
}

}  // namespace

Schema loss_zoo_schema() {
  Schema s = toy_schema();
  s.insert(s.end(), {
                        {"probes", ParamType::kInt, "48", "coordinates probed per gradient check"},
                        {"grad_tol", ParamType::kReal, "1e-5", "pass bound on gradient-check relative error"},
                        {"pairs", ParamType::kInt, "32768", "sampled pairs for the training sweeps"},
                        {"batch", ParamType::kInt, "512", "minibatch size"},
                        {"steps", ParamType::kInt, "8192", "optimizer steps per training run"},
                        {"lr", ParamType::kReal, "5e-4", "Adam learning rate (cosine decay to 0)"},
                        {"ipo_tau", ParamType::kRealList, "0.1,0.5,1.0", "IPO temperatures"},
                        {"slic_delta", ParamType::kReal, "1.0", "SLiC margin"},
                        {"slic_lambda", ParamType::kRealList, "0,1", "SLiC regularization weights"},
                        {"reg_draws", ParamType::kInt, "512", "regularization draws from the prior per epoch"},
                    });
  return s;
}

void loss_zoo_body(RunContext& ctx) {
  const Config& cfg = ctx.config;
  const GridDomain domain = exact_domain(cfg);
  const ToyTarget target = toy_target(domain);
  const Prior& prior = prior_for(cfg, domain, ctx.seed);
  const LogDensityFn ref = grid_log_density(prior.density);
  const Annotator ann = SingleAnnotator{PbdeSpec::unit(), grid_log_density(target.merged), "unit on p*"};

  // Gradient checks.
  {
    Stopwatch sw;
    const TrainingBatch batch = probe_batch(domain, ann, derive_seed(ctx.seed, "probe-batch"));
    const std::vector<std::pair<std::string, LossSpec>> losses = {
        {"bce", LossSpec{loss::Bce{PbdeSpec::unit()}}},
        {"bce-lennorm", LossSpec{loss::Bce{PbdeSpec::length_normalized()}}},
        {"slic", LossSpec{loss::SlicDirect{1.0, 0.5}}},
        {"rso", LossSpec{loss::RsoHinge{1.0, ref}}},
        {"ipo", LossSpec{loss::Ipo{0.5, ref}}},
        {"rrhf", LossSpec{loss::RrhfRank{true, 0.3}}},
    };
    const std::size_t probes = std::size_t(std::max(1LL, cfg.get_int("probes")));
    const double tol = cfg.get_real("grad_tol");
    double worst = 0.0;
    for (const std::string kind : {"tabular", "energy"}) {
      auto policy = make_head(kind, domain, derive_seed(ctx.seed, "probe-" + kind));
      for (const auto& [name, spec] : losses) {
        const double err = grad_check(spec, *policy, batch, probes, derive_seed(ctx.seed, name));
        ctx.summary.metrics["grad_err_" + name + "_" + kind] = err;
        ctx.summary.checks.push_back(make_check("grad check " + name + " on " + kind, err, "<=", tol));
        worst = std::max(worst, err);
      }
      std::vector<std::unique_ptr<Policy>> heads;
      heads.push_back(make_head(kind, domain, derive_seed(ctx.seed, "head0-" + kind)));
      heads.push_back(make_head(kind, domain, derive_seed(ctx.seed, "head1-" + kind)));
      MixturePolicy mix(std::move(heads), {0.3, -0.2});
      const double err = grad_check(LossSpec{loss::MixtureBce{}}, mix, batch, probes, derive_seed(ctx.seed, "mix"));
      ctx.summary.metrics["grad_err_mixture-bce_" + kind] = err;
      ctx.summary.checks.push_back(make_check("grad check mixture-bce on " + kind + " heads", err, "<=", tol));
      worst = std::max(worst, err);
    }
    ctx.summary.metrics["grad_err_worst"] = worst;
    ctx.timings.emplace_back("grad-check", sw.seconds());
  }

  // Sampled training sweeps from the energy prior.
  const PreferenceDataset data = gen_dataset(uniform_grid_proposal(domain, false), ann,
                                             std::size_t(cfg.get_int("pairs")), derive_seed(ctx.seed, "dataset"));
  const std::size_t batch = std::size_t(cfg.get_int("batch"));
  const double lr = cfg.get_real("lr");
  TrainRun proto;
  proto.steps = std::size_t(cfg.get_int("steps"));
  proto.batch_size = batch;
  TrainOptions opts;
  opts.reference = prior.density;
  write_density(ctx.out, "prior.csv", prior.density);
  write_density(ctx.out, "p_star.csv", target.merged);

  auto fit = [&](const LossSpec& spec, ItemSampler reg, const std::string& tag) {
    Stopwatch sw;
    EnergyPolicy policy(prior.net, EnergyPolicy::Mode::kGridNormalized, domain);
    DatasetSource source(data.triplets, batch, derive_seed(ctx.seed, "batches"), std::move(reg));
    TrainRun run = proto;
    train(policy, spec, source, AdamConfig{lr}, CosineSchedule{lr, run.steps}, run, opts);
    const LogDensity d = policy.grid_density();
    write_density(ctx.out, "learned_" + tag + ".csv", d);
    write_history(ctx.out, "history_" + tag + ".csv", run.history);
    ctx.timings.emplace_back(tag, sw.seconds());
    return total_variation(d, prior.density);
  };

  const auto taus = cfg.get_reals("ipo_tau");
  std::vector<double> ipo_tv;
  for (double tau : taus) {
    const double tv = fit(LossSpec{loss::Ipo{tau, ref}}, {}, "ipo_tau_" + fmt_key(tau));
    ctx.summary.metrics["tv_to_prior_ipo_tau_" + fmt_key(tau)] = tv;
    ipo_tv.push_back(tv);
  }
  bool decreasing = taus.size() >= 2;
  for (std::size_t k = 1; k < taus.size(); ++k)
    decreasing = decreasing && taus[k] > taus[k - 1] && ipo_tv[k] < ipo_tv[k - 1];
  ctx.summary.checks.push_back(
      make_check("IPO: TV to prior strictly decreasing in tau", decreasing ? 1.0 : 0.0, "==", 1.0));

  const double delta = cfg.get_real("slic_delta");
  const std::size_t draws = std::size_t(std::max(1LL, cfg.get_int("reg_draws")));
  std::vector<std::pair<double, double>> slic;
  for (double lambda : cfg.get_reals("slic_lambda")) {
    ItemSampler reg = lambda > 0.0 ? density_sampler(prior.density, draws) : ItemSampler{};
    const double tv = fit(LossSpec{loss::SlicDirect{delta, lambda}}, std::move(reg), "slic_lambda_" + fmt_key(lambda));
    ctx.summary.metrics["tv_to_prior_slic_lambda_" + fmt_key(lambda)] = tv;
    slic.emplace_back(lambda, tv);
  }
  const auto lo = std::min_element(slic.begin(), slic.end());
  const auto hi = std::max_element(slic.begin(), slic.end());
  if (slic.size() >= 2 && lo->first < hi->first)
    ctx.summary.checks.push_back(make_check("SLiC: TV to prior, largest lambda minus smallest lambda",
                                            hi->second - lo->second, "<", 0.0));
}

}  // namespace prefdens::expctl::detail
