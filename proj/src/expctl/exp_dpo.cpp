#include "common.hpp"
#include "experiments.hpp"

namespace prefdens::expctl::detail {

Schema dpo_well_schema() {
  Schema s = toy_schema();
  s.insert(s.end(), {
                        {"shifted_beta", ParamType::kReal, "4.0", "beta of the shifted process"},
                        {"geometric_alpha", ParamType::kReal, "0.5", "alpha of the geometric process"},
                    });
  return s;
}

// Annotator and learner share one process; the learner should recover p*.
void dpo_well_body(RunContext& ctx) {
  const Config& cfg = ctx.config;
  const GridDomain domain = exact_domain(cfg);
  const ToyTarget target = toy_target(domain);
  const Prior& prior = prior_for(cfg, domain, ctx.seed);
  const LogDensityFn ref = grid_log_density(prior.density);
  struct Variant {
    std::string key;
    PbdeSpec spec;
    bool with_length;
  };
  const std::vector<Variant> variants = {
      {"unit", PbdeSpec::unit(), false},
      {"length-normalized", PbdeSpec::length_normalized(), true},
      {"shifted", PbdeSpec::shifted(cfg.get_real("shifted_beta"), ref), false},
      {"geometric", PbdeSpec::geometric(cfg.get_real("geometric_alpha"), ref), false},
  };
  write_density(ctx.out, "p_star.csv", target.merged);
  write_density(ctx.out, "prior.csv", prior.density);
  for (const auto& v : variants) {
    const Annotator ann = SingleAnnotator{v.spec, grid_log_density(target.merged), v.spec.name() + " on p*"};
    TabularPolicy policy = TabularPolicy::from_density(prior.density);
    const ExactRun r = train_exact(policy, LossSpec{loss::Bce{v.spec}}, ann, domain, v.with_length, cfg, target.merged);
    const LogDensity learned = policy.grid_density();
    const double tv = total_variation(learned, target.merged);
    const double resid = residual_std(v.spec, target.merged, learned);
    ctx.summary.metrics["tv_" + v.key] = tv;
    ctx.summary.metrics["residual_std_" + v.key] = resid;
    ctx.summary.checks.push_back(make_check(v.key + ": TV to p*", tv, "<=", 1e-3));
    write_density(ctx.out, "learned_" + v.key + ".csv", learned);
    write_history(ctx.out, "history_" + v.key + ".csv", r.history);
    ctx.timings.emplace_back(v.key, r.seconds);
  }
}

Schema poe_schema() {
  Schema s = toy_schema();
  s.push_back({"beta", ParamType::kRealList, "1,4,16", "betas of the shifted learner"});
  s.push_back({"tv_threshold", ParamType::kReal, "0.02", "pass bound on TV to the closed-form optimum"});
  return s;
}

// Luce annotator, shifted learner: converges to prior * p*^(1/beta).
void poe_body(RunContext& ctx) {
  const Config& cfg = ctx.config;
  const GridDomain domain = exact_domain(cfg);
  const ToyTarget target = toy_target(domain);
  const Prior& prior = prior_for(cfg, domain, ctx.seed);
  const Annotator ann = SingleAnnotator{PbdeSpec::unit(), grid_log_density(target.merged), "unit on p*"};
  write_density(ctx.out, "p_star.csv", target.merged);
  write_density(ctx.out, "prior.csv", prior.density);
  for (double beta : cfg.get_reals("beta")) {
    const PbdeSpec spec = PbdeSpec::shifted(beta, grid_log_density(prior.density));
    const LogDensity opt = theoretical_optimum(optimum::ProductOfExperts{beta}, prior.density, target.merged);
    TabularPolicy policy = TabularPolicy::from_density(prior.density);
    const ExactRun r = train_exact(policy, LossSpec{loss::Bce{spec}}, ann, domain, false, cfg, opt);
    const LogDensity learned = policy.grid_density();
    const double tv = total_variation(learned, opt);
    const std::string k = fmt_key(beta);
    ctx.summary.metrics["tv_to_optimum_beta_" + k] = tv;
    ctx.summary.metrics["tv_to_p_star_beta_" + k] = total_variation(learned, target.merged);
    ctx.summary.checks.push_back(make_check("beta=" + k + ": TV to product-of-experts optimum", tv, "<=",
                                            cfg.get_real("tv_threshold")));
    write_density(ctx.out, "learned_beta_" + k + ".csv", learned);
    write_density(ctx.out, "optimum_beta_" + k + ".csv", opt);
    write_history(ctx.out, "history_beta_" + k + ".csv", r.history);
    ctx.timings.emplace_back("beta=" + k, r.seconds);
  }
}

Schema geometric_schema() {
  Schema s = toy_schema();
  s.push_back({"alpha", ParamType::kRealList, "0.25,0.5,0.75", "alphas of the geometric learner"});
  s.push_back({"tv_threshold", ParamType::kReal, "0.02", "pass bound on TV to the closed-form optimum"});
  return s;
}

// Luce annotator, geometric learner: converges to prior^(1-alpha) * p*^alpha.
void geometric_body(RunContext& ctx) {
  const Config& cfg = ctx.config;
  const GridDomain domain = exact_domain(cfg);
  const ToyTarget target = toy_target(domain);
  const Prior& prior = prior_for(cfg, domain, ctx.seed);
  const Annotator ann = SingleAnnotator{PbdeSpec::unit(), grid_log_density(target.merged), "unit on p*"};
  write_density(ctx.out, "p_star.csv", target.merged);
  write_density(ctx.out, "prior.csv", prior.density);
  for (double alpha : cfg.get_reals("alpha")) {
    const PbdeSpec spec = PbdeSpec::geometric(alpha, grid_log_density(prior.density));
    const LogDensity opt = theoretical_optimum(optimum::GeometricMean{alpha}, prior.density, target.merged);
    TabularPolicy policy = TabularPolicy::from_density(prior.density);
    const ExactRun r = train_exact(policy, LossSpec{loss::Bce{spec}}, ann, domain, false, cfg, opt);
    const LogDensity learned = policy.grid_density();
    const double tv = total_variation(learned, opt);
    const std::string k = fmt_key(alpha);
    ctx.summary.metrics["tv_to_optimum_alpha_" + k] = tv;
    ctx.summary.checks.push_back(
        make_check("alpha=" + k + ": TV to geometric-mean optimum", tv, "<=", cfg.get_real("tv_threshold")));
    write_density(ctx.out, "learned_alpha_" + k + ".csv", learned);
    write_density(ctx.out, "optimum_alpha_" + k + ".csv", opt);
    write_history(ctx.out, "history_alpha_" + k + ".csv", r.history);
    ctx.timings.emplace_back("alpha=" + k, r.seconds);
  }
}

}  // namespace prefdens::expctl::detail
