#include "common.hpp"
#include "experiments.hpp"

#include <algorithm>
#include <cmath>

namespace prefdens::expctl::detail {
namespace {

// Two annotators, each following the Luce rule on one component.
Annotator component_annotators(const ToyTarget& t) {
  return MixtureAnnotator{{t.w_left, t.w_right},
                          {SingleAnnotator{PbdeSpec::unit(), grid_log_density(t.left), "unit on left component"},
                           SingleAnnotator{PbdeSpec::unit(), grid_log_density(t.right), "unit on right component"}}};
}

std::size_t argmax(const std::vector<double>& v) {
  return std::size_t(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

Schema misspec_schema() { return toy_schema(); }

// Single-head learners under the merged-density annotator and under the
// two-annotator process.
void misspec_body(RunContext& ctx) {
  const Config& cfg = ctx.config;
  const GridDomain domain = exact_domain(cfg);
  const ToyTarget target = toy_target(domain);
  const Annotator dens = SingleAnnotator{PbdeSpec::unit(), grid_log_density(target.merged), "unit on merged p*"};
  const Annotator mixed = component_annotators(target);
  const LossSpec bce{loss::Bce{PbdeSpec::unit()}};

  TabularPolicy on_dens(domain, std::vector<double>(domain.n, 0.0));
  const ExactRun r1 = train_exact(on_dens, bce, dens, domain, false, cfg, target.merged);
  TabularPolicy on_mixed(domain, std::vector<double>(domain.n, 0.0));
  const ExactRun r2 = train_exact(on_mixed, bce, mixed, domain, false, cfg, target.merged);

  const auto h_dens = annotator_heatmap(dens, domain);
  const auto h_mixed = annotator_heatmap(mixed, domain);
  const auto m_dens = model_heatmap(on_dens, domain);
  const auto m_mixed = model_heatmap(on_mixed, domain);
  ctx.out.write("heatmap_density_annotator.csv", heatmap_csv(domain, h_dens, m_dens));
  ctx.out.write("heatmap_annotator_mixture.csv", heatmap_csv(domain, h_mixed, m_mixed));

  double max_gap = 0.0;
  for (std::size_t i = 0; i < h_dens.size(); ++i) max_gap = std::max(max_gap, std::abs(h_dens[i] - h_mixed[i]));
  const double tv_dens = total_variation(on_dens.grid_density(), target.merged);
  const double tv_mixed = total_variation(on_mixed.grid_density(), target.merged);
  ctx.summary.metrics["max_heatmap_gap_true"] = max_gap;
  ctx.summary.metrics["tv_single_head_density_annotator"] = tv_dens;
  ctx.summary.metrics["tv_single_head_annotator_mixture"] = tv_mixed;
  ctx.summary.metrics["mse_single_head_density_annotator"] = mean_squared_error(h_dens, m_dens);
  ctx.summary.metrics["mse_single_head_annotator_mixture"] = mean_squared_error(h_mixed, m_mixed);
  ctx.summary.checks.push_back(make_check("single head under annotator mixture: TV to merged p*", tv_mixed, ">=", 0.2));

  write_density(ctx.out, "p_star.csv", target.merged);
  write_density(ctx.out, "single_head_density_annotator.csv", on_dens.grid_density());
  write_density(ctx.out, "single_head_annotator_mixture.csv", on_mixed.grid_density());
  write_history(ctx.out, "history_density_annotator.csv", r1.history);
  write_history(ctx.out, "history_annotator_mixture.csv", r2.history);
  ctx.timings.emplace_back("density-annotator", r1.seconds);
  ctx.timings.emplace_back("annotator-mixture", r2.seconds);
}

Schema mixturefix_schema() {
  Schema s = toy_schema();
  s.push_back({"head_noise", ParamType::kReal, "1e-4", "std of the Gaussian noise added to each head's logits"});
  return s;
}

// Two heads initialized from the prior, split apart by tiny noise.
void mixturefix_body(RunContext& ctx) {
  const Config& cfg = ctx.config;
  const GridDomain domain = exact_domain(cfg);
  const ToyTarget target = toy_target(domain);
  const Prior& prior = prior_for(cfg, domain, ctx.seed);
  const Annotator mixed = component_annotators(target);
  const auto h_true = annotator_heatmap(mixed, domain);

  TabularPolicy single = TabularPolicy::from_density(prior.density);
  const ExactRun r1 = train_exact(single, LossSpec{loss::Bce{PbdeSpec::unit()}}, mixed, domain, false, cfg, target.merged);

  Rng rng = Rng::stream(ctx.seed, "head-noise");
  const double noise = cfg.get_real("head_noise");
  std::vector<std::unique_ptr<Policy>> heads;
  for (int k = 0; k < 2; ++k) {
    TabularPolicy h = TabularPolicy::from_density(prior.density);
    std::vector<double> p = h.params();
    for (double& v : p) v += noise * rng.normal();
    h.set_params(p);
    heads.push_back(std::make_unique<TabularPolicy>(std::move(h)));
  }
  MixturePolicy two(std::move(heads), {0.0, 0.0});
  const ExactRun r2 = train_exact(two, LossSpec{loss::MixtureBce{}}, mixed, domain, false, cfg, target.merged);

  const auto m_single = model_heatmap(single, domain);
  const auto m_two = model_heatmap(two, domain);
  const double mse_single = mean_squared_error(h_true, m_single);
  const double mse_two = mean_squared_error(h_true, m_two);
  const double ratio = mse_two > 0.0 ? mse_single / mse_two : HUGE_VAL;
  const LogDensity d_two = two.grid_density();
  const double tv_two = total_variation(d_two, target.merged);
  const LogDensity h0 = two.head(0).grid_density();
  const LogDensity h1 = two.head(1).grid_density();
  const std::size_t a0 = argmax(h0.log_p), a1 = argmax(h1.log_p);
  const double sep = std::abs(double(a0) - double(a1));
  const auto w = two.weights();

  ctx.summary.metrics["mse_single_head"] = mse_single;
  ctx.summary.metrics["mse_two_head"] = mse_two;
  ctx.summary.metrics["mse_ratio"] = ratio;
  ctx.summary.metrics["tv_two_head"] = tv_two;
  ctx.summary.metrics["tv_single_head"] = total_variation(single.grid_density(), target.merged);
  ctx.summary.metrics["head_mode_x"] = {domain.x(a0), domain.x(a1)};
  ctx.summary.metrics["head_mode_separation_grid"] = sep;
  ctx.summary.metrics["head_weights"] = w;
  ctx.summary.checks.push_back(make_check("heatmap MSE single head / two head", ratio, ">=", 2.0));
  ctx.summary.checks.push_back(make_check("two-head mixture density: TV to merged p*", tv_two, "<=", 0.05));
  ctx.summary.checks.push_back(make_check("per-head mode separation (grid points)", sep, ">=", 3.0));

  ctx.out.write("heatmap_single_head.csv", heatmap_csv(domain, h_true, m_single));
  ctx.out.write("heatmap_two_head.csv", heatmap_csv(domain, h_true, m_two));
  write_density(ctx.out, "p_star.csv", target.merged);
  write_density(ctx.out, "single_head.csv", single.grid_density());
  write_density(ctx.out, "two_head_mixture.csv", d_two);
  write_density(ctx.out, "head_0.csv", h0);
  write_density(ctx.out, "head_1.csv", h1);
  write_history(ctx.out, "history_single_head.csv", r1.history);
  write_history(ctx.out, "history_two_head.csv", r2.history);
  ctx.timings.emplace_back("single-head", r1.seconds);
  ctx.timings.emplace_back("two-head", r2.seconds);
}

}  // namespace prefdens::expctl::detail
