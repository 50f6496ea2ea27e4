#include "common.hpp"

#include <cmath>
#include <cstdio>

#include "prefdens/error.hpp"
#include "prefdens/io.hpp"

namespace prefdens::expctl::detail {

Schema toy_schema() {
  return {
      {"exact_grid_n", ParamType::kInt, "64", "grid points for exact-objective runs"},
      {"exact_steps", ParamType::kInt, "8192", "optimizer steps for exact-objective runs"},
      {"exact_lr", ParamType::kReal, "2.0", "Adam learning rate for exact tabular runs"},
      {"prior_mu", ParamType::kReal, "0.0", "location of the prior's truncated normal"},
      {"prior_sigma", ParamType::kReal, "5.0", "scale of the prior's truncated normal"},
      {"prior_steps", ParamType::kInt, "8192", "regression steps for the energy prior"},
  };
}

GridDomain exact_domain(const Config& cfg) {
  const long long n = cfg.get_int("exact_grid_n");
  if (n < 2) throw ConfigError("exact_grid_n must be >= 2");
  return GridDomain(-10.0, 10.0, std::size_t(n));
}

ToyTarget toy_target(const GridDomain& domain) {
  ToyTarget t;
  t.left = eval_truncated_normal({-2.5, 0.25, domain.lo, domain.hi}, domain);
  t.right = eval_truncated_normal({2.5, 1.0, domain.lo, domain.hi}, domain);
  t.merged = mix({{t.w_left, t.w_right}, {t.left, t.right}});
  return t;
}

const Prior& prior_for(const Config& cfg, const GridDomain& domain, std::uint64_t seed) {
  const long long steps = cfg.get_int("prior_steps");
  if (steps < 0) throw ConfigError("prior_steps must be >= 0");
  return pretrained_prior(domain, cfg.get_real("prior_mu"), cfg.get_real("prior_sigma"), derive_seed(seed, "prior"),
                          std::size_t(steps));
}

ExactRun train_exact(Policy& policy, const LossSpec& loss, const Annotator& annotator, const GridDomain& domain,
                     bool with_length, const Config& cfg, const std::optional<LogDensity>& reference) {
  Stopwatch sw;
  const auto items = grid_items(domain, with_length);
  const std::vector<double> mass(items.size(), 1.0 / double(items.size()));
  FullBatchSource source(exact_pair_batch(items, mass, annotator));
  const long long steps = cfg.get_int("exact_steps");
  if (steps < 0) throw ConfigError("exact_steps must be >= 0");
  const double lr = cfg.get_real("exact_lr");
  TrainRun run;
  run.steps = std::size_t(steps);
  TrainOptions opts;
  opts.reference = reference;
  train(policy, loss, source, AdamConfig{lr}, CosineSchedule{lr, std::size_t(steps)}, run, opts);
  return {std::move(run.history), sw.seconds()};
}

std::vector<double> annotator_heatmap(const Annotator& annotator, const GridDomain& domain) {
  const auto items = grid_items(domain, false);
  std::vector<double> out(domain.n * domain.n);
  for (std::size_t a = 0; a < domain.n; ++a)
    for (std::size_t b = 0; b < domain.n; ++b) out[a * domain.n + b] = annotator_pref_prob(annotator, items[a], items[b]);
  return out;
}

std::vector<double> model_heatmap(const Policy& policy, const GridDomain& domain) {
  const auto items = grid_items(domain, false);
  std::vector<double> out(domain.n * domain.n);
  if (const auto* mix = dynamic_cast<const MixturePolicy*>(&policy)) {
    const auto w = mix->weights();
    std::vector<std::vector<double>> s;
    for (std::size_t k = 0; k < mix->num_heads(); ++k) s.push_back(mix->head(k).scores(items));
    for (std::size_t a = 0; a < domain.n; ++a)
      for (std::size_t b = 0; b < domain.n; ++b) {
        double p = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) p += w[k] * sigmoid(s[k][a] - s[k][b]);
        out[a * domain.n + b] = p;
      }
    return out;
  }
  const auto s = policy.scores(items);
  for (std::size_t a = 0; a < domain.n; ++a)
    for (std::size_t b = 0; b < domain.n; ++b) out[a * domain.n + b] = sigmoid(s[a] - s[b]);
  return out;
}

double mean_squared_error(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw Error("mse: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / double(a.size());
}

double residual_std(const PbdeSpec& spec, const LogDensity& target, const LogDensity& model) {
  require_same_domain(target.domain, model.domain, "residual");
  const std::size_t n = target.domain.n;
  std::vector<double> r(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Item it = grid_item(target.domain, i, true);
    r[i] = omega_from(spec, target.log_p[i], it) - omega_from(spec, model.log_p[i], it);
    mean += r[i];
  }
  mean /= double(n);
  double var = 0.0;
  for (double v : r) var += (v - mean) * (v - mean);
  return std::sqrt(var / double(n));
}

void write_density(OutputDir& out, const std::string& rel, const LogDensity& d) { out.write(rel, density_to_csv(d)); }

void write_history(OutputDir& out, const std::string& rel, const std::vector<HistoryRow>& h) {
  out.write(rel, history_to_csv(h));
}

std::string fmt_key(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace prefdens::expctl::detail
