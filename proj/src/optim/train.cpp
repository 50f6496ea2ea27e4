#include <cmath>

#include "prefdens/error.hpp"
#include "prefdens/io.hpp"
#include "prefdens/optim.hpp"

namespace prefdens {

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void train(Policy& policy, const LossSpec& loss, DataSource& data, const AdamConfig& adam,
           const CosineSchedule& schedule, TrainRun& run, const TrainOptions& options) {
  adam.validate();
  if (run.record_every == 0) throw ConfigError("record_every must be positive");
  std::vector<double> params = policy.params();
  AdamState state(params.size());
  run.history.clear();

  double initial = 0.0;
  std::size_t above = 0;
  auto snapshot = [&](std::size_t step, double value, double lr, double gnorm, const char* why) {
    TrainingSnapshot s;
    s.step = step;
    s.loss = value;
    s.initial_loss = initial;
    s.lr = lr;
    s.grad_norm = gnorm;
    s.param_norm = norm(params);
    s.reason = why;
    return s;
  };

  for (std::size_t t = 0; t < run.steps; ++t) {
    const LossResult r = evaluate(loss, policy, data.batch(t));
    const double lr = lr_at(schedule, t);
    if (!std::isfinite(r.loss)) throw TrainingAborted(snapshot(t, r.loss, lr, norm(r.grad), "non-finite loss"));
    if (!all_finite(r.grad)) throw TrainingAborted(snapshot(t, r.loss, lr, NAN, "non-finite gradient"));

    if (run.verbose || t % run.record_every == 0 || t + 1 == run.steps) {
      HistoryRow row{t, r.loss, std::nullopt, std::nullopt};
      if (options.reference) {
        const LogDensity d = policy.grid_density();
        row.tv = total_variation(d, *options.reference);
        row.kl = kl(*options.reference, d);
      }
      if (run.history.empty()) initial = r.loss;
      run.history.push_back(row);
      if (r.loss > 10.0 * std::abs(initial) && r.loss > initial) {
        if (++above >= options.divergence_records)
          throw TrainingAborted(snapshot(t, r.loss, lr, norm(r.grad), "loss above 10x its initial value"));
      } else {
        above = 0;
      }
    }

    adam_step(params, r.grad, state, adam, t + 1, lr);
    policy.set_params(params);
  }
}

std::string history_to_csv(const std::vector<HistoryRow>& history) {
  CsvWriter w({"step", "loss", "tv", "kl"});
  for (const auto& h : history)
    w.row({std::to_string(h.step), fmt_double(h.loss), h.tv ? fmt_double(*h.tv) : "",
           h.kl ? fmt_double(*h.kl) : ""});
  return w.str();
}

}  // namespace prefdens
