#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefdens/losses.hpp"
#include "prefdens/policy.hpp"

namespace prefdens {

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// Bias-corrected Adam. step_index counts from 1; lr overrides config.lr so a
// schedule can drive it.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config, std::size_t step_index, double lr);

struct CosineSchedule {
  double base_lr = 5e-4;
  std::size_t total_steps = 8192;
};

// base_lr * (1 + cos(pi * t / T)) / 2, and 0 past T.
double lr_at(const CosineSchedule& schedule, std::size_t step);

// Supplies the batch for each optimization step.
class DataSource {
 public:
  virtual ~DataSource() = default;
  virtual const TrainingBatch& batch(std::size_t step) = 0;
};

class FullBatchSource final : public DataSource {
 public:
  explicit FullBatchSource(TrainingBatch batch) : batch_(std::move(batch)) {}
  const TrainingBatch& batch(std::size_t) override { return batch_; }

 private:
  TrainingBatch batch_;
};

// Draws regularization items; called once per epoch.
using ItemSampler = std::function<std::vector<Item>(Rng&)>;

// Shuffled minibatches over a dataset; reshuffles at every epoch boundary.
// With a regularization sampler, each epoch draws fresh items that are
// attached, uniformly weighted, to every minibatch of that epoch.
class DatasetSource final : public DataSource {
 public:
  DatasetSource(std::vector<PreferenceTriplet> triplets, std::size_t batch_size, std::uint64_t seed,
                ItemSampler reg_sampler = {});
  const TrainingBatch& batch(std::size_t step) override;

 private:
  void new_epoch();

  std::vector<PreferenceTriplet> triplets_;
  std::size_t batch_size_;
  Rng rng_;
  ItemSampler reg_sampler_;
  std::vector<Item> reg_items_;
  std::size_t cursor_ = 0;
  bool started_ = false;
  TrainingBatch current_;
};

struct HistoryRow {
  std::size_t step = 0;
  double loss = 0.0;
  std::optional<double> tv;
  std::optional<double> kl;
};

struct TrainRun {
  std::size_t steps = 8192;
  std::uint64_t seed = 0;
  std::size_t batch_size = 0;  // 0 = full batch; informational for the history
  std::size_t record_every = 64;
  bool verbose = false;  // record every step
  std::vector<HistoryRow> history;
};

struct TrainOptions {
  // When set, TV and KL from the policy's grid density to this reference are recorded.
  std::optional<LogDensity> reference;
  // Divergence guard: abort after this many consecutive records above 10x the initial loss.
  std::size_t divergence_records = 256;
};

// Runs run.steps Adam updates and fills run.history. Throws TrainingAborted
// on a non-finite loss or gradient, or when the divergence guard trips.
void train(Policy& policy, const LossSpec& loss, DataSource& data, const AdamConfig& adam,
           const CosineSchedule& schedule, TrainRun& run, const TrainOptions& options = {});

std::string history_to_csv(const std::vector<HistoryRow>& history);

using LossFn = std::function<LossResult(std::span<const double>)>;

// Central differences (h = 1e-5) on probe_count randomly chosen coordinates.
// Relative error uses max(|analytic|, |numeric|, 1e-8) as denominator.
double grad_check(const LossFn& fn, std::vector<double> params, std::size_t probe_count, std::uint64_t seed);
double grad_check(const LossSpec& spec, Policy& policy, const TrainingBatch& batch, std::size_t probe_count,
                  std::uint64_t seed = 1);

}  // namespace prefdens
