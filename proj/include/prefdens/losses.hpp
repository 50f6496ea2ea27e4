#pragma once

#include <string>
#include <variant>
#include <vector>

#include "prefdens/pbde.hpp"
#include "prefdens/policy.hpp"

namespace prefdens {

// One comparison between points[a] and points[b]. label is P(a preferred):
// 0/1 for sampled data, the annotator probability for exact objectives.
struct PairTerm {
  std::size_t a = 0;
  std::size_t b = 0;
  double label = 1.0;
  double weight = 1.0;
};

// Indices into points, best first.
struct RankedList {
  std::vector<std::size_t> order;
};

struct WeightedPoint {
  std::size_t index = 0;
  double weight = 1.0;
};

// Everything one loss evaluation needs. Points are deduplicated so each
// item is scored once per step.
struct TrainingBatch {
  std::vector<Item> points;
  std::vector<PairTerm> pairs;
  std::vector<RankedList> lists;
  std::vector<WeightedPoint> reg;  // samples for SLiC regularization, weights sum to 1
};

namespace loss {
struct Bce {
  PbdeSpec pbde;
};
struct SlicDirect {
  double delta = 0.0;
  double lambda = 0.0;
};
struct RsoHinge {
  double delta = 0.0;
  LogDensityFn reference;
};
struct Ipo {
  double tau = 1.0;
  LogDensityFn reference;
};
struct RrhfRank {
  bool length_normalized = false;
  double nll_coeff = 0.0;
};
struct MixtureBce {};
}  // namespace loss

struct LossSpec {
  std::variant<loss::Bce, loss::SlicDirect, loss::RsoHinge, loss::Ipo, loss::RrhfRank, loss::MixtureBce> kind;
  std::string name() const;
};

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;
};

LossResult evaluate(const LossSpec& spec, const Policy& policy, const TrainingBatch& batch);

// Named entry points; each is evaluate() with the corresponding spec.
LossResult bce_pref_loss(const Policy& policy, const PbdeSpec& pbde, const TrainingBatch& batch);
LossResult slic_direct_loss(const Policy& policy, const TrainingBatch& batch, double delta, double lambda);
LossResult rso_normalized_loss(const Policy& policy, const LogDensityFn& reference, const TrainingBatch& batch,
                               double delta);
LossResult ipo_loss(const Policy& policy, const LogDensityFn& reference, const TrainingBatch& batch, double tau);
LossResult rrhf_loss(const Policy& policy, const TrainingBatch& batch, bool length_normalized, double nll_coeff);
LossResult mixture_bce_loss(const MixturePolicy& policy, const TrainingBatch& batch);

// Batch from a dataset slice; identical items share one point.
TrainingBatch batch_from_triplets(std::span<const PreferenceTriplet> triplets);

// The population objective: every ordered pair of grid items, weighted by
// the proposal mass q(a) q(b), labelled with the annotator's probability.
TrainingBatch exact_pair_batch(const std::vector<Item>& items, const std::vector<double>& proposal_mass,
                               const Annotator& annotator);

// Expected annotator entropy under the exact batch's weights; the minimum
// of the exact BCE objective when the model matches the annotator.
double expected_label_entropy(const TrainingBatch& batch);

LossResult exact_pref_loss(const Policy& policy, const PbdeSpec& pbde, const TrainingBatch& exact_batch);

}  // namespace prefdens
