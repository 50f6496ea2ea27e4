#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "prefdens/density.hpp"
#include "prefdens/rng.hpp"

namespace prefdens {

// Something an annotator can compare. On a grid, id is the grid index; for
// sequences it indexes a sequence pool. length == 0 means "no length".
struct Item {
  std::size_t id = 0;
  double x = 0.0;
  int length = 0;
};

using LogDensityFn = std::function<double(const Item&)>;

// Looks the item up by grid index.
LogDensityFn grid_log_density(LogDensity p);

// Fixed length assignment for grid points: 1 + floor(6 * (x - lo) / (hi - lo)),
// clipped to 1..6. Only used when a length-normalized process runs on a grid.
int grid_length(const GridDomain& domain, std::size_t i);
Item grid_item(const GridDomain& domain, std::size_t i, bool with_length);
std::vector<Item> grid_items(const GridDomain& domain, bool with_length);

namespace pbde {
struct Unit {};
struct LengthNormalized {};
struct Shifted {
  double beta = 1.0;
  LogDensityFn reference;
};
struct Geometric {
  double alpha = 1.0;
  LogDensityFn reference;
};
}  // namespace pbde

// Omega(x) = f(x) * log p(x) + g(x).
struct PbdeSpec {
  std::variant<pbde::Unit, pbde::LengthNormalized, pbde::Shifted, pbde::Geometric> kind;

  static PbdeSpec unit() { return {pbde::Unit{}}; }
  static PbdeSpec length_normalized() { return {pbde::LengthNormalized{}}; }
  static PbdeSpec shifted(double beta, LogDensityFn reference);
  static PbdeSpec geometric(double alpha, LogDensityFn reference);

  std::string name() const;
};

struct Coeffs {
  double f = 1.0;
  double g = 0.0;
};

Coeffs coefficients(const PbdeSpec& spec, const Item& x);
double omega_from(const PbdeSpec& spec, double log_p, const Item& x);
double omega(const PbdeSpec& spec, const LogDensityFn& log_p, const Item& x);

double sigmoid(double t);
double log_sigmoid(double t);

double pref_prob(const PbdeSpec& spec, const LogDensityFn& log_p, const Item& a, const Item& b);

struct SingleAnnotator {
  PbdeSpec pbde;
  LogDensityFn implicit;
  std::string desc = "single";
};

struct MixtureAnnotator {
  std::vector<double> weights;
  std::vector<SingleAnnotator> members;
};

using Annotator = std::variant<SingleAnnotator, MixtureAnnotator>;

double annotator_pref_prob(const Annotator& a, const Item& x_a, const Item& x_b);
std::string describe(const Annotator& a);

struct PreferenceTriplet {
  Item a;
  Item b;
  int y = 0;  // 1 iff a is preferred
};

struct PreferenceDataset {
  std::vector<PreferenceTriplet> triplets;
  std::string annotator_desc;
  std::string proposal_desc;
  std::uint64_t seed = 0;
};

struct PairProposal {
  std::function<std::pair<Item, Item>(Rng&)> draw;
  std::string desc;
};

PairProposal uniform_grid_proposal(const GridDomain& domain, bool with_length);

// Pair draws and label draws come from separate named streams of `seed`,
// each consumed in pair order.
PreferenceDataset gen_dataset(const PairProposal& proposal, const Annotator& annotator,
                              std::size_t n, std::uint64_t seed);

std::string dataset_to_csv(const PreferenceDataset& d);
std::string dataset_sidecar_json(const PreferenceDataset& d);

}  // namespace prefdens
