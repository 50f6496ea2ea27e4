#include <json.hpp>

#include "prefdens/error.hpp"
#include "prefdens/io.hpp"
#include "prefdens/pbde.hpp"

namespace prefdens {

PairProposal uniform_grid_proposal(const GridDomain& domain, bool with_length) {
  PairProposal p;
  p.desc = "uniform pairs on " + domain.describe();
  p.draw = [domain, with_length](Rng& rng) {
    const GridPair g = uniform_pair(domain, rng);
    return std::make_pair(grid_item(domain, g.a, with_length), grid_item(domain, g.b, with_length));
  };
  return p;
}

PreferenceDataset gen_dataset(const PairProposal& proposal, const Annotator& annotator,
                              std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("gen_dataset needs n >= 1");
  Rng pair_rng = Rng::stream(seed, "pairs");
  Rng label_rng = Rng::stream(seed, "labels");
  PreferenceDataset d;
  d.annotator_desc = describe(annotator);
  d.proposal_desc = proposal.desc;
  d.seed = seed;
  d.triplets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [a, b] = proposal.draw(pair_rng);
    const double p = annotator_pref_prob(annotator, a, b);
    d.triplets.push_back({a, b, label_rng.bernoulli(p) ? 1 : 0});
  }
  return d;
}

std::string dataset_to_csv(const PreferenceDataset& d) {
  CsvWriter w({"x_a", "len_a", "x_b", "len_b", "y"});
  for (const auto& t : d.triplets)
    w.row({fmt_double(t.a.x), std::to_string(t.a.length), fmt_double(t.b.x), std::to_string(t.b.length),
           std::to_string(t.y)});
  return w.str();
}

std::string dataset_sidecar_json(const PreferenceDataset& d) {
  nlohmann::ordered_json j;
  j["schema"] = "prefdens.dataset/1";
  j["annotator"] = d.annotator_desc;
  j["proposal"] = d.proposal_desc;
  j["seed"] = d.seed;
  j["size"] = d.triplets.size();
  return j.dump(2) + "\n";
}

}  // namespace prefdens
