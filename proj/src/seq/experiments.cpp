#include <cmath>

#include "prefdens/error.hpp"
#include "prefdens/seq.hpp"

namespace prefdens::seq {

const char* mixture_kind_name(MixtureKind k) {
  return k == MixtureKind::kAnnotatorMixture ? "annotator-mixture" : "density-mixture";
}

namespace {

LogDensityFn pool_log_prob(const ArTable& model, std::shared_ptr<const std::vector<Sequence>> pool) {
  return [model, pool](const Item& it) { return model.log_prob((*pool).at(it.id)); };
}

}  // namespace

Annotator seq_annotator(MixtureKind kind, const ArTable& short_model, const ArTable& long_model,
                        std::shared_ptr<const std::vector<Sequence>> pool) {
  const PbdeSpec ln = PbdeSpec::length_normalized();
  const LogDensityFn ls = pool_log_prob(short_model, pool);
  const LogDensityFn ll = pool_log_prob(long_model, pool);
  if (kind == MixtureKind::kAnnotatorMixture) {
    return MixtureAnnotator{{0.5, 0.5}, {SingleAnnotator{ln, ls, "short"}, SingleAnnotator{ln, ll, "long"}}};
  }
  const LogDensityFn lmix = [ls, ll](const Item& it) {
    const double a = ls(it), b = ll(it);
    const double m = std::max(a, b);
    return m + std::log(0.5 * std::exp(a - m) + 0.5 * std::exp(b - m));
  };
  return SingleAnnotator{ln, lmix, "mix(short,long)"};
}

SeqPreferenceData build_pref_dataset(MixtureKind kind, const ArTable& short_model, const ArTable& long_model,
                                     const ArTable& whole, std::size_t n, std::uint64_t seed) {
  SeqPreferenceData out;
  out.pool = std::make_shared<std::vector<Sequence>>();
  out.pool->reserve(2 * n);
  PairProposal proposal;
  proposal.desc = "pairs sampled from the whole model";
  proposal.draw = [pool = out.pool, &whole](Rng& rng) {
    pool->push_back(whole.sample(rng));
    pool->push_back(whole.sample(rng));
    const std::size_t b = pool->size() - 1;
    return std::make_pair(pool_item(*pool, b - 1), pool_item(*pool, b));
  };
  const Annotator ann = seq_annotator(kind, short_model, long_model, out.pool);
  out.dataset = gen_dataset(proposal, ann, n, seed);
  out.dataset.annotator_desc = std::string(mixture_kind_name(kind)) + ": " + out.dataset.annotator_desc;
  return out;
}

AdaptResult adapt_on_preferences(const ArTable& whole, const SeqPreferenceData& data, const AdaptConfig& config,
                                 std::uint64_t seed) {
  if (data.dataset.triplets.empty()) throw ConfigError("adaptation needs a nonempty dataset");
  AdaptResult res{whole, {}};
  if (config.steps == 0) return res;
  ArPolicy policy(whole, data.pool);
  DatasetSource source(data.dataset.triplets, config.batch_size, seed);
  TrainRun run;
  run.steps = config.steps;
  run.seed = seed;
  run.batch_size = config.batch_size;
  train(policy, LossSpec{loss::Bce{PbdeSpec::length_normalized()}}, source, config.adam,
        CosineSchedule{config.adam.lr, config.steps}, run);
  res.model = policy.table();
  res.history = std::move(run.history);
  return res;
}

}  // namespace prefdens::seq
