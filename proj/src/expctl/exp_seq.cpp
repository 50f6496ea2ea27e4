#include "common.hpp"
#include "experiments.hpp"

#include "prefdens/error.hpp"
#include "prefdens/seq.hpp"

namespace prefdens::expctl::detail {
namespace {

struct SeqModels {
  seq::ArTable whole;
  seq::ArTable short_model;
  seq::ArTable long_model;
};

seq::TokenLaw token_law(const Config& cfg) {
  seq::TokenLaw law;
  law.positions = int(cfg.get_int("positions"));
  law.variants = int(cfg.get_int("variants"));
  law.drift_width = cfg.get_real("drift_width");
  law.floor = cfg.get_real("token_floor");
  return law;
}

SeqModels fit_models(const Config& cfg, std::uint64_t seed) {
  const seq::TokenLaw law = token_law(cfg);
  const seq::TokenSpace space{law.vocab_size(), int(cfg.get_int("max_len"))};
  space.validate();
  const auto corpus = seq::synth_corpus(space, law, seq::skewed_length_law(space.max_len, cfg.get_real("length_scale")),
                                        std::size_t(cfg.get_int("corpus")), derive_seed(seed, "corpus"));
  const double sm = cfg.get_real("smoothing");
  return {seq::fit_ar_table(corpus, space, seq::LengthBand::whole_band(), sm),
          seq::fit_ar_table(corpus, space, seq::LengthBand::short_band(), sm),
          seq::fit_ar_table(corpus, space, seq::LengthBand::long_band(), sm)};
}

nlohmann::ordered_json table_json(const seq::OutcomeTable& t) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const std::string k = std::string(seq::bin_name(r)) + "_vs_" + seq::bin_name(c);
      j[k] = {{"unit", t.prob[r][c][0]}, {"lennorm", t.prob[r][c][1]}};
    }
  return j;
}

}  // namespace

Schema seq_schema() {
  return {
      {"positions", ParamType::kInt, "4", "token position classes"},
      {"variants", ParamType::kInt, "8", "token variants per position class"},
      {"drift_width", ParamType::kReal, "2.0", "width of the length-dependent variant bump"},
      {"token_floor", ParamType::kReal, "0.05", "uniform floor mixed into the variant law"},
      {"max_len", ParamType::kInt, "12", "maximum sequence length"},
      {"length_scale", ParamType::kReal, "3.0", "scale of the corpus length law l*exp(-l/scale)"},
      {"corpus", ParamType::kInt, "20000", "synthetic corpus size"},
      {"smoothing", ParamType::kReal, "0.1", "additive smoothing of bigram counts"},
      {"eval", ParamType::kInt, "1500", "evaluation sequences for outcome tables"},
      {"pairs", ParamType::kInt, "32768", "preference pairs for adaptation"},
      {"steps", ParamType::kInt, "30000", "adaptation steps"},
      {"batch", ParamType::kInt, "512", "adaptation minibatch size"},
      {"lr", ParamType::kReal, "0.03", "adaptation learning rate (cosine decay to 0)"},
      {"samples", ParamType::kInt, "131072", "samples drawn for length histograms"},
  };
}

void seq_bias_body(RunContext& ctx) {
  const Config& cfg = ctx.config;
  Stopwatch sw;
  const SeqModels m = fit_models(cfg, ctx.seed);
  Rng er = Rng::stream(ctx.seed, "eval");
  std::vector<seq::Sequence> eval;
  for (long long i = 0; i < cfg.get_int("eval"); ++i) eval.push_back(m.whole.sample(er));
  const struct {
    const char* name;
    const seq::ArTable* model;
  } annotators[] = {{"whole", &m.whole}, {"short", &m.short_model}, {"long", &m.long_model}};
  for (const auto& a : annotators) {
    const seq::OutcomeTable t = seq::outcome_table(*a.model, eval);
    ctx.out.write(std::string("outcomes_") + a.name + ".csv", t.to_csv());
    ctx.summary.metrics[std::string("outcomes_") + a.name] = table_json(t);
  }
  const seq::OutcomeTable ts = seq::outcome_table(m.short_model, eval);
  const seq::OutcomeTable tl = seq::outcome_table(m.long_model, eval);
  using seq::LengthBin;
  ctx.summary.checks.push_back(
      make_check("long-band annotator, unit: P(S beats L)", tl.unit(LengthBin::S, LengthBin::L), ">=", 0.9));
  ctx.summary.checks.push_back(make_check("long-band annotator, length-normalized: P(S beats L)",
                                          tl.lennorm(LengthBin::S, LengthBin::L), "<=", 0.5));
  ctx.summary.checks.push_back(
      make_check("short-band annotator, unit: P(S beats L)", ts.unit(LengthBin::S, LengthBin::L), ">=", 0.9));
  ctx.summary.checks.push_back(make_check("short-band annotator, length-normalized: P(S beats L)",
                                          ts.lennorm(LengthBin::S, LengthBin::L), ">=", 0.9));
  ctx.out.write("eval_lengths.csv", seq::length_histogram(eval, m.whole.space().max_len).to_csv());
  ctx.timings.emplace_back("tables", sw.seconds());
}

void seq_misspec_body(RunContext& ctx) {
  const Config& cfg = ctx.config;
  Stopwatch total;
  const SeqModels m = fit_models(cfg, ctx.seed);
  const int max_len = m.whole.space().max_len;
  const std::size_t samples = std::size_t(cfg.get_int("samples"));
  if (samples < 1) throw ConfigError("samples must be >= 1");
  seq::AdaptConfig ac;
  ac.steps = std::size_t(cfg.get_int("steps"));
  ac.batch_size = std::size_t(cfg.get_int("batch"));
  ac.adam.lr = cfg.get_real("lr");

  auto histogram = [&](const seq::ArTable& model, const char* stream) {
    Rng rng = Rng::stream(ctx.seed, stream);
    std::vector<seq::Sequence> s;
    s.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) s.push_back(model.sample(rng));
    return seq::length_histogram(s, max_len);
  };
  ctx.out.write("lengths_whole.csv", histogram(m.whole, "hist-whole").to_csv());
  ctx.summary.metrics["exact_lengths_whole"] = m.whole.length_distribution();

  double middle[2] = {};
  bool bimodal_density = false;
  for (int k = 0; k < 2; ++k) {
    Stopwatch sw;
    const auto kind = k == 0 ? seq::MixtureKind::kAnnotatorMixture : seq::MixtureKind::kDensityMixture;
    const std::string name = seq::mixture_kind_name(kind);
    const auto data = seq::build_pref_dataset(kind, m.short_model, m.long_model, m.whole,
                                              std::size_t(cfg.get_int("pairs")), derive_seed(ctx.seed, "pairs"));
    const auto r = seq::adapt_on_preferences(m.whole, data, ac, derive_seed(ctx.seed, "adapt"));
    const seq::LengthHistogram h = histogram(r.model, k == 0 ? "hist-annotator" : "hist-density");
    const auto f = h.fractions();
    const auto bm = seq::band_masses(f);
    middle[k] = bm[1];
    ctx.out.write("lengths_" + name + ".csv", h.to_csv());
    write_history(ctx.out, "history_" + name + ".csv", r.history);
    ctx.summary.metrics["middle_mass_" + name] = bm[1];
    ctx.summary.metrics["band_masses_" + name] = bm;
    ctx.summary.metrics["exact_lengths_" + name] = r.model.length_distribution();
    if (k == 1) bimodal_density = seq::is_bimodal(f);
    ctx.timings.emplace_back(name, sw.seconds());
  }
  const double ratio = middle[1] > 0.0 ? middle[0] / middle[1] : HUGE_VAL;
  ctx.summary.metrics["middle_mass_ratio"] = ratio;
  ctx.summary.checks.push_back(make_check("middle-band mass, annotator mixture / density mixture", ratio, ">=", 2.0));
  ctx.summary.checks.push_back(
      make_check("density-mixture length histogram is bimodal", bimodal_density ? 1.0 : 0.0, "==", 1.0));
  ctx.timings.emplace_back("total", total.seconds());
}

}  // namespace prefdens::expctl::detail
