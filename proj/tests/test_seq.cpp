#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>

#include "oracle.hpp"
#include "prefdens/error.hpp"
#include "prefdens/io.hpp"
#include "prefdens/seq.hpp"

using namespace prefdens;
using namespace prefdens::seq;

namespace {

// Random normalized tables on a tiny space.
ArTable random_table(const TokenSpace& sp, std::uint64_t seed) {
  Rng r(seed);
  auto row = [&](std::size_t n) {
    std::vector<double> v(n);
    double z = 0.0;
    for (double& x : v) z += x = 0.1 + r.uniform();
    for (double& x : v) x = std::log(x / z);
    return v;
  };
  std::vector<double> start = row(sp.vocab_size), trans;
  for (int a = 0; a < sp.vocab_size; ++a) {
    const auto t = row(sp.vocab_size + 1);
    trans.insert(trans.end(), t.begin(), t.end());
  }
  return ArTable(sp, start, trans);
}

// Every sequence of length 1..max_len.
std::vector<Sequence> enumerate(const TokenSpace& sp) {
  std::vector<Sequence> out;
  std::function<void(Sequence&)> rec = [&](Sequence& s) {
    if (!s.empty()) out.push_back(s);
    if (int(s.size()) == sp.max_len) return;
    for (int t = 0; t < sp.vocab_size; ++t) {
      s.push_back(t);
      rec(s);
      s.pop_back();
    }
  };
  Sequence s;
  rec(s);
  return out;
}

}  // namespace

TEST_CASE("bigram table is a distribution over sequences") {
  const TokenSpace sp{3, 4};
  const ArTable m = random_table(sp, 1);
  const auto all = enumerate(sp);
  double total = 0.0, ent = 0.0;
  std::vector<double> bylen(4, 0.0);
  for (const auto& s : all) {
    const double p = std::exp(m.log_prob(s));
    total += p;
    ent -= p * std::log(p);
    bylen[s.size() - 1] += p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.entropy() == doctest::Approx(ent).epsilon(1e-12));
  const auto ld = m.length_distribution();
  for (int l = 0; l < 4; ++l) CHECK(ld[l] == doctest::Approx(bylen[l]).epsilon(1e-12));
  CHECK(m.max_normalization_error() < 1e-12);
  CHECK_THROWS(m.log_prob({0, 5}));
}

TEST_CASE("sampling matches exact sequence probabilities") {
  const TokenSpace sp{2, 3};
  const ArTable m = random_table(sp, 2);
  Rng r(3);
  std::map<Sequence, int> counts;
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++counts[m.sample(r)];
  for (const auto& s : enumerate(sp)) {
    const double p = std::exp(m.log_prob(s));
    CHECK(std::abs(counts[s] / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n) + 1e-4);
  }
  CHECK(sample_seq(m, 9) == sample_seq(m, 9));
}

TEST_CASE("table constructor rejects unnormalized rows") {
  const TokenSpace sp{2, 3};
  std::vector<double> start = {std::log(0.5), std::log(0.6)};
  std::vector<double> trans(6, std::log(1.0 / 3.0));
  CHECK_THROWS_AS(ArTable(sp, start, trans), Error);
}

TEST_CASE("fitting counts starts, transitions and ends") {
  const TokenSpace sp{2, 3};
  const std::vector<Sequence> corpus = {{0}, {0, 1}, {1, 1, 1}, {0, 1, 0}};
  const ArTable m = fit_ar_table(corpus, sp, LengthBand{"all", 1, 3}, 0.0);
  CHECK(std::exp(m.log_start(0)) == doctest::Approx(0.75));
  // From 0: end once, 1 twice; a token at the length cap adds no end event.
  CHECK(std::exp(m.log_trans(0, 1)) == doctest::Approx(2.0 / 3.0));
  CHECK(std::exp(m.log_trans(0, 2)) == doctest::Approx(1.0 / 3.0));
  CHECK(std::exp(m.log_trans(1, 1)) == doctest::Approx(0.5));
  CHECK(std::exp(m.log_trans(1, 0)) == doctest::Approx(0.25));
  CHECK(m.log_trans(0, 0) == kLogFloor);
  const ArTable sm = fit_ar_table(corpus, sp, LengthBand{"all", 1, 3}, 1.0);
  CHECK(std::exp(sm.log_start(0)) == doctest::Approx(4.0 / 6.0));
  CHECK(std::exp(sm.log_trans(0, 0)) == doctest::Approx(1.0 / 6.0));
  CHECK_THROWS_AS(fit_ar_table(corpus, sp, LengthBand{"none", 5, 6}, 0.0), ConfigError);
}

TEST_CASE("length laws and the synthetic corpus") {
  const auto u = uniform_length_law(12);
  CHECK(u[5] == doctest::Approx(1.0 / 12));
  const auto pt = point_length_law(12, 4);
  CHECK(pt[3] == 1.0);
  const auto sk = skewed_length_law(12, 3.0);
  double z = 0.0;
  for (int l = 1; l <= 12; ++l) z += l * std::exp(-l / 3.0);
  CHECK(sk[2] == doctest::Approx(3 * std::exp(-1.0) / z));
  const TokenLaw law;
  const TokenSpace sp{law.vocab_size(), 12};
  const auto c = synth_corpus(sp, law, pt, 50, 1);
  for (const auto& s : c) {
    CHECK(s.size() == 4);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] / law.variants == int(std::min<std::size_t>(i, 3)));
  }
  const auto vp = law.variant_probs(7, 12);
  double vs = 0.0;
  for (double p : vp) {
    vs += p;
    CHECK(p >= law.floor / law.variants - 1e-15);
  }
  CHECK(vs == doctest::Approx(1.0));
}

TEST_CASE("outcome table: complementary cells sum to one") {
  const TokenLaw law;
  const TokenSpace sp{law.vocab_size(), 12};
  const auto corpus = synth_corpus(sp, law, uniform_length_law(12), 2000, 4);
  const ArTable m = fit_ar_table(corpus, sp, LengthBand::whole_band(), 0.1);
  Rng r(5);
  std::vector<Sequence> ev;
  for (int i = 0; i < 300; ++i) ev.push_back(m.sample(r));
  const OutcomeTable t = outcome_table(m, ev);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int k = 0; k < 2; ++k) CHECK(t.prob[a][b][k] + t.prob[b][a][k] == doctest::Approx(1.0).epsilon(1e-12));
  // Independent recomputation of one cell.
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ev.size(); ++i)
    for (std::size_t j = 0; j < ev.size(); ++j)
      if (i != j && ev[i].size() <= 4 && ev[j].size() >= 8) {
        s += oracle::sigmoid(m.log_prob(ev[i]) / double(ev[i].size()) - m.log_prob(ev[j]) / double(ev[j].size()));
        ++n;
      }
  CHECK(t.lennorm(LengthBin::S, LengthBin::L) == doctest::Approx(s / double(n)).epsilon(1e-12));
  const CsvTable csv = parse_csv(t.to_csv());
  CHECK(csv.rows.size() == 9);
}

TEST_CASE("length bins, band masses and bimodality") {
  CHECK(length_bin(4) == LengthBin::S);
  CHECK(length_bin(5) == LengthBin::M);
  CHECK(length_bin(7) == LengthBin::M);
  CHECK(length_bin(8) == LengthBin::L);
  std::vector<double> f = {0.1, 0.2, 0.1, 0.05, 0.01, 0.01, 0.02, 0.1, 0.2, 0.1, 0.06, 0.05};
  const auto bm = band_masses(f);
  CHECK(bm[0] == doctest::Approx(0.45));
  CHECK(bm[1] == doctest::Approx(0.04));
  CHECK(bm[2] == doctest::Approx(0.51));
  CHECK(is_bimodal(f));
  CHECK_FALSE(is_bimodal({0.1, 0.2, 0.3, 0.2, 0.1, 0.1}));
  CHECK(is_bimodal({0.3, 0.2, 0.198, 0.302}, 0.005));
  CHECK_FALSE(is_bimodal({0.3, 0.298, 0.302}, 0.005));
}

TEST_CASE("length histogram csv round trip") {
  const LengthHistogram h = length_histogram({{1}, {1, 2}, {1, 2}, {3, 3, 3}}, 4);
  CHECK(h.counts == std::vector<std::size_t>{1, 2, 1, 0});
  CHECK(h.total() == 4);
  CHECK(LengthHistogram::from_csv(h.to_csv()).counts == h.counts);
  CHECK(h.fractions()[1] == 0.5);
}

TEST_CASE("table policy: scores are sequence log-probabilities and gradients check") {
  const TokenSpace sp{3, 4};
  const ArTable m = random_table(sp, 6);
  auto pool = std::make_shared<std::vector<Sequence>>(enumerate(sp));
  ArPolicy p(m, pool);
  CHECK(p.num_params() == 3 + 3 * 4);
  std::vector<Item> items;
  for (std::size_t i = 0; i < pool->size(); i += 7) items.push_back(pool_item(*pool, i));
  const auto s = p.scores(items);
  for (std::size_t k = 0; k < items.size(); ++k) CHECK(s[k] == doctest::Approx(m.log_prob((*pool)[items[k].id])).epsilon(1e-12));
  TrainingBatch b;
  b.points = items;
  for (std::size_t k = 0; k + 1 < items.size(); ++k) b.pairs.push_back({k, k + 1, 0.3, 1.0});
  CHECK(grad_check(LossSpec{loss::Bce{PbdeSpec::length_normalized()}}, p, b, 15) <= 1e-6);
  CHECK(p.table().max_normalization_error() < 1e-12);
}

TEST_CASE("adaptation with zero steps returns the input model") {
  const TokenLaw law;
  const TokenSpace sp{law.vocab_size(), 12};
  const auto corpus = synth_corpus(sp, law, skewed_length_law(12, 3.0), 3000, 2);
  const ArTable whole = fit_ar_table(corpus, sp, LengthBand::whole_band(), 0.1);
  const ArTable sh = fit_ar_table(corpus, sp, LengthBand::short_band(), 0.1);
  const ArTable lo = fit_ar_table(corpus, sp, LengthBand::long_band(), 0.1);
  const auto data = build_pref_dataset(MixtureKind::kAnnotatorMixture, sh, lo, whole, 64, 3);
  CHECK(data.dataset.triplets.size() == 64);
  CHECK(data.pool->size() == 128);
  AdaptConfig cfg;
  cfg.steps = 0;
  const auto r = adapt_on_preferences(whole, data, cfg, 1);
  CHECK(r.model.log_start_vec() == whole.log_start_vec());
  CHECK(r.model.log_trans_vec() == whole.log_trans_vec());
}

TEST_CASE("mixture annotators over a pool") {
  const TokenSpace sp{2, 3};
  const ArTable a = random_table(sp, 7), b = random_table(sp, 8);
  auto pool = std::make_shared<const std::vector<Sequence>>(std::vector<Sequence>{{0}, {1, 1, 0}});
  const Item x = pool_item(*pool, 0), y = pool_item(*pool, 1);
  const double la = a.log_prob({0}) / 1 - a.log_prob({1, 1, 0}) / 3;
  const double lb = b.log_prob({0}) / 1 - b.log_prob({1, 1, 0}) / 3;
  const Annotator am = seq_annotator(MixtureKind::kAnnotatorMixture, a, b, pool);
  CHECK(annotator_pref_prob(am, x, y) == doctest::Approx(0.5 * oracle::sigmoid(la) + 0.5 * oracle::sigmoid(lb)));
  auto lmix = [&](const Sequence& s) {
    return std::log(0.5 * std::exp(a.log_prob(s)) + 0.5 * std::exp(b.log_prob(s)));
  };
  const Annotator dm = seq_annotator(MixtureKind::kDensityMixture, a, b, pool);
  CHECK(annotator_pref_prob(dm, x, y) == doctest::Approx(oracle::sigmoid(lmix({0}) - lmix({1, 1, 0}) / 3)));
}
