#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "prefdens/error.hpp"
#include "prefdens/losses.hpp"
#include "prefdens/optim.hpp"
#include "prefdens/optimum.hpp"

using namespace prefdens;

namespace {

const std::vector<double> kLogits = {0.3, -1.2, 0.8, 0.0};

std::vector<double> log_softmax(const std::vector<double>& z) {
  double m = -INFINITY, s = 0.0;
  for (double v : z) m = std::max(m, v);
  for (double v : z) s += std::exp(v - m);
  std::vector<double> out;
  for (double v : z) out.push_back(v - m - std::log(s));
  return out;
}

Item it(std::size_t id, int len = 0) { return Item{id, double(id), len}; }

// Four items, three pairs with mixed labels and weights, one list, one reg point.
TrainingBatch small_batch() {
  TrainingBatch b;
  b.points = {it(0, 1), it(1, 2), it(2, 3), it(3, 4)};
  b.pairs = {{0, 1, 1.0, 1.0}, {2, 1, 0.0, 2.0}, {3, 0, 0.3, 0.5}};
  b.lists = {{{1, 3, 0, 2}}};
  b.reg = {{2, 0.6}, {3, 0.4}};
  return b;
}

double wmean(const std::vector<double>& l, const std::vector<double>& w) {
  double s = 0.0, z = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) s += w[i] * l[i], z += w[i];
  return s / z;
}

double hinge(double h, double y, double d) { return y * std::max(0.0, d - h) + (1 - y) * std::max(0.0, d + h); }

}  // namespace

TEST_CASE("tabular policy over a finite set is a softmax") {
  TabularPolicy p(kLogits);
  const auto ls = log_softmax(kLogits);
  const TrainingBatch b = small_batch();
  const auto s = p.scores(b.points);
  for (std::size_t i = 0; i < 4; ++i) CHECK(s[i] == doctest::Approx(ls[i]).epsilon(1e-14));
  CHECK(p.kind() == "tabular");
  CHECK_FALSE(p.has_grid());
}

TEST_CASE("tabular policy on a grid normalizes with trapezoid weights") {
  const GridDomain d(-10, 10, 9);
  std::vector<double> logits = {0, 1, 2, 1, 0, -1, -2, 0.5, 0.2};
  TabularPolicy p(d, logits);
  const LogDensity g = p.grid_density();
  std::vector<double> e;
  for (double v : logits) e.push_back(std::exp(v));
  const auto ref = oracle::normalize(e, d.dx());
  for (std::size_t i = 0; i < d.n; ++i) CHECK(std::exp(g.log_p[i]) == doctest::Approx(ref[i]).epsilon(1e-13));
  const TabularPolicy q = TabularPolicy::from_density(g);
  CHECK(total_variation(q.grid_density(), g) < 1e-15);
}

TEST_CASE("energy network size and output modes") {
  EnergyNetwork net(3);
  CHECK(net.num_params() == 12673);
  CHECK(EnergyNetwork::kParamCount == 12673);
  CHECK_THROWS(EnergyNetwork(std::vector<double>(10)));
  const GridDomain d(-10, 10, 33);
  EnergyPolicy raw(net, EnergyPolicy::Mode::kRawReward, d), norm(net, EnergyPolicy::Mode::kGridNormalized, d);
  CHECK(raw.kind() == "energy-reward");
  CHECK(norm.kind() == "energy");
  const auto items = grid_items(d, false);
  std::vector<double> xs;
  for (const auto& i : items) xs.push_back(i.x);
  const auto out = net.forward(xs, nullptr);
  const auto rs = raw.scores(items), ns = norm.scores(items);
  std::vector<double> e;
  for (double o : out) e.push_back(std::exp(o));
  const auto ref = oracle::normalize(e, d.dx());
  for (std::size_t i = 0; i < d.n; ++i) {
    CHECK(rs[i] == doctest::Approx(out[i]).epsilon(1e-14));
    CHECK(std::exp(ns[i]) == doctest::Approx(ref[i]).epsilon(1e-12));
  }
  CHECK(total_variation(raw.grid_density(), norm.grid_density()) < 1e-14);
}

TEST_CASE("mixture policy density is the weighted sum of heads") {
  const GridDomain d(-10, 10, 17);
  std::vector<std::unique_ptr<Policy>> heads;
  heads.push_back(std::make_unique<TabularPolicy>(TabularPolicy::from_density(eval_truncated_normal({-3, 1, -10, 10}, d))));
  heads.push_back(std::make_unique<TabularPolicy>(TabularPolicy::from_density(eval_truncated_normal({4, 2, -10, 10}, d))));
  MixturePolicy m(std::move(heads), {0.0, std::log(3.0)});
  const auto w = m.weights();
  CHECK(w[0] == doctest::Approx(0.25));
  CHECK(w[1] == doctest::Approx(0.75));
  const auto x = oracle::grid(-10, 10, 17);
  const auto a = oracle::truncnorm(x, -3, 1), b = oracle::truncnorm(x, 4, 2);
  const LogDensity g = m.grid_density();
  for (std::size_t i = 0; i < d.n; ++i)
    CHECK(std::exp(g.log_p[i]) == doctest::Approx(0.25 * a[i] + 0.75 * b[i]).epsilon(1e-10));
  CHECK(m.num_params() == 2 * 17 + 2);
  CHECK(m.weight_offset() == 34);
}

TEST_CASE("loss values match direct evaluation") {
  TabularPolicy p(kLogits);
  const TrainingBatch b = small_batch();
  const auto s = log_softmax(kLogits);
  const std::vector<double> w = {1.0, 2.0, 0.5};
  std::vector<double> h;
  for (const auto& pr : b.pairs) h.push_back(s[pr.a] - s[pr.b]);
  const std::vector<double> y = {1.0, 0.0, 0.3};

  SUBCASE("bce") {
    std::vector<double> l;
    for (int i = 0; i < 3; ++i) l.push_back(-y[i] * std::log(oracle::sigmoid(h[i])) - (1 - y[i]) * std::log(oracle::sigmoid(-h[i])));
    CHECK(bce_pref_loss(p, PbdeSpec::unit(), b).loss == doctest::Approx(wmean(l, w)).epsilon(1e-13));
  }
  SUBCASE("bce length-normalized") {
    std::vector<double> l;
    for (int i = 0; i < 3; ++i) {
      const auto& pr = b.pairs[i];
      const double m = s[pr.a] / b.points[pr.a].length - s[pr.b] / b.points[pr.b].length;
      l.push_back(-y[i] * std::log(oracle::sigmoid(m)) - (1 - y[i]) * std::log(oracle::sigmoid(-m)));
    }
    CHECK(bce_pref_loss(p, PbdeSpec::length_normalized(), b).loss == doctest::Approx(wmean(l, w)).epsilon(1e-13));
  }
  SUBCASE("slic") {
    std::vector<double> l;
    for (int i = 0; i < 3; ++i) l.push_back(hinge(h[i], y[i], 1.0));
    const double reg = 0.6 * s[2] + 0.4 * s[3];
    CHECK(slic_direct_loss(p, b, 1.0, 0.5).loss == doctest::Approx(wmean(l, w) - 0.5 * reg).epsilon(1e-13));
    TrainingBatch noreg = b;
    noreg.reg.clear();
    CHECK_THROWS_AS(slic_direct_loss(p, noreg, 1.0, 0.5), ConfigError);
  }
  const std::vector<double> refv = {-1.0, -2.0, -0.5, -1.5};
  const LogDensityFn ref = [refv](const Item& i) { return refv[i.id]; };
  std::vector<double> hr;
  for (const auto& pr : b.pairs) hr.push_back((s[pr.a] - refv[pr.a]) - (s[pr.b] - refv[pr.b]));
  SUBCASE("rso") {
    std::vector<double> l;
    for (int i = 0; i < 3; ++i) l.push_back(hinge(hr[i], y[i], 0.7));
    CHECK(rso_normalized_loss(p, ref, b, 0.7).loss == doctest::Approx(wmean(l, w)).epsilon(1e-13));
  }
  SUBCASE("ipo") {
    const double c = 1.0 / (2.0 * 0.5);
    std::vector<double> l;
    for (int i = 0; i < 3; ++i) l.push_back(y[i] * std::pow(hr[i] - c, 2) + (1 - y[i]) * std::pow(-hr[i] - c, 2));
    CHECK(ipo_loss(p, ref, b, 0.5).loss == doctest::Approx(wmean(l, w)).epsilon(1e-13));
    CHECK_THROWS_AS(ipo_loss(p, ref, b, 0.0), ConfigError);
  }
  SUBCASE("rrhf") {
    const std::vector<std::size_t> o = {1, 3, 0, 2};
    double l = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) l += std::max(0.0, s[o[j]] - s[o[i]]);
    CHECK(rrhf_loss(p, b, false, 0.2).loss == doctest::Approx(l - 0.2 * s[1]).epsilon(1e-13));
  }
}

TEST_CASE("mixture bce equals the negative log of the mixed preference probability") {
  std::vector<std::unique_ptr<Policy>> heads;
  heads.push_back(std::make_unique<TabularPolicy>(kLogits));
  heads.push_back(std::make_unique<TabularPolicy>(std::vector<double>{-0.5, 0.9, 0.1, 0.4}));
  MixturePolicy m(std::move(heads), {0.2, -0.1});
  const TrainingBatch b = small_batch();
  const auto s0 = log_softmax(kLogits), s1 = log_softmax({-0.5, 0.9, 0.1, 0.4});
  const double w0 = 1.0 / (1.0 + std::exp(-0.3)), w1 = 1.0 - w0;
  std::vector<double> l;
  for (const auto& pr : b.pairs) {
    const double pa = w0 * oracle::sigmoid(s0[pr.a] - s0[pr.b]) + w1 * oracle::sigmoid(s1[pr.a] - s1[pr.b]);
    l.push_back(-pr.label * std::log(pa) - (1 - pr.label) * std::log(1 - pa));
  }
  CHECK(mixture_bce_loss(m, b).loss == doctest::Approx(wmean(l, {1.0, 2.0, 0.5})).epsilon(1e-13));
  TabularPolicy single(kLogits);
  CHECK_THROWS_AS(evaluate(LossSpec{loss::MixtureBce{}}, single, b), ConfigError);
}

TEST_CASE("gradients of every loss pass finite differences") {
  const TrainingBatch b = small_batch();
  const LogDensityFn ref = [](const Item& i) { return -0.3 * double(i.id); };
  const std::vector<LossSpec> specs = {
      {loss::Bce{PbdeSpec::unit()}},      {loss::Bce{PbdeSpec::length_normalized()}},
      {loss::SlicDirect{1.0, 0.5}},       {loss::RsoHinge{0.7, ref}},
      {loss::Ipo{0.5, ref}},              {loss::RrhfRank{true, 0.2}},
  };
  TabularPolicy p(kLogits);
  for (const auto& s : specs) CHECK(grad_check(s, p, b, 8) <= 1e-6);
  std::vector<std::unique_ptr<Policy>> heads;
  heads.push_back(std::make_unique<TabularPolicy>(kLogits));
  heads.push_back(std::make_unique<TabularPolicy>(std::vector<double>{-0.5, 0.9, 0.1, 0.4}));
  MixturePolicy m(std::move(heads), {0.2, -0.1});
  CHECK(grad_check(LossSpec{loss::MixtureBce{}}, m, b, 10) <= 1e-6);
}

TEST_CASE("energy network gradient matches a directional derivative") {
  // Projecting on a random direction keeps the derivative large, so central
  // differences are accurate well beyond the per-coordinate check.
  const GridDomain d(-10, 10, 64);
  EnergyPolicy e(EnergyNetwork(4), EnergyPolicy::Mode::kGridNormalized, d);
  TrainingBatch b;
  for (std::size_t i = 0; i < 64; ++i) b.points.push_back(grid_item(d, i, false));
  Rng r(2);
  for (int k = 0; k < 200; ++k) b.pairs.push_back({r.below(64), r.below(64), r.uniform(), 1.0});
  const LossSpec spec{loss::Bce{PbdeSpec::unit()}};
  const auto p0 = e.params();
  const auto g = evaluate(spec, e, b).grad;
  std::vector<double> dir(p0.size());
  double gd = 0.0;
  for (std::size_t i = 0; i < dir.size(); ++i) gd += g[i] * (dir[i] = r.normal());
  auto at = [&](double eps) {
    std::vector<double> q = p0;
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += eps * dir[i];
    e.set_params(q);
    return evaluate(spec, e, b).loss;
  };
  const double h = 1e-5;
  const double num = (at(h) - at(-h)) / (2 * h);
  CHECK(num == doctest::Approx(gd).epsilon(1e-6));
  e.set_params(p0);
  CHECK(grad_check(spec, e, b, 16) <= 1e-4);
}

TEST_CASE("exact pair batch weights and labels") {
  const GridDomain d(-10, 10, 5);
  const LogDensity t = eval_truncated_normal({0, 2, -10, 10}, d);
  const Annotator a = SingleAnnotator{PbdeSpec::unit(), grid_log_density(t), "t"};
  const auto items = grid_items(d, false);
  const TrainingBatch b = exact_pair_batch(items, std::vector<double>(5, 0.2), a);
  CHECK(b.pairs.size() == 20);
  for (const auto& p : b.pairs) {
    CHECK(p.a != p.b);
    CHECK(p.weight == doctest::Approx(0.04));
    CHECK(p.label == doctest::Approx(oracle::sigmoid(t.log_p[p.a] - t.log_p[p.b])));
  }
  // At the target the exact objective equals the expected label entropy.
  TabularPolicy at(d, t.log_p);
  CHECK(exact_pref_loss(at, PbdeSpec::unit(), b).loss == doctest::Approx(expected_label_entropy(b)).epsilon(1e-13));
}

TEST_CASE("closed-form optima") {
  const GridDomain d(-10, 10, 101);
  const auto x = oracle::grid(-10, 10, 101);
  const LogDensity prior = eval_truncated_normal({0, 5, -10, 10}, d);
  const LogDensity target = eval_truncated_normal({2, 1, -10, 10}, d);
  const auto pp = oracle::truncnorm(x, 0, 5), pt = oracle::truncnorm(x, 2, 1);
  std::vector<double> poe(101), geo(101);
  for (std::size_t i = 0; i < 101; ++i) {
    poe[i] = pp[i] * std::pow(pt[i], 1.0 / 4.0);
    geo[i] = std::pow(pp[i], 0.75) * std::pow(pt[i], 0.25);
  }
  poe = oracle::normalize(poe, d.dx());
  geo = oracle::normalize(geo, d.dx());
  const LogDensity a = theoretical_optimum(optimum::ProductOfExperts{4.0}, prior, target);
  const LogDensity g = theoretical_optimum(optimum::GeometricMean{0.25}, prior, target);
  for (std::size_t i = 0; i < 101; ++i) {
    CHECK(std::exp(a.log_p[i]) == doctest::Approx(poe[i]).epsilon(1e-11));
    CHECK(std::exp(g.log_p[i]) == doctest::Approx(geo[i]).epsilon(1e-11));
  }
  CHECK(total_variation(theoretical_optimum(optimum::Identity{}, prior, target), target) < 1e-14);
  CHECK(total_variation(theoretical_optimum(optimum::ProductOfExperts{1.0}, uniform_density(d), target), target) < 1e-13);
}
