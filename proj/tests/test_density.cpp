#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "prefdens/density.hpp"
#include "prefdens/error.hpp"

using namespace prefdens;

TEST_CASE("grid geometry") {
  const GridDomain d(-10, 10, 5);
  CHECK(d.dx() == 5.0);
  CHECK(d.x(0) == -10.0);
  CHECK(d.x(4) == 10.0);
  CHECK(d.weight(0) == 2.5);
  CHECK(d.weight(2) == 5.0);
  CHECK(d.snap(-100) == 0);
  CHECK(d.snap(3.0) == 3);
  CHECK_THROWS_AS(GridDomain(1, 1, 5), ConfigError);
  CHECK_THROWS_AS(GridDomain(0, 1, 1), ConfigError);
}

TEST_CASE("truncated normal matches an independent evaluation") {
  const GridDomain d(-10, 10, 257);
  const LogDensity p = eval_truncated_normal({1.5, 2.0, -10, 10}, d);
  const auto ref = oracle::truncnorm(oracle::grid(-10, 10, 257), 1.5, 2.0);
  for (std::size_t i = 0; i < d.n; ++i) CHECK(std::exp(p.log_p[i]) == doctest::Approx(ref[i]).epsilon(1e-12));
  CHECK(oracle::trapz(p.probs(), d.dx()) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(eval_truncated_normal({0, 0, -10, 10}, d), ConfigError);
  CHECK_THROWS_AS(eval_truncated_normal({0, 1, -5, 10}, d), ConfigError);
}

TEST_CASE("mixture of components") {
  const GridDomain d(-10, 10, 513);
  const auto x = oracle::grid(-10, 10, 513);
  const LogDensity a = eval_truncated_normal({-2.5, 0.25, -10, 10}, d);
  const LogDensity b = eval_truncated_normal({2.5, 1.0, -10, 10}, d);
  const LogDensity m = mix({{0.4, 0.6}, {a, b}});
  const auto ref = oracle::toy_target(x);
  for (std::size_t i = 0; i < d.n; ++i) CHECK(std::exp(m.log_p[i]) == doctest::Approx(ref[i]).epsilon(1e-11));
  CHECK_THROWS_AS(mix({{0.5, 0.6}, {a, b}}), ConfigError);
  CHECK_THROWS_AS(mix({{1.0}, {a, b}}), ConfigError);
}

TEST_CASE("divergences") {
  const GridDomain d(-10, 10, 401);
  const LogDensity p = eval_truncated_normal({-1, 1, -10, 10}, d);
  const LogDensity q = eval_truncated_normal({1, 1, -10, 10}, d);
  CHECK(total_variation(p, p) == 0.0);
  CHECK(kl(p, p) == doctest::Approx(0.0).epsilon(1e-14));
  // KL between unit normals two apart is 2; TV is 2*Phi(1)-1.
  CHECK(kl(p, q) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(total_variation(p, q) == doctest::Approx(std::erf(1.0 / std::sqrt(2.0))).epsilon(1e-3));
  const LogDensity far = eval_truncated_normal({8, 0.2, -10, 10}, d);
  CHECK(total_variation(p, far) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(total_variation(p, eval_truncated_normal({0, 1, -10, 10}, GridDomain(-10, 10, 11))),
                  DomainMismatchError);
}

TEST_CASE("normalize rejects degenerate input") {
  const GridDomain d(0, 1, 3);
  CHECK_THROWS_AS(normalize({-INFINITY, -INFINITY, -INFINITY}, d), DegenerateDensityError);
  CHECK_THROWS_AS(normalize({0, NAN, 0}, d), DegenerateDensityError);
  CHECK_THROWS_AS(normalize({0, 0}, d), DomainMismatchError);
  const LogDensity u = normalize({5, 5, 5}, d);
  for (double v : u.log_p) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(u.log_p == uniform_density(d).log_p);
}

TEST_CASE("sampling reproduces mean and variance") {
  const GridDomain d(-10, 10, 2048);
  const LogDensity p = eval_truncated_normal({2.0, 1.5, -10, 10}, d);
  const auto s = sample(p, 200000, 17);
  double m = 0.0, v = 0.0;
  for (double x : s) m += x;
  m /= double(s.size());
  for (double x : s) v += (x - m) * (x - m);
  v /= double(s.size());
  CHECK(m == doctest::Approx(2.0).epsilon(0.01));
  CHECK(v == doctest::Approx(2.25).epsilon(0.02));
  CHECK(sample(p, 10, 3) == sample(p, 10, 3));
}

TEST_CASE("uniform pairs cover the grid") {
  const GridDomain d(-10, 10, 16);
  const auto pairs = uniform_pairs(d, 16000, 1);
  std::vector<int> counts(16, 0);
  for (const auto& g : pairs) ++counts[g.a];
  // End cells are half-width under snapping.
  CHECK(std::abs(counts[0] - 16000 / 30) < 150);
  CHECK(std::abs(counts[7] - 16000 / 15) < 200);
}

TEST_CASE("csv round trip is exact") {
  const GridDomain d(-10, 10, 33);
  const LogDensity p = eval_truncated_normal({0.3, 0.7, -10, 10}, d);
  const LogDensity q = density_from_csv(density_to_csv(p));
  CHECK(q.domain == p.domain);
  CHECK(q.log_p == p.log_p);
}

TEST_CASE("log_sum_exp is stable") {
  CHECK(log_sum_exp({1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(std::isinf(log_sum_exp({})));
}
