#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "prefdens/kernels.hpp"
#include "prefdens/rng.hpp"

using namespace prefdens;
namespace k = prefdens::kernels;

namespace {

std::vector<double> randvec(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  Rng r(seed);
  std::vector<double> v(n);
  for (double& x : v) x = scale * r.uniform(-1.0, 1.0);
  return v;
}

bool have_avx2() { return k::cpu_supports(k::Isa::kAvx2); }

}  // namespace

TEST_CASE("scalar gemm matches a naive triple loop") {
  const std::size_t m = 5, n = 7, kk = 3;
  const auto a = randvec(m * kk, 1), b = randvec(kk * n, 2);
  std::vector<double> c(m * n, 0.5), ref(m * n, 0.5);
  k::scalar::gemm_acc(m, n, kk, a.data(), kk, 1, b.data(), n, c.data(), n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < kk; ++p) ref[i * n + j] += a[i * kk + p] * b[p * n + j];
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(ref[i]).epsilon(1e-14));
}

TEST_CASE("gemm: avx2 equals scalar, including transposed operands and ragged sizes") {
  if (!have_avx2()) return;
  for (auto [m, n, kk] : {std::array<std::size_t, 3>{1, 1, 1}, {3, 5, 7}, {64, 64, 64}, {33, 65, 17}}) {
    const auto a = randvec(m * kk, 3), b = randvec(kk * n, 4);
    for (bool trans : {false, true}) {
      std::vector<double> c1(m * n, 0.25), c2(m * n, 0.25);
      const std::size_t ar = trans ? 1 : kk, ac = trans ? m : 1;
      k::scalar::gemm_acc(m, n, kk, a.data(), ar, ac, b.data(), n, c1.data(), n);
      k::avx2::gemm_acc(m, n, kk, a.data(), ar, ac, b.data(), n, c2.data(), n);
      for (std::size_t i = 0; i < c1.size(); ++i) REQUIRE(std::abs(c1[i] - c2[i]) <= 1e-13 * (1.0 + std::abs(c1[i])));
    }
  }
}

TEST_CASE("tanh: both kernels agree with std::tanh") {
  auto x = randvec(1003, 5, 30.0);
  for (double e : {0.0, -0.0, 0.62, 0.63, 22.0, 40.0, -40.0, 1e-9}) x.push_back(e);
  auto s = x, v = x;
  k::scalar::tanh_inplace(s.data(), s.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(s[i] - std::tanh(x[i])) <= 1e-15);
  if (!have_avx2()) return;
  k::avx2::tanh_inplace(v.data(), v.size());
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(std::abs(v[i] - std::tanh(x[i])) <= 4e-16);
}

TEST_CASE("adam update: avx2 equals scalar equals the textbook formula") {
  const std::size_t n = 37;
  const auto g = randvec(n, 6);
  auto p1 = randvec(n, 7), m1 = randvec(n, 8, 0.1), v1 = randvec(n, 9, 0.1);
  for (double& v : v1) v = std::abs(v);
  auto p2 = p1, m2 = m1, v2 = v1, p3 = p1, m3 = m1, v3 = v1;
  const double lr = 1e-3, b1 = 0.9, b2 = 0.999, bc1 = 1 - std::pow(b1, 3), bc2 = 1 - std::pow(b2, 3), eps = 1e-8;
  k::scalar::adam_update(p1.data(), m1.data(), v1.data(), g.data(), n, lr, b1, b2, bc1, bc2, eps);
  for (std::size_t i = 0; i < n; ++i) {
    m3[i] = b1 * m3[i] + (1 - b1) * g[i];
    v3[i] = b2 * v3[i] + (1 - b2) * g[i] * g[i];
    p3[i] -= lr * (m3[i] / bc1) / (std::sqrt(v3[i] / bc2) + eps);
    CHECK(p1[i] == doctest::Approx(p3[i]).epsilon(1e-14));
  }
  if (!have_avx2()) return;
  k::avx2::adam_update(p2.data(), m2.data(), v2.data(), g.data(), n, lr, b1, b2, bc1, bc2, eps);
  for (std::size_t i = 0; i < n; ++i) {
    REQUIRE(std::abs(p1[i] - p2[i]) <= 1e-15);
    REQUIRE(std::abs(m1[i] - m2[i]) <= 1e-15);
    REQUIRE(std::abs(v1[i] - v2[i]) <= 1e-15);
  }
}

TEST_CASE("dot: avx2 equals scalar") {
  for (std::size_t n : {0, 1, 3, 4, 5, 64, 1001}) {
    const auto x = randvec(n, 10), y = randvec(n, 11);
    long double ref = 0;
    for (std::size_t i = 0; i < n; ++i) ref += (long double)x[i] * y[i];
    CHECK(std::abs(k::scalar::dot(x.data(), y.data(), n) - double(ref)) <= 1e-12);
    if (have_avx2()) CHECK(std::abs(k::avx2::dot(x.data(), y.data(), n) - double(ref)) <= 1e-12);
  }
}

TEST_CASE("dispatch honours the selected isa") {
  const k::Isa before = k::active_isa();
  k::set_active_isa(k::Isa::kScalar);
  CHECK(k::active_isa() == k::Isa::kScalar);
  CHECK(std::string(k::isa_name(k::Isa::kScalar)) == "scalar");
  k::set_active_isa(before);
}
