#include <atomic>
#include <cstdlib>
#include <cstring>

#include "prefdens/error.hpp"
#include "prefdens/kernels.hpp"

namespace prefdens::kernels {

namespace {

Isa initial_isa() {
  const char* env = std::getenv("PREFDENS_ISA");
  if (env && std::strcmp(env, "scalar") == 0) return Isa::kScalar;
  return cpu_supports(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2:
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }
  return false;
}

const char* isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!cpu_supports(isa)) throw Error(std::string("CPU does not support ") + isa_name(isa));
  current().store(isa, std::memory_order_relaxed);
}

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_row,
              std::size_t a_col, const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  if (active_isa() == Isa::kAvx2)
    avx2::gemm_acc(m, n, k, a, a_row, a_col, b, ldb, c, ldc);
  else
    scalar::gemm_acc(m, n, k, a, a_row, a_col, b, ldb, c, ldc);
}

void tanh_inplace(double* x, std::size_t n) {
  if (active_isa() == Isa::kAvx2)
    avx2::tanh_inplace(x, n);
  else
    scalar::tanh_inplace(x, n);
}

void adam_update(double* p, double* m, double* v, const double* g, std::size_t n, double lr,
                 double beta1, double beta2, double bc1, double bc2, double eps) {
  if (active_isa() == Isa::kAvx2)
    avx2::adam_update(p, m, v, g, n, lr, beta1, beta2, bc1, bc2, eps);
  else
    scalar::adam_update(p, m, v, g, n, lr, beta1, beta2, bc1, bc2, eps);
}

double dot(const double* x, const double* y, std::size_t n) {
  return active_isa() == Isa::kAvx2 ? avx2::dot(x, y, n) : scalar::dot(x, y, n);
}

}  // namespace prefdens::kernels
