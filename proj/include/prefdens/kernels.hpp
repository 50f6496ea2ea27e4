#pragma once

#include <cstddef>

// Hot loops of the energy network and the optimizer. Each entry point has a
// scalar reference implementation and an AVX2/FMA variant; the dispatching
// functions in this namespace route to whichever is active.
namespace prefdens::kernels {

enum class Isa { kScalar, kAvx2 };

bool cpu_supports(Isa isa);
const char* isa_name(Isa isa);

// Defaults to the best supported ISA unless PREFDENS_ISA=scalar is set.
Isa active_isa();
void set_active_isa(Isa isa);

// C (m x n, row stride ldc) += A (m x k) * B (k x n, row stride ldb).
// A(i, p) lives at a[i * a_row + p * a_col], so a transposed operand is
// just a different pair of strides.
void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_row,
              std::size_t a_col, const double* b, std::size_t ldb, double* c, std::size_t ldc);

void tanh_inplace(double* x, std::size_t n);

// One bias-corrected Adam update. bc1 = 1 - beta1^t, bc2 = 1 - beta2^t.
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n, double lr,
                 double beta1, double beta2, double bc1, double bc2, double eps);

double dot(const double* x, const double* y, std::size_t n);

namespace scalar {
void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_row,
              std::size_t a_col, const double* b, std::size_t ldb, double* c, std::size_t ldc);
void tanh_inplace(double* x, std::size_t n);
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n, double lr,
                 double beta1, double beta2, double bc1, double bc2, double eps);
double dot(const double* x, const double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_row,
              std::size_t a_col, const double* b, std::size_t ldb, double* c, std::size_t ldc);
void tanh_inplace(double* x, std::size_t n);
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n, double lr,
                 double beta1, double beta2, double bc1, double bc2, double eps);
double dot(const double* x, const double* y, std::size_t n);
}  // namespace avx2

}  // namespace prefdens::kernels
