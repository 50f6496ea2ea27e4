#include <immintrin.h>

#include <cmath>

#include "prefdens/kernels.hpp"

namespace prefdens::kernels::avx2 {

namespace {

// R rows by 8 columns of C, accumulated over the full k extent.
template <int R>
inline void block_r8(std::size_t k, const double* a, std::size_t a_row, std::size_t a_col,
                     const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  __m256d lo[R], hi[R];
  for (int r = 0; r < R; ++r) {
    lo[r] = _mm256_setzero_pd();
    hi[r] = _mm256_setzero_pd();
  }
  for (std::size_t p = 0; p < k; ++p) {
    const double* bp = b + p * ldb;
    const __m256d b0 = _mm256_loadu_pd(bp);
    const __m256d b1 = _mm256_loadu_pd(bp + 4);
    const double* ap = a + p * a_col;
    for (int r = 0; r < R; ++r) {
      const __m256d av = _mm256_broadcast_sd(ap + r * a_row);
      lo[r] = _mm256_fmadd_pd(av, b0, lo[r]);
      hi[r] = _mm256_fmadd_pd(av, b1, hi[r]);
    }
  }
  for (int r = 0; r < R; ++r) {
    double* cr = c + r * ldc;
    _mm256_storeu_pd(cr, _mm256_add_pd(_mm256_loadu_pd(cr), lo[r]));
    _mm256_storeu_pd(cr + 4, _mm256_add_pd(_mm256_loadu_pd(cr + 4), hi[r]));
  }
}

template <int R>
inline void block_r4(std::size_t k, const double* a, std::size_t a_row, std::size_t a_col,
                     const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  __m256d acc[R];
  for (int r = 0; r < R; ++r) acc[r] = _mm256_setzero_pd();
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b + p * ldb);
    const double* ap = a + p * a_col;
    for (int r = 0; r < R; ++r)
      acc[r] = _mm256_fmadd_pd(_mm256_broadcast_sd(ap + r * a_row), b0, acc[r]);
  }
  for (int r = 0; r < R; ++r) {
    double* cr = c + r * ldc;
    _mm256_storeu_pd(cr, _mm256_add_pd(_mm256_loadu_pd(cr), acc[r]));
  }
}

template <int R>
void row_panel(std::size_t n, std::size_t k, const double* a, std::size_t a_row,
               std::size_t a_col, const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) block_r8<R>(k, a, a_row, a_col, b + j, ldb, c + j, ldc);
  for (; j + 4 <= n; j += 4) block_r4<R>(k, a, a_row, a_col, b + j, ldb, c + j, ldc);
  for (; j < n; ++j) {
    for (int r = 0; r < R; ++r) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[r * a_row + p * a_col] * b[p * ldb + j];
      c[r * ldc + j] += s;
    }
  }
}

// Cephes-style exp for the range tanh needs (0 <= x <= 44).
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125E-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212E-6);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);

  __m256d px = _mm256_floor_pd(_mm256_fmadd_pd(log2e, x, half));
  x = _mm256_sub_pd(x, _mm256_mul_pd(px, c1));
  x = _mm256_sub_pd(x, _mm256_mul_pd(px, c2));
  const __m256d xx = _mm256_mul_pd(x, x);

  __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
  p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(3.02994407707441961300E-2));
  p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(9.99999999999999999910E-1));
  p = _mm256_mul_pd(p, x);

  __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.52448340349684104192E-3));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.27265548208155028766E-1));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.00000000000000000009E0));

  __m256d r = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  r = _mm256_fmadd_pd(two, r, one);

  // Scale by 2^n through the exponent field.
  const __m128i n32 = _mm256_cvtpd_epi32(px);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  n64 = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
  n64 = _mm256_slli_epi64(n64, 52);
  return _mm256_mul_pd(r, _mm256_castsi256_pd(n64));
}

inline __m256d tanh_pd(__m256d x) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d ax = _mm256_andnot_pd(sign_mask, x);
  const __m256d sign = _mm256_and_pd(sign_mask, x);

  // Small arguments: odd rational approximation.
  const __m256d s = _mm256_mul_pd(x, x);
  __m256d p = _mm256_set1_pd(-9.64399179425052238628E-1);
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(-9.92877231001918586564E1));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(-1.61468768441708447952E3));
  __m256d q = _mm256_add_pd(s, _mm256_set1_pd(1.12811678491632931402E2));
  q = _mm256_fmadd_pd(q, s, _mm256_set1_pd(2.23548839060100448583E3));
  q = _mm256_fmadd_pd(q, s, _mm256_set1_pd(4.84406305325125486048E3));
  const __m256d small = _mm256_fmadd_pd(_mm256_mul_pd(x, s), _mm256_div_pd(p, q), x);

  // Large arguments: 1 - 2 / (exp(2|x|) + 1), clamped where it rounds to 1.
  const __m256d clamped = _mm256_min_pd(ax, _mm256_set1_pd(22.0));
  const __m256d e = exp_pd(_mm256_add_pd(clamped, clamped));
  __m256d big = _mm256_sub_pd(_mm256_set1_pd(1.0),
                              _mm256_div_pd(_mm256_set1_pd(2.0), _mm256_add_pd(e, _mm256_set1_pd(1.0))));
  big = _mm256_or_pd(big, sign);

  const __m256d use_small = _mm256_cmp_pd(ax, _mm256_set1_pd(0.625), _CMP_LT_OQ);
  return _mm256_blendv_pd(big, small, use_small);
}

}  // namespace

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_row,
              std::size_t a_col, const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  std::size_t i = 0;
  for (; i + 6 <= m; i += 6) row_panel<6>(n, k, a + i * a_row, a_row, a_col, b, ldb, c + i * ldc, ldc);
  const double* ai = a + i * a_row;
  double* ci = c + i * ldc;
  switch (m - i) {
    case 5: row_panel<5>(n, k, ai, a_row, a_col, b, ldb, ci, ldc); break;
    case 4: row_panel<4>(n, k, ai, a_row, a_col, b, ldb, ci, ldc); break;
    case 3: row_panel<3>(n, k, ai, a_row, a_col, b, ldb, ci, ldc); break;
    case 2: row_panel<2>(n, k, ai, a_row, a_col, b, ldb, ci, ldc); break;
    case 1: row_panel<1>(n, k, ai, a_row, a_col, b, ldb, ci, ldc); break;
    default: break;
  }
}

void tanh_inplace(double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, tanh_pd(_mm256_loadu_pd(x + i)));
  if (i < n) {
    alignas(32) double tail[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t j = i; j < n; ++j) tail[j - i] = x[j];
    _mm256_store_pd(tail, tanh_pd(_mm256_load_pd(tail)));
    for (std::size_t j = i; j < n; ++j) x[j] = tail[j - i];
  }
}

// Same operation order as the scalar version without FMA, so results are
// bit-identical across the two paths.
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n, double lr,
                 double beta1, double beta2, double bc1, double bc2, double eps) {
  const __m256d vb1 = _mm256_set1_pd(beta1), vb2 = _mm256_set1_pd(beta2);
  const __m256d vc1 = _mm256_set1_pd(1.0 - beta1), vc2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d vbc1 = _mm256_set1_pd(bc1), vbc2 = _mm256_set1_pd(bc2);
  const __m256d vlr = _mm256_set1_pd(lr), veps = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gi = _mm256_loadu_pd(g + i);
    __m256d mi = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(vc1, gi));
    __m256d vi = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                               _mm256_mul_pd(vc2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mhat = _mm256_div_pd(mi, vbc1);
    const __m256d vhat = _mm256_div_pd(vi, vbc2);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(vlr, mhat), _mm256_add_pd(_mm256_sqrt_pd(vhat), veps));
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  if (i < n) scalar::adam_update(p + i, m + i, v + i, g + i, n - i, lr, beta1, beta2, bc1, bc2, eps);
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(a0, a1));
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace prefdens::kernels::avx2
