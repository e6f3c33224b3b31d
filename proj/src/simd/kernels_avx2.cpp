#include "mlr/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace mlr::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void dot_columns_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x, double* out) {
  for (std::size_t c = 0; c < cols; ++c) out[c] = dot_avx2(a + c * rows, x, rows);
}

void scaled_dist2_avx2(const double* xs, const double* ys, const double* zs, std::size_t n,
                       const double origin[3], const double scale[3], double* out) {
  const __m256d ox = _mm256_set1_pd(origin[0]);
  const __m256d oy = _mm256_set1_pd(origin[1]);
  const __m256d oz = _mm256_set1_pd(origin[2]);
  const __m256d sx = _mm256_set1_pd(scale[0]);
  const __m256d sy = _mm256_set1_pd(scale[1]);
  const __m256d sz = _mm256_set1_pd(scale[2]);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d dx = _mm256_mul_pd(sx, _mm256_sub_pd(_mm256_loadu_pd(xs + j), ox));
    const __m256d dy = _mm256_mul_pd(sy, _mm256_sub_pd(_mm256_loadu_pd(ys + j), oy));
    const __m256d dz = _mm256_mul_pd(sz, _mm256_sub_pd(_mm256_loadu_pd(zs + j), oz));
    __m256d r = _mm256_mul_pd(dx, dx);
    r = _mm256_fmadd_pd(dy, dy, r);
    r = _mm256_fmadd_pd(dz, dz, r);
    _mm256_storeu_pd(out + j, r);
  }
  for (; j < n; ++j) {
    const double dx = scale[0] * (xs[j] - origin[0]);
    const double dy = scale[1] * (ys[j] - origin[1]);
    const double dz = scale[2] * (zs[j] - origin[2]);
    out[j] = dx * dx + dy * dy + dz * dz;
  }
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  static const KernelTable t{Backend::Avx2, dot_avx2, axpy_avx2, dot_columns_avx2, scaled_dist2_avx2};
  return supported ? &t : nullptr;
}

}  // namespace mlr::simd

#else

namespace mlr::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace mlr::simd

#endif
