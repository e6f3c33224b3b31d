#include "mlr/simd/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace mlr::simd {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void dot_columns_neon(const double* a, std::size_t rows, std::size_t cols, const double* x, double* out) {
  for (std::size_t c = 0; c < cols; ++c) out[c] = dot_neon(a + c * rows, x, rows);
}

void scaled_dist2_neon(const double* xs, const double* ys, const double* zs, std::size_t n,
                       const double origin[3], const double scale[3], double* out) {
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t dx = vmulq_n_f64(vsubq_f64(vld1q_f64(xs + j), vdupq_n_f64(origin[0])), scale[0]);
    const float64x2_t dy = vmulq_n_f64(vsubq_f64(vld1q_f64(ys + j), vdupq_n_f64(origin[1])), scale[1]);
    const float64x2_t dz = vmulq_n_f64(vsubq_f64(vld1q_f64(zs + j), vdupq_n_f64(origin[2])), scale[2]);
    float64x2_t r = vmulq_f64(dx, dx);
    r = vfmaq_f64(r, dy, dy);
    r = vfmaq_f64(r, dz, dz);
    vst1q_f64(out + j, r);
  }
  for (; j < n; ++j) {
    const double dx = scale[0] * (xs[j] - origin[0]);
    const double dy = scale[1] * (ys[j] - origin[1]);
    const double dz = scale[2] * (zs[j] - origin[2]);
    out[j] = dx * dx + dy * dy + dz * dz;
  }
}

}  // namespace

const KernelTable* neon_kernels() {
  static const KernelTable t{Backend::Neon, dot_neon, axpy_neon, dot_columns_neon, scaled_dist2_neon};
  return &t;
}

}  // namespace mlr::simd

#else

namespace mlr::simd {
const KernelTable* neon_kernels() { return nullptr; }
}  // namespace mlr::simd

#endif
