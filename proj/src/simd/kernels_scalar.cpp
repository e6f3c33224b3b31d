#include "mlr/simd/kernels.hpp"

namespace mlr::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void dot_columns_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x, double* out) {
  for (std::size_t c = 0; c < cols; ++c) out[c] = dot_scalar(a + c * rows, x, rows);
}

void scaled_dist2_scalar(const double* xs, const double* ys, const double* zs, std::size_t n,
                         const double origin[3], const double scale[3], double* out) {
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = scale[0] * (xs[j] - origin[0]);
    const double dy = scale[1] * (ys[j] - origin[1]);
    const double dz = scale[2] * (zs[j] - origin[2]);
    out[j] = dx * dx + dy * dy + dz * dz;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable t{Backend::Scalar, dot_scalar, axpy_scalar, dot_columns_scalar, scaled_dist2_scalar};
  return t;
}

}  // namespace mlr::simd
