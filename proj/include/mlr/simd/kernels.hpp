#pragma once

// Dense inner loops used by the QP solver and the safety checkers.
//
// Every kernel has a scalar reference implementation. Vector variants are
// compiled per target and picked at runtime; the choice can be forced with
// the MLR_SIMD environment variable (scalar | avx2 | neon) or set_backend().
// Results of the vector variants agree with the scalar ones up to the
// reassociation of floating-point sums.

#include <cstddef>
#include <span>
#include <string_view>

namespace mlr::simd {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[c] = dot(a[c*rows .. c*rows+rows), x) for a column-major rows x cols block
  void (*dot_columns)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* out);
  // out[j] = sum_d (scale[d] * (coord_d[j] - origin[d]))^2 over an SoA point set
  void (*scaled_dist2)(const double* xs, const double* ys, const double* zs, std::size_t n,
                       const double origin[3], const double scale[3], double* out);
};

const KernelTable& scalar_kernels();
// nullptr when the backend was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

bool available(Backend b);
const KernelTable& table(Backend b);

// Currently selected table. Selection happens once, on first use.
const KernelTable& active();
void set_backend(Backend b);
Backend active_backend();

std::string_view name(Backend b);
Backend parse_backend(std::string_view s);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace mlr::simd
