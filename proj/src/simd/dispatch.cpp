#include "mlr/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace mlr::simd {
namespace {

const KernelTable* best_available() {
  if (const auto* t = avx2_kernels()) return t;
  if (const auto* t = neon_kernels()) return t;
  return &scalar_kernels();
}

const KernelTable* initial_selection() {
  if (const char* env = std::getenv("MLR_SIMD")) {
    const Backend b = parse_backend(env);
    if (available(b)) return &table(b);
  }
  return best_available();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{initial_selection()};
  return ptr;
}

}  // namespace

bool available(Backend b) {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2: return avx2_kernels() != nullptr;
    case Backend::Neon: return neon_kernels() != nullptr;
  }
  return false;
}

const KernelTable& table(Backend b) {
  switch (b) {
    case Backend::Scalar: return scalar_kernels();
    case Backend::Avx2:
      if (const auto* t = avx2_kernels()) return *t;
      break;
    case Backend::Neon:
      if (const auto* t = neon_kernels()) return *t;
      break;
  }
  throw std::invalid_argument("SIMD backend not available: " + std::string(name(b)));
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void set_backend(Backend b) { current().store(&table(b), std::memory_order_release); }

Backend active_backend() { return active().backend; }

std::string_view name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

Backend parse_backend(std::string_view s) {
  if (s == "scalar") return Backend::Scalar;
  if (s == "avx2") return Backend::Avx2;
  if (s == "neon") return Backend::Neon;
  throw std::invalid_argument("unknown SIMD backend: " + std::string(s));
}

}  // namespace mlr::simd
