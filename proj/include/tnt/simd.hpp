#pragma once

// Vector kernels behind the network and similarity code. Every kernel has a
// scalar reference implementation; AVX2 (x86-64) and NEON (aarch64) variants
// are compiled separately and one backend is picked at runtime. Setting
// TNT_SIMD=scalar in the environment forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace tnt::simd {

enum class Backend { kScalar, kAvx2, kNeon };

std::string_view to_string(Backend backend);

bool backend_supported(Backend backend);

// The backend used by the free functions below.
Backend active_backend();

// Throws kInvalidArgument if the backend is not supported on this machine.
void set_backend(Backend backend);

template <typename Real>
struct KernelTable {
  // sum_i a[i] * b[i]
  Real (*dot)(const Real* a, const Real* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(Real alpha, const Real* x, Real* y, std::size_t n);
  // Same-padded correlation along a line, accumulated:
  //   y[t] += sum_j kernel[j] * x[t + j - k/2],  x zero outside [0, n).
  void (*correlate_same)(const Real* x, const Real* kernel, std::size_t k, Real* y,
                         std::size_t n);
  // Kernel gradient of correlate_same, accumulated:
  //   dkernel[j] += sum_t grad[t] * x[t + j - k/2].
  void (*correlate_lags)(const Real* grad, const Real* x, std::size_t n, Real* dkernel,
                         std::size_t k);
  // Several output lines from one padded input line, accumulated:
  //   y[q * y_stride + t] += sum_j w[q * w_stride + j] * xp[t + j]
  // for q < m and t < n. xp must hold n + k - 1 readable values.
  void (*correlate_many)(const Real* xp, std::size_t n, const Real* w, std::size_t k,
                         std::size_t w_stride, std::size_t m, Real* y, std::size_t y_stride);
  // Kernel gradients of correlate_many, accumulated:
  //   dw[q * dw_stride + j] += sum_t g[q * g_stride + t] * xp[t + j].
  void (*correlate_many_lags)(const Real* g, std::size_t g_stride, std::size_t m,
                              const Real* xp, std::size_t n, Real* dw, std::size_t k,
                              std::size_t dw_stride);
};

// Tables for a specific backend; throws if it is not supported.
const KernelTable<float>& kernels_f32(Backend backend);
const KernelTable<double>& kernels_f64(Backend backend);

template <typename Real>
const KernelTable<Real>& kernels(Backend backend) {
  if constexpr (sizeof(Real) == sizeof(float)) {
    return kernels_f32(backend);
  } else {
    return kernels_f64(backend);
  }
}

template <typename Real>
const KernelTable<Real>& active_kernels() {
  return kernels<Real>(active_backend());
}

template <typename Real>
Real dot(std::span<const Real> a, std::span<const Real> b) {
  return active_kernels<Real>().dot(a.data(), b.data(), a.size());
}

template <typename Real>
void axpy(Real alpha, std::span<const Real> x, std::span<Real> y) {
  active_kernels<Real>().axpy(alpha, x.data(), y.data(), x.size());
}

template <typename Real>
void correlate_same(std::span<const Real> x, std::span<const Real> kernel, std::span<Real> y) {
  active_kernels<Real>().correlate_same(x.data(), kernel.data(), kernel.size(), y.data(),
                                        x.size());
}

template <typename Real>
void correlate_lags(std::span<const Real> grad, std::span<const Real> x,
                    std::span<Real> dkernel) {
  active_kernels<Real>().correlate_lags(grad.data(), x.data(), x.size(), dkernel.data(),
                                        dkernel.size());
}

}  // namespace tnt::simd
