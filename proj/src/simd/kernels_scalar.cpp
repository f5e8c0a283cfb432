#include "kernel_table.hpp"

namespace tnt::simd::detail {
namespace {

template <typename Real>
Real dot(const Real* a, const Real* b, std::size_t n) {
  Real sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

template <typename Real>
void axpy(Real alpha, const Real* x, Real* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename Real>
void correlate_same(const Real* x, const Real* kernel, std::size_t k, Real* y, std::size_t n) {
  for (std::size_t j = 0; j < k; ++j) {
    const TapRange r = tap_range(j, k, n);
    if (r.hi == r.lo) continue;
    axpy(kernel[j], x + static_cast<std::ptrdiff_t>(r.lo) + r.shift, y + r.lo, r.hi - r.lo);
  }
}

template <typename Real>
void correlate_lags(const Real* grad, const Real* x, std::size_t n, Real* dkernel,
                    std::size_t k) {
  for (std::size_t j = 0; j < k; ++j) {
    const TapRange r = tap_range(j, k, n);
    if (r.hi == r.lo) continue;
    dkernel[j] += dot(grad + r.lo, x + static_cast<std::ptrdiff_t>(r.lo) + r.shift, r.hi - r.lo);
  }
}

template <typename Real>
void correlate_many(const Real* xp, std::size_t n, const Real* w, std::size_t k,
                    std::size_t w_stride, std::size_t m, Real* y, std::size_t y_stride) {
  for (std::size_t q = 0; q < m; ++q) {
    for (std::size_t t = 0; t < n; ++t) {
      Real acc = y[q * y_stride + t];
      for (std::size_t j = 0; j < k; ++j) acc += w[q * w_stride + j] * xp[t + j];
      y[q * y_stride + t] = acc;
    }
  }
}

template <typename Real>
void correlate_many_lags(const Real* g, std::size_t g_stride, std::size_t m, const Real* xp,
                         std::size_t n, Real* dw, std::size_t k, std::size_t dw_stride) {
  for (std::size_t q = 0; q < m; ++q) {
    for (std::size_t j = 0; j < k; ++j) dw[q * dw_stride + j] += dot(g + q * g_stride, xp + j, n);
  }
}

}  // namespace

const KernelTable<float>& scalar_f32() {
  static const KernelTable<float> table{&dot<float>, &axpy<float>, &correlate_same<float>,
                                        &correlate_lags<float>, &correlate_many<float>,
                                        &correlate_many_lags<float>};
  return table;
}

const KernelTable<double>& scalar_f64() {
  static const KernelTable<double> table{&dot<double>, &axpy<double>, &correlate_same<double>,
                                         &correlate_lags<double>, &correlate_many<double>,
                                         &correlate_many_lags<double>};
  return table;
}

}  // namespace tnt::simd::detail
