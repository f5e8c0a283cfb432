#include <arm_neon.h>

#include "kernel_table.hpp"
#include "lane_kernels.hpp"

namespace tnt::simd::detail {
namespace {

inline float dot_f32(const float* a, const float* b, std::size_t n) {
  float32x4_t acc0 = vdupq_n_f32(0.0f);
  float32x4_t acc1 = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
    acc1 = vfmaq_f32(acc1, vld1q_f32(a + i + 4), vld1q_f32(b + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
  float sum = vaddvq_f32(vaddq_f32(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

inline double dot_f64(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  for (; i + 2 <= n; i += 2) acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

inline void axpy_f32(float alpha, const float* x, float* y, std::size_t n) {
  const float32x4_t va = vdupq_n_f32(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vfmaq_f32(vld1q_f32(y + i), va, vld1q_f32(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

inline void axpy_f64(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

struct LanesF32 {
  using V = float32x4_t;
  static constexpr std::size_t kWidth = 4;
  static V zero() { return vdupq_n_f32(0.0f); }
  static V splat(float a) { return vdupq_n_f32(a); }
  static V load(const float* p) { return vld1q_f32(p); }
  static void store(float* p, V v) { vst1q_f32(p, v); }
  static V fma(V a, V b, V c) { return vfmaq_f32(c, a, b); }
  static float sum(V v) { return vaddvq_f32(v); }
};

struct LanesF64 {
  using V = float64x2_t;
  static constexpr std::size_t kWidth = 2;
  static V zero() { return vdupq_n_f64(0.0); }
  static V splat(double a) { return vdupq_n_f64(a); }
  static V load(const double* p) { return vld1q_f64(p); }
  static void store(double* p, V v) { vst1q_f64(p, v); }
  static V fma(V a, V b, V c) { return vfmaq_f64(c, a, b); }
  static double sum(V v) { return vaddvq_f64(v); }
};

template <typename Real, void (*Axpy)(Real, const Real*, Real*, std::size_t)>
void correlate_same(const Real* x, const Real* kernel, std::size_t k, Real* y, std::size_t n) {
  for (std::size_t j = 0; j < k; ++j) {
    const TapRange r = tap_range(j, k, n);
    if (r.hi == r.lo) continue;
    Axpy(kernel[j], x + static_cast<std::ptrdiff_t>(r.lo) + r.shift, y + r.lo, r.hi - r.lo);
  }
}

template <typename Real, Real (*Dot)(const Real*, const Real*, std::size_t)>
void correlate_lags(const Real* grad, const Real* x, std::size_t n, Real* dkernel,
                    std::size_t k) {
  for (std::size_t j = 0; j < k; ++j) {
    const TapRange r = tap_range(j, k, n);
    if (r.hi == r.lo) continue;
    dkernel[j] += Dot(grad + r.lo, x + static_cast<std::ptrdiff_t>(r.lo) + r.shift, r.hi - r.lo);
  }
}

}  // namespace

const KernelTable<float>& neon_f32() {
  static const KernelTable<float> table{
      &dot_f32, &axpy_f32, &correlate_same<float, axpy_f32>, &correlate_lags<float, dot_f32>,
      &correlate_many<LanesF32, float>, &correlate_many_lags<LanesF32, float>};
  return table;
}

const KernelTable<double>& neon_f64() {
  static const KernelTable<double> table{
      &dot_f64, &axpy_f64, &correlate_same<double, axpy_f64>, &correlate_lags<double, dot_f64>,
      &correlate_many<LanesF64, double>, &correlate_many_lags<LanesF64, double>};
  return table;
}

}  // namespace tnt::simd::detail
