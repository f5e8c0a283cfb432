// Built with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <vector>

#include "kernel_table.hpp"
#include "lane_kernels.hpp"

namespace tnt::simd::detail {
namespace {

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d high64 = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, high64));
}

inline float dot_f32(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  }
  float sum = hsum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

inline double dot_f64(const double* a, const double* b, std::size_t n) {
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
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

inline void axpy_f32(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

inline void axpy_f64(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Zero-padded copy of x so every tap reads a valid slot: buf[t + j] == x[t + j - k/2].
template <typename Real>
class Padded {
 public:
  Padded(const Real* x, std::size_t n, std::size_t k) {
    const std::size_t size = n + k + 8;
    data_ = size <= kStack ? stack_ : (heap_.resize(size), heap_.data());
    std::fill(data_, data_ + size, Real(0));
    std::copy(x, x + n, data_ + k / 2);
  }
  const Real* data() const { return data_; }

 private:
  static constexpr std::size_t kStack = 256;
  alignas(32) Real stack_[kStack];
  std::vector<Real> heap_;
  Real* data_;
};

template <typename Real>
struct Lanes;

template <>
struct Lanes<float> {
  using V = __m256;
  static constexpr std::size_t kWidth = 8;
  static V zero() { return _mm256_setzero_ps(); }
  static V splat(float a) { return _mm256_set1_ps(a); }
  static V load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, V v) { _mm256_storeu_ps(p, v); }
  static V fma(V a, V b, V c) { return _mm256_fmadd_ps(a, b, c); }
  static float sum(V v) { return hsum(v); }
};

template <>
struct Lanes<double> {
  using V = __m256d;
  static constexpr std::size_t kWidth = 4;
  static V zero() { return _mm256_setzero_pd(); }
  static V splat(double a) { return _mm256_set1_pd(a); }
  static V load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, V v) { _mm256_storeu_pd(p, v); }
  static V fma(V a, V b, V c) { return _mm256_fmadd_pd(a, b, c); }
  static double sum(V v) { return hsum(v); }
};

template <typename Real>
void correlate_same(const Real* x, const Real* kernel, std::size_t k, Real* y, std::size_t n) {
  using L = Lanes<Real>;
  const Padded<Real> pad(x, n, k);
  const Real* buf = pad.data();
  std::size_t t = 0;
  for (; t + L::kWidth <= n; t += L::kWidth) {
    typename L::V acc = L::load(y + t);
    for (std::size_t j = 0; j < k; ++j) acc = L::fma(L::splat(kernel[j]), L::load(buf + t + j), acc);
    L::store(y + t, acc);
  }
  for (; t < n; ++t) {
    Real acc = y[t];
    for (std::size_t j = 0; j < k; ++j) acc += kernel[j] * buf[t + j];
    y[t] = acc;
  }
}

template <typename Real>
void correlate_lags(const Real* grad, const Real* x, std::size_t n, Real* dkernel,
                    std::size_t k) {
  using L = Lanes<Real>;
  constexpr std::size_t kMaxTaps = 16;
  const Padded<Real> pad(x, n, k);
  const Real* buf = pad.data();
  for (std::size_t j0 = 0; j0 < k; j0 += kMaxTaps) {
    const std::size_t taps = std::min(kMaxTaps, k - j0);
    typename L::V acc[kMaxTaps];
    for (std::size_t j = 0; j < taps; ++j) acc[j] = L::zero();
    std::size_t t = 0;
    for (; t + L::kWidth <= n; t += L::kWidth) {
      const typename L::V g = L::load(grad + t);
      for (std::size_t j = 0; j < taps; ++j) acc[j] = L::fma(g, L::load(buf + t + j0 + j), acc[j]);
    }
    for (std::size_t j = 0; j < taps; ++j) {
      Real sum = hsum(acc[j]);
      for (std::size_t u = t; u < n; ++u) sum += grad[u] * buf[u + j0 + j];
      dkernel[j0 + j] += sum;
    }
  }
}

}  // namespace

const KernelTable<float>& avx2_f32() {
  static const KernelTable<float> table{
      &dot_f32, &axpy_f32, &correlate_same<float>, &correlate_lags<float>,
      &correlate_many<Lanes<float>, float>, &correlate_many_lags<Lanes<float>, float>};
  return table;
}

const KernelTable<double>& avx2_f64() {
  static const KernelTable<double> table{
      &dot_f64, &axpy_f64, &correlate_same<double>, &correlate_lags<double>,
      &correlate_many<Lanes<double>, double>, &correlate_many_lags<Lanes<double>, double>};
  return table;
}

}  // namespace tnt::simd::detail
