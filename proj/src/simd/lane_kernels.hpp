#pragma once

// Register-blocked multi-line correlations written against a lane traits
// type L providing V, kWidth, zero, splat, load, store, fma and sum.

#include <cstddef>

namespace tnt::simd::detail {

template <typename L, int QB, int VB, typename Real>
inline void many_block(const Real* xp, const Real* w, std::size_t k, std::size_t w_stride,
                       Real* y, std::size_t y_stride, std::size_t t) {
  typename L::V acc[QB][VB];
  for (int q = 0; q < QB; ++q) {
    for (int v = 0; v < VB; ++v) acc[q][v] = L::load(y + q * y_stride + t + v * L::kWidth);
  }
  for (std::size_t j = 0; j < k; ++j) {
    typename L::V xv[VB];
    for (int v = 0; v < VB; ++v) xv[v] = L::load(xp + t + v * L::kWidth + j);
    for (int q = 0; q < QB; ++q) {
      const typename L::V wb = L::splat(w[q * w_stride + j]);
      for (int v = 0; v < VB; ++v) acc[q][v] = L::fma(wb, xv[v], acc[q][v]);
    }
  }
  for (int q = 0; q < QB; ++q) {
    for (int v = 0; v < VB; ++v) L::store(y + q * y_stride + t + v * L::kWidth, acc[q][v]);
  }
}

template <typename L, int QB, typename Real>
inline void many_rows(const Real* xp, std::size_t n, const Real* w, std::size_t k,
                      std::size_t w_stride, Real* y, std::size_t y_stride) {
  constexpr std::size_t W = L::kWidth;
  std::size_t t = 0;
  for (; t + 2 * W <= n; t += 2 * W) many_block<L, QB, 2>(xp, w, k, w_stride, y, y_stride, t);
  for (; t + W <= n; t += W) many_block<L, QB, 1>(xp, w, k, w_stride, y, y_stride, t);
  for (; t < n; ++t) {
    for (int q = 0; q < QB; ++q) {
      Real acc = y[q * y_stride + t];
      for (std::size_t j = 0; j < k; ++j) acc += w[q * w_stride + j] * xp[t + j];
      y[q * y_stride + t] = acc;
    }
  }
}

template <typename L, typename Real>
void correlate_many(const Real* xp, std::size_t n, const Real* w, std::size_t k,
                    std::size_t w_stride, std::size_t m, Real* y, std::size_t y_stride) {
  std::size_t q = 0;
  for (; q + 4 <= m; q += 4) {
    many_rows<L, 4>(xp, n, w + q * w_stride, k, w_stride, y + q * y_stride, y_stride);
  }
  for (; q < m; ++q) many_rows<L, 1>(xp, n, w + q * w_stride, k, w_stride, y + q * y_stride, y_stride);
}

template <typename L, int QB, int JB, typename Real>
inline void lags_block(const Real* g, std::size_t g_stride, const Real* xp, std::size_t n,
                       Real* dw, std::size_t dw_stride, std::size_t j0) {
  constexpr std::size_t W = L::kWidth;
  typename L::V acc[QB][JB];
  for (int q = 0; q < QB; ++q) {
    for (int j = 0; j < JB; ++j) acc[q][j] = L::zero();
  }
  std::size_t t = 0;
  for (; t + W <= n; t += W) {
    typename L::V gv[QB];
    for (int q = 0; q < QB; ++q) gv[q] = L::load(g + q * g_stride + t);
    for (int j = 0; j < JB; ++j) {
      const typename L::V xv = L::load(xp + t + j0 + j);
      for (int q = 0; q < QB; ++q) acc[q][j] = L::fma(gv[q], xv, acc[q][j]);
    }
  }
  for (int q = 0; q < QB; ++q) {
    for (int j = 0; j < JB; ++j) {
      Real sum = L::sum(acc[q][j]);
      for (std::size_t u = t; u < n; ++u) sum += g[q * g_stride + u] * xp[u + j0 + j];
      dw[q * dw_stride + j0 + j] += sum;
    }
  }
}

template <typename L, int QB, typename Real>
inline void lags_rows(const Real* g, std::size_t g_stride, const Real* xp, std::size_t n,
                      Real* dw, std::size_t k, std::size_t dw_stride) {
  std::size_t j = 0;
  for (; j + 4 <= k; j += 4) lags_block<L, QB, 4>(g, g_stride, xp, n, dw, dw_stride, j);
  for (; j < k; ++j) lags_block<L, QB, 1>(g, g_stride, xp, n, dw, dw_stride, j);
}

template <typename L, typename Real>
void correlate_many_lags(const Real* g, std::size_t g_stride, std::size_t m, const Real* xp,
                         std::size_t n, Real* dw, std::size_t k, std::size_t dw_stride) {
  std::size_t q = 0;
  for (; q + 2 <= m; q += 2) {
    lags_rows<L, 2>(g + q * g_stride, g_stride, xp, n, dw + q * dw_stride, k, dw_stride);
  }
  for (; q < m; ++q) lags_rows<L, 1>(g + q * g_stride, g_stride, xp, n, dw + q * dw_stride, k, dw_stride);
}

}  // namespace tnt::simd::detail
