#pragma once

#include "tnt/simd.hpp"

namespace tnt::simd::detail {

const KernelTable<float>& scalar_f32();
const KernelTable<double>& scalar_f64();

#if defined(TNT_WITH_AVX2)
const KernelTable<float>& avx2_f32();
const KernelTable<double>& avx2_f64();
#endif

#if defined(TNT_WITH_NEON)
const KernelTable<float>& neon_f32();
const KernelTable<double>& neon_f64();
#endif

// Valid output range of tap j for a same-padded correlation of length n with
// half-width h: t in [lo, hi) keeps t + j - h inside [0, n).
struct TapRange {
  std::ptrdiff_t shift;
  std::size_t lo;
  std::size_t hi;
};

inline TapRange tap_range(std::size_t j, std::size_t k, std::size_t n) {
  const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(k / 2);
  const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t lo = shift < 0 ? -shift : 0;
  const std::ptrdiff_t hi = shift > 0 ? sn - shift : sn;
  if (hi <= lo) return {shift, 0, 0};
  return {shift, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace tnt::simd::detail
