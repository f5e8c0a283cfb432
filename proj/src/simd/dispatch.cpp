#include <atomic>
#include <cstdlib>
#include <string>

#include "kernel_table.hpp"
#include "tnt/error.hpp"

namespace tnt::simd {
namespace {

Backend detect_backend() {
  if (const char* forced = std::getenv("TNT_SIMD"); forced && std::string(forced) == "scalar") {
    return Backend::kScalar;
  }
#if defined(TNT_WITH_AVX2)
  if (backend_supported(Backend::kAvx2)) return Backend::kAvx2;
#endif
#if defined(TNT_WITH_NEON)
  return Backend::kNeon;
#endif
  return Backend::kScalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect_backend()};
  return backend;
}

}  // namespace

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
    case Backend::kNeon: return "neon";
  }
  return "unknown";
}

bool backend_supported(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if defined(TNT_WITH_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::kNeon:
#if defined(TNT_WITH_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (!backend_supported(backend)) {
    fail(ErrorKind::kInvalidArgument,
         "SIMD backend " + std::string(to_string(backend)) + " is not available");
  }
  current().store(backend, std::memory_order_relaxed);
}

const KernelTable<float>& kernels_f32(Backend backend) {
  if (!backend_supported(backend)) {
    fail(ErrorKind::kInvalidArgument,
         "SIMD backend " + std::string(to_string(backend)) + " is not available");
  }
  switch (backend) {
#if defined(TNT_WITH_AVX2)
    case Backend::kAvx2: return detail::avx2_f32();
#endif
#if defined(TNT_WITH_NEON)
    case Backend::kNeon: return detail::neon_f32();
#endif
    default: return detail::scalar_f32();
  }
}

const KernelTable<double>& kernels_f64(Backend backend) {
  if (!backend_supported(backend)) {
    fail(ErrorKind::kInvalidArgument,
         "SIMD backend " + std::string(to_string(backend)) + " is not available");
  }
  switch (backend) {
#if defined(TNT_WITH_AVX2)
    case Backend::kAvx2: return detail::avx2_f64();
#endif
#if defined(TNT_WITH_NEON)
    case Backend::kNeon: return detail::neon_f64();
#endif
    default: return detail::scalar_f64();
  }
}

}  // namespace tnt::simd
