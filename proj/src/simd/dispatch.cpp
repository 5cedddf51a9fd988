#include <cstdlib>
#include <string_view>

#include "zdq/simd/kernels.hpp"

namespace zdq::simd {

#ifndef ZDQ_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

bool cpu_supports_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable& select() {
  if (const char* forced = std::getenv("ZDQ_SIMD"); forced && std::string_view(forced) == "scalar")
    return scalar_kernels();
  if (const KernelTable* avx = avx2_kernels(); avx && cpu_supports_avx2()) return *avx;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace zdq::simd
