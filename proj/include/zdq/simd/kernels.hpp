#pragma once

// Data-parallel inner loops used by the belief filter and the quadrature
// routines. Every kernel has a portable scalar reference implementation and,
// where the target supports it, an AVX2/FMA variant. The active table is
// chosen once per process from the CPU feature flags; setting the
// environment variable ZDQ_SIMD=scalar forces the reference kernels.

#include <cstddef>
#include <span>
#include <string_view>

namespace zdq::simd {

struct Moments3 {
  double zeroth = 0.0;
  double first = 0.0;
  double second = 0.0;
};

struct KernelTable {
  std::string_view name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // sum_i a[i]
  double (*sum)(const double* a, std::size_t n);

  // sum_i |a[i] - b[i]|
  double (*abs_diff_sum)(const double* a, const double* b, std::size_t n);

  // (sum w0*v, sum w1*v, sum w2*v) in one pass
  Moments3 (*moments3)(const double* w0, const double* w1, const double* w2,
                       const double* v, std::size_t n);

  // out[i] = a[i] * b[i]
  void (*multiply)(const double* a, const double* b, double* out, std::size_t n);

  // a[i] *= s
  void (*scale)(double* a, double s, std::size_t n);

  // y[r] = sum_{c < cols} m[r * stride + c] * x[c], for r < rows
  void (*matvec)(const double* m, std::size_t rows, std::size_t cols,
                 std::size_t stride, const double* x, double* y);
};

const KernelTable& scalar_kernels();

// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernels();

bool cpu_supports_avx2();

// The process-wide table selected at first use.
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }

}  // namespace zdq::simd
