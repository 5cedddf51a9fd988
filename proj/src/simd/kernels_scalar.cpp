#include "zdq/simd/kernels.hpp"

#include <cmath>

namespace zdq::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double abs_diff_sum_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
  return acc;
}

Moments3 moments3_scalar(const double* w0, const double* w1, const double* w2,
                         const double* v, std::size_t n) {
  Moments3 m;
  for (std::size_t i = 0; i < n; ++i) {
    m.zeroth += w0[i] * v[i];
    m.first += w1[i] * v[i];
    m.second += w2[i] * v[i];
  }
  return m;
}

void multiply_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_scalar(double* a, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] *= s;
}

void matvec_scalar(const double* m, std::size_t rows, std::size_t cols, std::size_t stride,
                   const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(m + r * stride, x, cols);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar",        dot_scalar,       sum_scalar,
                                 abs_diff_sum_scalar, moments3_scalar, multiply_scalar,
                                 scale_scalar,    matvec_scalar};
  return table;
}

}  // namespace zdq::simd
