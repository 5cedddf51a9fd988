#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "zdq/simd/kernels.hpp"

namespace {

using zdq::simd::KernelTable;

std::vector<double> random_vector(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(gen);
  return v;
}

double abs_sum(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] * b[i]);
  return s;
}

class SimdEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    avx_ = zdq::simd::avx2_kernels();
    if (!avx_ || !zdq::simd::cpu_supports_avx2()) GTEST_SKIP() << "AVX2 variant not available";
  }
  const KernelTable& scalar_ = zdq::simd::scalar_kernels();
  const KernelTable* avx_ = nullptr;
};

// Odd sizes exercise the remainder loops.
const std::size_t kSizes[] = {0, 1, 3, 4, 7, 8, 15, 16, 17, 63, 801, 1000};

TEST_F(SimdEquivalence, ReductionsAgreeWithScalar) {
  std::mt19937_64 gen(11);
  for (std::size_t n : kSizes) {
    const auto a = random_vector(n, gen);
    const auto b = random_vector(n, gen);
    const double scale = abs_sum(a, b) + 1.0;
    EXPECT_NEAR(avx_->dot(a.data(), b.data(), n), scalar_.dot(a.data(), b.data(), n), 1e-14 * scale);
    EXPECT_NEAR(avx_->sum(a.data(), n), scalar_.sum(a.data(), n), 1e-14 * (2.0 * n + 1));
    EXPECT_NEAR(avx_->abs_diff_sum(a.data(), b.data(), n),
                scalar_.abs_diff_sum(a.data(), b.data(), n), 1e-14 * (4.0 * n + 1));
  }
}

TEST_F(SimdEquivalence, MomentsAgreeWithScalar) {
  std::mt19937_64 gen(12);
  for (std::size_t n : kSizes) {
    const auto w0 = random_vector(n, gen), w1 = random_vector(n, gen), w2 = random_vector(n, gen);
    const auto v = random_vector(n, gen);
    const auto s = scalar_.moments3(w0.data(), w1.data(), w2.data(), v.data(), n);
    const auto f = avx_->moments3(w0.data(), w1.data(), w2.data(), v.data(), n);
    EXPECT_NEAR(f.zeroth, s.zeroth, 1e-14 * (abs_sum(w0, v) + 1));
    EXPECT_NEAR(f.first, s.first, 1e-14 * (abs_sum(w1, v) + 1));
    EXPECT_NEAR(f.second, s.second, 1e-14 * (abs_sum(w2, v) + 1));
  }
}

TEST_F(SimdEquivalence, ElementwiseOpsAreBitIdentical) {
  std::mt19937_64 gen(13);
  for (std::size_t n : kSizes) {
    const auto a = random_vector(n, gen);
    const auto b = random_vector(n, gen);
    std::vector<double> s(n), f(n);
    scalar_.multiply(a.data(), b.data(), s.data(), n);
    avx_->multiply(a.data(), b.data(), f.data(), n);
    EXPECT_EQ(s, f);
    s = a;
    f = a;
    scalar_.scale(s.data(), 0.37, n);
    avx_->scale(f.data(), 0.37, n);
    EXPECT_EQ(s, f);
  }
}

TEST_F(SimdEquivalence, MatvecOnSubBlocks) {
  std::mt19937_64 gen(14);
  const std::size_t stride = 37;
  const auto m = random_vector(41 * stride, gen);
  for (std::size_t rows : {1u, 3u, 4u, 5u, 41u}) {
    for (std::size_t cols : {0u, 1u, 5u, 36u, 37u}) {
      const auto x = random_vector(cols, gen);
      std::vector<double> ys(rows, -1.0), yf(rows, -2.0);
      scalar_.matvec(m.data(), rows, cols, stride, x.data(), ys.data());
      avx_->matvec(m.data(), rows, cols, stride, x.data(), yf.data());
      for (std::size_t r = 0; r < rows; ++r) EXPECT_NEAR(yf[r], ys[r], 1e-13 * (4.0 * cols + 1));
    }
  }
}

TEST(SimdDispatch, ScalarReferenceValues) {
  const auto& k = zdq::simd::scalar_kernels();
  const double a[] = {1, 2, 3, 4, 5};
  const double b[] = {5, 4, 3, 2, 1};
  EXPECT_EQ(k.dot(a, b, 5), 35.0);
  EXPECT_EQ(k.sum(a, 5), 15.0);
  EXPECT_EQ(k.abs_diff_sum(a, b, 5), 12.0);
  const auto mom = k.moments3(a, b, a, b, 5);
  EXPECT_EQ(mom.zeroth, 35.0);
  EXPECT_EQ(mom.first, 55.0);
  const double m[] = {1, 2, 3, 4, 5, 6};
  double y[2];
  k.matvec(m, 2, 2, 3, a, y);  // rows (1,2) and (4,5) against (1,2)
  EXPECT_EQ(y[0], 5.0);
  EXPECT_EQ(y[1], 14.0);
}

TEST(SimdDispatch, ActiveTableIsOneOfTheVariants) {
  const auto& active = zdq::simd::active();
  const bool is_scalar = &active == &zdq::simd::scalar_kernels();
  const bool is_avx = &active == zdq::simd::avx2_kernels();
  EXPECT_TRUE(is_scalar || is_avx);
}

}  // namespace
