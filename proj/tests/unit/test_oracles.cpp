#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "zdq/dp_designer.hpp"
#include "zdq/error.hpp"
#include "zdq/oracles.hpp"

namespace {

using namespace zdq;

std::vector<std::vector<double>> random_stochastic(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<std::vector<double>> p(n, std::vector<double>(n));
  for (auto& row : p) {
    double s = 0.0;
    for (double& v : row) s += (v = u(gen));
    for (double& v : row) v /= s;
  }
  return p;
}

TEST(LloydMax, StandardNormalTwoLevels) {
  const Grid grid(-8.0, 8.0, 1601);
  const auto r = oracles::lloyd_max(GridBelief::normal(grid, 0.0, 1.0), 2);
  ASSERT_EQ(r.reconstructions.size(), 2u);
  EXPECT_NEAR(r.quantizer.thresholds()[0], 0.0, 1e-9);
  EXPECT_NEAR(r.reconstructions[0], -std::sqrt(2.0 / std::numbers::pi), 1e-4);
  EXPECT_NEAR(r.reconstructions[1], std::sqrt(2.0 / std::numbers::pi), 1e-4);
  EXPECT_NEAR(r.mse, 1.0 - 2.0 / std::numbers::pi, 1e-4);
}

TEST(LloydMax, SingleLevelIsTheVariance) {
  const Grid grid(-8.0, 8.0, 1601);
  const auto r = oracles::lloyd_max(GridBelief::normal(grid, 1.0, 0.5), 1);
  EXPECT_TRUE(r.quantizer.thresholds().empty());
  EXPECT_NEAR(r.reconstructions[0], 1.0, 1e-9);
  EXPECT_NEAR(r.mse, 0.25, 1e-4);
}

TEST(LloydMax, UniformTwoLevels) {
  const auto r = oracles::lloyd_max(GridBelief::uniform(Grid(0.0, 1.0, 2001)), 2);
  EXPECT_NEAR(r.quantizer.thresholds()[0], 0.5, 1e-9);
  EXPECT_NEAR(r.reconstructions[0], 0.25, 1e-6);
  EXPECT_NEAR(r.mse, 1.0 / 48.0, 1e-6);
}

TEST(LloydMax, FixedPointConditions) {
  const Grid grid(-8.0, 8.0, 1601);
  const GridBelief b = GridBelief::normal(grid, 0.3, 1.4);
  for (std::size_t m : {2u, 3u, 4u}) {
    const auto r = oracles::lloyd_max(b, m);
    const auto& t = r.quantizer.thresholds();
    ASSERT_EQ(t.size(), m - 1);
    for (std::size_t j = 0; j + 1 < m; ++j)
      EXPECT_NEAR(t[j], 0.5 * (r.reconstructions[j] + r.reconstructions[j + 1]), 1e-8);
    // Same quantizer through the stage-cost module.
    EXPECT_NEAR(stage_cost(b, r.quantizer), r.mse, 1e-9);
  }
}

TEST(BruteForceFinite, HandValues) {
  const std::vector<std::vector<double>> flat(3, std::vector<double>(3, 1.0 / 3.0));
  const FiniteChain iid(flat, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  // Best two-cell split of {0, 1, 2} leaves one pair: (2/3) * (1/4).
  EXPECT_NEAR(oracles::brute_force_finite(iid.initial(), iid, 2, 1, CostModel::quadratic()), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(oracles::brute_force_finite(iid.initial(), iid, 2, 3, CostModel::quadratic()), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(oracles::brute_force_finite(iid.initial(), iid, 1, 2, CostModel::quadratic()), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(oracles::brute_force_finite(iid.initial(), iid, 3, 2, CostModel::quadratic()), 0.0);

  const FiniteChain two({{0.9, 0.1}, {0.2, 0.8}}, {0.5, 0.5});
  EXPECT_EQ(oracles::brute_force_finite(two.initial(), two, 2, 3, CostModel::quadratic()), 0.0);
  EXPECT_NEAR(oracles::brute_force_finite(two.initial(), two, 1, 1, CostModel::quadratic()), 0.25, 1e-15);
}

TEST(BruteForceFinite, Budget) {
  std::mt19937_64 gen(8);
  const FiniteChain chain(random_stochastic(3, gen), {0.2, 0.3, 0.5});
  EXPECT_THROW(oracles::brute_force_finite(chain.initial(), chain, 2, 6, CostModel::quadratic(), 10),
               BudgetExceeded);
}

TEST(ExhaustiveAdmissibleSearch, AgreesWithMarkovOptimum) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 2 + trial % 2;
    std::vector<double> init(n);
    double s = 0.0;
    for (double& v : init) s += (v = u(gen) + 0.05);
    for (double& v : init) v /= s;
    const FiniteChain chain(random_stochastic(n, gen), init);
    CostModel cost = CostModel::quadratic();
    if (trial % 2 == 0) {
      std::vector<std::vector<double>> table(n, std::vector<double>(n));
      for (auto& row : table)
        for (double& v : row) v = u(gen);
      cost = CostModel::tabular(table);
    }
    for (std::size_t t : {1u, 2u}) {
      const double admissible = oracles::exhaustive_admissible_search(chain, 2, t, cost);
      const double markov = oracles::brute_force_finite(chain.initial(), chain, 2, t, cost);
      EXPECT_NEAR(admissible, markov, 1e-12) << trial << " T=" << t;
    }
  }
}

TEST(ExhaustiveAdmissibleSearch, RejectsLongHorizons) {
  const FiniteChain two({{0.9, 0.1}, {0.2, 0.8}}, {0.5, 0.5});
  EXPECT_THROW(oracles::exhaustive_admissible_search(two, 2, 3, CostModel::quadratic()), InvalidArgument);
}

}  // namespace
