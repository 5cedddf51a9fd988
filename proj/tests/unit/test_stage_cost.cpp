#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "zdq/belief.hpp"
#include "zdq/error.hpp"
#include "zdq/stage_cost.hpp"

namespace {

using namespace zdq;

GridBelief standard_normal() {
  const LinearGaussianSource iid(0.0, 1.0);
  return GridBelief::normal(default_grid(iid), 0.0, 1.0);
}

TEST(OptimalReconstruction, Examples) {
  const FiniteChain chain({{0.5, 0.5}, {0.5, 0.5}}, {0.5, 0.5}, {-1.0, 1.0});
  const SimplexBelief half({0.5, 0.5});
  const FinitePartition sep({0, 1}, 2);
  const auto quad = CostModel::quadratic();
  const Reconstruction u = optimal_reconstruction(half, chain, sep, 1, quad);
  EXPECT_EQ(u.value, 1.0);
  EXPECT_EQ(finite_cell_cost(half, chain, sep, 1, quad, u), 0.0);

  const GridBelief n = standard_normal();
  EXPECT_NEAR(optimal_reconstruction(n, IntervalQuantizer({0.0}), 1).value,
              std::sqrt(2.0 / std::numbers::pi), 1e-3);
  EXPECT_NEAR(optimal_reconstruction(n, IntervalQuantizer({0.0}), 1).value, 0.79789, 1e-3);

  const GridBelief uni = GridBelief::uniform(Grid(0.0, 1.0, 101));
  EXPECT_NEAR(optimal_reconstruction(uni, IntervalQuantizer(), 0).value, 0.5, 1e-6);
}

TEST(OptimalReconstruction, TabularArgminWithLowestIndexTies) {
  const FiniteChain chain({{0.5, 0.5}, {0.5, 0.5}}, {0.5, 0.5});
  // Columns 0 and 2 tie on the one-cell quantizer; column 0 wins.
  const CostModel cost = CostModel::tabular({{1.0, 3.0, 0.0}, {1.0, 0.0, 2.0}}, {10.0, 20.0, 30.0});
  const Reconstruction u =
      optimal_reconstruction(SimplexBelief({0.5, 0.5}), chain, FinitePartition({0, 0}, 1), 0, cost);
  EXPECT_EQ(u.index, 0u);
  EXPECT_EQ(u.value, 10.0);
  const Reconstruction v =
      optimal_reconstruction(SimplexBelief({0.2, 0.8}), chain, FinitePartition({0, 0}, 1), 0, cost);
  EXPECT_EQ(v.index, 1u);
  EXPECT_THROW(optimal_reconstruction(SimplexBelief({1.0, 0.0}), chain, FinitePartition({0, 1}, 2),
                                      1, cost),
               ZeroProbabilitySymbol);
}

TEST(StageCost, Examples) {
  const GridBelief n = standard_normal();
  EXPECT_NEAR(stage_cost(n, IntervalQuantizer()), 1.0, 1e-3);
  EXPECT_NEAR(stage_cost(n, IntervalQuantizer({0.0})), 1.0 - 2.0 / std::numbers::pi, 1e-3);
  EXPECT_NEAR(stage_cost(n, IntervalQuantizer({0.0})), 0.36338, 1e-3);
  const FiniteChain chain({{0.9, 0.1}, {0.2, 0.8}}, {0.5, 0.5});
  EXPECT_EQ(stage_cost(SimplexBelief({0.5, 0.5}), chain, FinitePartition({0, 1}, 2),
                       CostModel::quadratic()),
            0.0);
  EXPECT_EQ(stage_cost(GridBelief::point_mass(n.grid(), 0.3), IntervalQuantizer({0.0})), 0.0);
}

TEST(StageCost, QuadraticClosedFormOnNormalSplits) {
  // Two-cell split of N(0,1) at t: sum of mass * conditional variance,
  // evaluated from the truncated-normal formulas.
  const GridBelief n = standard_normal();
  for (double t : {-1.5, -0.2, 0.0, 0.9}) {
    const double phi = std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
    const double lower = 0.5 * std::erfc(-t / std::sqrt(2.0));
    const double upper = 1.0 - lower;
    // E[X; X<=t] = -phi, E[X^2; X<=t] = lower - t phi.
    const double c_lo = (lower - t * phi) - phi * phi / lower;
    const double c_hi = (upper + t * phi) - phi * phi / upper;
    EXPECT_NEAR(stage_cost(n, IntervalQuantizer({t})), c_lo + c_hi, 1e-4) << t;
  }
}

TEST(StageCost, CentroidIsFirstOrderOptimal) {
  const GridBelief b = GridBelief::normal(Grid(-8, 8, 801), 0.4, 1.3);
  const IntervalQuantizer q({-1.0, 0.2, 1.7});
  const auto cells = cell_weights(b.grid(), q);
  for (std::size_t m = 0; m < q.levels(); ++m) {
    const auto mom = integrate(cells[m], b);
    const double u = optimal_reconstruction(b, q, m).value;
    auto cost_at = [&](double v) { return mom.second - 2.0 * v * mom.first + v * v * mom.zeroth; };
    EXPECT_GE(cost_at(u + 0.01), cost_at(u));
    EXPECT_GE(cost_at(u - 0.01), cost_at(u));
    EXPECT_NEAR(cost_at(u), quadratic_cell_cost(mom), 1e-12);
  }
}

TEST(StageCost, RefinementNeverIncreasesCost) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(-3, 3);
  const GridBelief b = GridBelief::normal(Grid(-8, 8, 801), -0.3, 1.2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> t = {u(gen), u(gen)};
    std::sort(t.begin(), t.end());
    const double base = stage_cost(b, IntervalQuantizer(t));
    double extra = u(gen);
    if (extra == t[0] || extra == t[1]) continue;
    t.push_back(extra);
    std::sort(t.begin(), t.end());
    EXPECT_LE(stage_cost(b, IntervalQuantizer(t)), base + 1e-12);
  }
}

TEST(StageCost, BoundedBySecondMoment) {
  const Grid g(-8, 8, 801);
  for (double mean : {-1.0, 0.0, 2.0}) {
    const GridBelief b = GridBelief::normal(g, mean, 0.8);
    for (const auto& q : enumerate_interval_candidates({2, -2.0, 2.0, 9}))
      EXPECT_LE(stage_cost(b, q), moment(b, 2) + 1e-12);
    EXPECT_LE(stage_cost(b, IntervalQuantizer()), moment(b, 2) + 1e-12);
  }
}

TEST(StageCost, RelabelingInvariance) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  const std::size_t n = 4;
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.25));
  const FiniteChain chain(p, {0.25, 0.25, 0.25, 0.25}, {-1.0, 0.5, 2.0, 3.5});
  std::vector<std::vector<double>> table(n, std::vector<double>(3));
  for (auto& row : table)
    for (double& v : row) v = u(gen);
  const CostModel tab = CostModel::tabular(table);
  std::vector<double> w(n);
  for (double& v : w) v = u(gen);
  const SimplexBelief b = SimplexBelief::normalized(w);
  for (const auto& part : enumerate_finite_partitions(n, 3)) {
    const auto a = part.assignment();
    // Swap labels 0 and 2, and rotate, then compare with the canonical form.
    std::vector<std::size_t> swapped(a.begin(), a.end()), rotated(a.begin(), a.end());
    for (auto& c : swapped) c = c == 0 ? 2 : (c == 2 ? 0 : c);
    for (auto& c : rotated) c = (c + 1) % 3;
    for (const CostModel& cost : {CostModel::quadratic(), tab}) {
      const double ref = stage_cost(b, chain, part, cost);
      EXPECT_NEAR(stage_cost(b, chain, FinitePartition(swapped, 3), cost), ref, 1e-12);
      EXPECT_NEAR(stage_cost(b, chain, FinitePartition(rotated, 3), cost), ref, 1e-12);
    }
  }
}

TEST(StageCost, NegligibleCellsContributeNothing) {
  const Grid g(-8, 8, 801);
  const GridBelief b = GridBelief::normal(g, 0.0, 0.3);
  // The top cell (7.9, inf) holds ~1e-160 of mass.
  EXPECT_NEAR(stage_cost(b, IntervalQuantizer({7.9})), stage_cost(b, IntervalQuantizer()), 1e-15);
  EXPECT_THROW(optimal_reconstruction(b, IntervalQuantizer({7.9}), 1), ZeroProbabilitySymbol);
}

TEST(CostModel, Validation) {
  EXPECT_THROW(CostModel::tabular({}), InvalidArgument);
  EXPECT_THROW(CostModel::tabular({{1.0, 2.0}, {1.0}}), InvalidArgument);
  EXPECT_THROW(CostModel::tabular({{-1.0}}), InvalidArgument);
  EXPECT_THROW(CostModel::tabular({{1.0, 2.0}}, {1.0}), InvalidArgument);
  const CostModel c = CostModel::tabular({{1.0, 2.0}});
  EXPECT_EQ(c.label(1), 1.0);
  EXPECT_EQ(c.entry(0, 1), 2.0);
}

}  // namespace
