#pragma once

// Brute-force references for small instances. These routines read the
// model and cost data but share no filtering, cost or search code with the
// solvers they certify.

#include <cstddef>
#include <vector>

#include "zdq/belief_types.hpp"
#include "zdq/quantizers.hpp"
#include "zdq/source_models.hpp"
#include "zdq/stage_cost.hpp"

namespace zdq::oracles {

// Exact optimum of E[(1/T) sum_t c(pi_t, Q_t)] over Markov policies, by
// exhaustive depth-first search over every canonical partition with at most
// M cells at every reachable belief. Throws BudgetExceeded past `budget`
// (belief, partition) evaluations.
double brute_force_finite(const SimplexBelief& initial, const FiniteChain& chain,
                          std::size_t levels, std::size_t horizon, const CostModel& cost,
                          std::size_t budget = 10'000'000);

// Exact optimum over all admissible encoders for T <= 2: q_0 = f_0(x_0),
// q_1 = f_1(q_0, x_1), each decoded optimally from the symbols received.
// Starts from chain.initial().
double exhaustive_admissible_search(const FiniteChain& chain, std::size_t levels,
                                    std::size_t horizon, const CostModel& cost);

struct LloydMaxResult {
  IntervalQuantizer quantizer;
  std::vector<double> reconstructions;
  double mse = 0.0;
  std::size_t iterations = 0;
};

// Alternating centroid / midpoint design for squared error on a density.
// Throws NotConverged when thresholds still move by >= tol after max_iter.
LloydMaxResult lloyd_max(const GridBelief& belief, std::size_t levels, std::size_t max_iter = 1000,
                         double tol = 1e-10);

}  // namespace zdq::oracles
