#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "zdq/belief_types.hpp"
#include "zdq/quantizers.hpp"
#include "zdq/source_models.hpp"

namespace zdq {

inline constexpr double kDefaultMassEpsilon = 1e-12;

// Dense matrix phi(x_i | x_j) over the nodes of a grid, built once per
// model and grid. Predicting a density is then one matrix-vector product.
class PredictionKernel {
 public:
  PredictionKernel(LinearGaussianSource model, Grid grid);

  const LinearGaussianSource& model() const noexcept { return model_; }
  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> trapezoid_weights() const noexcept { return trapezoid_; }
  double at(std::size_t row, std::size_t col) const { return matrix_[row * grid_.size() + col]; }

  // Density z -> sum_{j in [begin, begin + weighted.size())} phi(z | x_j) weighted[j - begin]
  // at every node, rescaled to unit integral.
  GridBelief propagate(std::size_t begin, std::span<const double> weighted) const;

  // phi(. | x) on the grid, rescaled to unit integral.
  GridBelief propagate_point(double x) const;

 private:
  LinearGaussianSource model_;
  Grid grid_;
  std::vector<double> nodes_;
  std::vector<double> trapezoid_;
  std::vector<double> matrix_;
};

// Chapman-Kolmogorov step z -> int phi(z|x) pi(dx).
GridBelief predict(const GridBelief& belief, const PredictionKernel& kernel);
SimplexBelief predict(const SimplexBelief& belief, const FiniteChain& chain);

// Posterior after observing symbol m under quantizer q, pushed through the
// dynamics: z -> (1/pi(B_m)) int_{B_m} phi(z|x) pi(dx). Throws
// ZeroProbabilitySymbol when pi(B_m) <= eps_mass.
GridBelief filter_update(const GridBelief& belief, const PredictionKernel& kernel,
                         const IntervalQuantizer& q, std::size_t m,
                         double eps_mass = kDefaultMassEpsilon);
// Same with precomputed cell weights (m's cell) for the DP inner loop.
GridBelief filter_update(const GridBelief& belief, const PredictionKernel& kernel,
                         const CellWeights& cell, std::size_t m,
                         double eps_mass = kDefaultMassEpsilon);
SimplexBelief filter_update(const SimplexBelief& belief, const FiniteChain& chain,
                            const FinitePartition& q, std::size_t m,
                            double eps_mass = kDefaultMassEpsilon);

// Total variation with the factor-2 normalisation (disjoint supports -> 2).
double tv_distance(const GridBelief& a, const GridBelief& b);
double tv_distance(const SimplexBelief& a, const SimplexBelief& b);

struct SMembershipReport {
  double max_density = 0.0;
  double lipschitz_estimate = 0.0;
  bool pass = false;
};

SMembershipReport check_S_membership(const GridBelief& belief, const DensityBounds& bounds,
                                     double tol);

// k-th raw moment, k in {1, 2}.
double moment(const GridBelief& belief, int k);
double moment(const SimplexBelief& belief, std::span<const double> state_values, int k);

// "grid_x,density" rows.
void write_csv(std::ostream& out, const GridBelief& belief);

}  // namespace zdq
