#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "zdq/belief_types.hpp"
#include "zdq/random.hpp"

namespace zdq {

// Law of x_0 for the scalar source: normal(mean, stddev), a point mass when
// stddev == 0.
struct InitialLaw {
  double mean = 0.0;
  double stddev = 1.0;
  bool is_point_mass() const noexcept { return stddev == 0.0; }
};

// x_{t+1} = a x_t + w_t with w_t ~ normal(0, sigma^2).
class LinearGaussianSource {
 public:
  // Without an explicit initial law the source starts from its invariant
  // distribution (requires |a| < 1).
  LinearGaussianSource(double a, double sigma, std::optional<InitialLaw> initial = std::nullopt);

  // sigma = 0 for deterministic-dynamics unit tests. Rejected by the design
  // and filtering paths, which need a transition density.
  static LinearGaussianSource noiseless_for_testing(double a, InitialLaw initial);

  double coefficient() const noexcept { return a_; }
  double noise_std() const noexcept { return sigma_; }
  bool is_noiseless() const noexcept { return sigma_ == 0.0; }
  bool is_stable() const noexcept { return a_ > -1.0 && a_ < 1.0; }
  double stationary_std() const;
  InitialLaw initial() const;

  // phi(z | x)
  double transition_density(double z, double x) const;
  double sample_next(double x, RandomStream& rng) const;
  double sample_initial(RandomStream& rng) const;

 private:
  LinearGaussianSource() = default;
  double a_ = 0.0;
  double sigma_ = 1.0;
  std::optional<InitialLaw> initial_;
};

// Finite-alphabet Markov chain with real-valued symbols (default 0..n-1).
class FiniteChain {
 public:
  FiniteChain(std::vector<std::vector<double>> transition, std::vector<double> initial,
              std::vector<double> state_values = {});

  std::size_t size() const noexcept { return n_; }
  double transition(std::size_t from, std::size_t to) const { return p_[from * n_ + to]; }
  std::span<const double> row(std::size_t from) const { return {p_.data() + from * n_, n_}; }
  const SimplexBelief& initial() const noexcept { return initial_; }
  std::span<const double> state_values() const noexcept { return values_; }
  double state_value(std::size_t i) const { return values_[i]; }
  bool strictly_positive() const noexcept { return strictly_positive_; }
  bool irreducible() const;

  std::size_t sample_next(std::size_t x, RandomStream& rng) const;
  std::size_t sample_initial(RandomStream& rng) const;

  // Same dynamics started from another belief.
  FiniteChain with_initial(SimplexBelief initial) const;

 private:
  std::size_t n_;
  std::vector<double> p_;
  SimplexBelief initial_;
  std::vector<double> values_;
  bool strictly_positive_ = false;
};

// C bounds phi, C1 is its Lipschitz constant in z, uniformly in x.
struct DensityBounds {
  double sup = 0.0;
  double lipschitz = 0.0;
};

DensityBounds density_bounds(const LinearGaussianSource& model);

// Draw from a categorical distribution using one uniform.
std::size_t sample_categorical(std::span<const double> probabilities, RandomStream& rng);

SimplexBelief invariant_distribution(const FiniteChain& chain);

// Normal(0, sigma^2 / (1 - a^2)) sampled on `grid`.
GridBelief invariant_distribution(const LinearGaussianSource& model, const Grid& grid);

// Default truncation: +-width stationary standard deviations (or, for a
// point-mass start, around the atom) with `points` nodes.
Grid default_grid(const LinearGaussianSource& model, std::size_t points = 801, double width = 8.0);

// pi_0 of the source on `grid` (a point mass when the initial law is one).
GridBelief initial_belief(const LinearGaussianSource& model, const Grid& grid);

}  // namespace zdq
