#pragma once

// Design environments: one source model, one cost, and a finite list of
// candidate quantizers, exposing the few operations the solvers and the
// simulator need (stage evaluation, posterior, sampling, decoding). The
// solvers are templates over these two types.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zdq/belief.hpp"
#include "zdq/quantizers.hpp"
#include "zdq/random.hpp"
#include "zdq/source_models.hpp"
#include "zdq/stage_cost.hpp"

namespace zdq {

struct StageEvaluation {
  double cost = 0.0;
  std::vector<double> masses;  // per cell
};

struct BeliefFeatures {
  double mean = 0.0;
  double stddev = 0.0;
  double coordinate = 0.0;  // first simplex coordinate (finite beliefs only)
};

// Plain-data copy of a belief for trees, logs and histograms.
struct BeliefSnapshot {
  std::vector<double> values;
  std::optional<double> atom;
};

class GridEnvironment {
 public:
  using Belief = GridBelief;
  using State = double;
  using Candidate = IntervalQuantizer;

  // Quadratic distortion only.
  GridEnvironment(LinearGaussianSource model, Grid grid, std::vector<IntervalQuantizer> candidates);

  const LinearGaussianSource& model() const noexcept { return kernel_->model(); }
  const Grid& grid() const noexcept { return kernel_->grid(); }
  const PredictionKernel& kernel() const noexcept { return *kernel_; }
  const CostModel& cost() const noexcept { return cost_; }

  std::size_t candidate_count() const noexcept { return candidates_.size(); }
  const IntervalQuantizer& candidate(std::size_t q) const { return candidates_.at(q); }
  std::size_t levels(std::size_t q) const { return candidates_.at(q).levels(); }

  GridBelief initial_belief() const;
  StageEvaluation evaluate(const GridBelief& belief, std::size_t q) const;
  GridBelief posterior(const GridBelief& belief, std::size_t q, std::size_t m) const;
  Reconstruction reconstruction(const GridBelief& belief, std::size_t q, std::size_t m) const;

  std::size_t classify(std::size_t q, double x) const { return candidates_.at(q).classify(x); }
  double distortion(double x, const Reconstruction& u) const;
  double state_value(double x) const noexcept { return x; }
  double sample_initial(RandomStream& rng) const { return model().sample_initial(rng); }
  double sample_next(double x, RandomStream& rng) const { return model().sample_next(x, rng); }

  BeliefFeatures features(const GridBelief& belief) const;
  BeliefSnapshot snapshot(const GridBelief& belief) const;
  GridBelief from_snapshot(const BeliefSnapshot& s) const;
  double distance(const GridBelief& a, const GridBelief& b) const { return tv_distance(a, b); }
  std::string memo_key(const GridBelief& belief) const;
  bool same(const GridBelief& a, const GridBelief& b) const { return a.same_bytes(b); }

 private:
  std::shared_ptr<const PredictionKernel> kernel_;
  CostModel cost_ = CostModel::quadratic();
  std::vector<IntervalQuantizer> candidates_;
  std::vector<std::vector<CellWeights>> cells_;  // per candidate, per cell
};

class FiniteEnvironment {
 public:
  using Belief = SimplexBelief;
  using State = std::size_t;
  using Candidate = FinitePartition;

  FiniteEnvironment(FiniteChain chain, CostModel cost, std::vector<FinitePartition> candidates);

  const FiniteChain& chain() const noexcept { return chain_; }
  const CostModel& cost() const noexcept { return cost_; }

  std::size_t candidate_count() const noexcept { return candidates_.size(); }
  const FinitePartition& candidate(std::size_t q) const { return candidates_.at(q); }
  std::size_t levels(std::size_t q) const { return candidates_.at(q).levels(); }

  SimplexBelief initial_belief() const { return chain_.initial(); }
  StageEvaluation evaluate(const SimplexBelief& belief, std::size_t q) const;
  SimplexBelief posterior(const SimplexBelief& belief, std::size_t q, std::size_t m) const;
  Reconstruction reconstruction(const SimplexBelief& belief, std::size_t q, std::size_t m) const;

  std::size_t classify(std::size_t q, std::size_t x) const { return candidates_.at(q).classify(x); }
  double distortion(std::size_t x, const Reconstruction& u) const;
  double state_value(std::size_t x) const { return chain_.state_value(x); }
  std::size_t sample_initial(RandomStream& rng) const { return chain_.sample_initial(rng); }
  std::size_t sample_next(std::size_t x, RandomStream& rng) const {
    return chain_.sample_next(x, rng);
  }

  BeliefFeatures features(const SimplexBelief& belief) const;
  BeliefSnapshot snapshot(const SimplexBelief& belief) const;
  SimplexBelief from_snapshot(const BeliefSnapshot& s) const;
  double distance(const SimplexBelief& a, const SimplexBelief& b) const { return tv_distance(a, b); }
  std::string memo_key(const SimplexBelief& belief) const;
  bool same(const SimplexBelief& a, const SimplexBelief& b) const { return a.same_bytes(b); }

 private:
  FiniteChain chain_;
  CostModel cost_;
  std::vector<FinitePartition> candidates_;
};

// Every (quantizer) candidate of a finite chain: canonical partitions into at most M cells.
FiniteEnvironment make_finite_environment(FiniteChain chain, CostModel cost, std::size_t levels);

}  // namespace zdq
