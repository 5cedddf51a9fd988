#include "zdq/environment.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "zdq/error.hpp"

namespace zdq {

namespace {

std::string bytes_of(std::span<const double> v) {
  std::string s(v.size() * sizeof(double), '\0');
  if (!v.empty()) std::memcpy(s.data(), v.data(), s.size());
  return s;
}

}  // namespace

GridEnvironment::GridEnvironment(LinearGaussianSource model, Grid grid,
                                 std::vector<IntervalQuantizer> candidates)
    : kernel_(std::make_shared<const PredictionKernel>(model, grid)),
      candidates_(std::move(candidates)) {
  if (candidates_.empty()) throw InvalidArgument("candidate list is empty");
  cells_.reserve(candidates_.size());
  for (const auto& q : candidates_) cells_.push_back(cell_weights(grid, q));
}

GridBelief GridEnvironment::initial_belief() const { return zdq::initial_belief(model(), grid()); }

StageEvaluation GridEnvironment::evaluate(const GridBelief& belief, std::size_t q) const {
  const auto& cells = cells_.at(q);
  StageEvaluation ev;
  ev.masses.assign(cells.size(), 0.0);
  if (belief.is_point_mass()) {
    ev.masses[candidates_[q].classify(belief.atom())] = 1.0;
    return ev;
  }
  for (std::size_t m = 0; m < cells.size(); ++m) {
    const auto mom = integrate(cells[m], belief);
    ev.masses[m] = mom.zeroth;
    ev.cost += quadratic_cell_cost(mom);
  }
  return ev;
}

GridBelief GridEnvironment::posterior(const GridBelief& belief, std::size_t q,
                                      std::size_t m) const {
  if (belief.is_point_mass()) return filter_update(belief, *kernel_, candidates_.at(q), m);
  return filter_update(belief, *kernel_, cells_.at(q).at(m), m);
}

Reconstruction GridEnvironment::reconstruction(const GridBelief& belief, std::size_t q,
                                               std::size_t m) const {
  if (belief.is_point_mass()) return optimal_reconstruction(belief, candidates_.at(q), m);
  const auto mom = integrate(cells_.at(q).at(m), belief);
  if (mom.zeroth < kNegligibleCellMass) throw ZeroProbabilitySymbol(m, mom.zeroth);
  return {mom.first / mom.zeroth, 0};
}

double GridEnvironment::distortion(double x, const Reconstruction& u) const {
  return zdq::distortion(cost_, x, u);
}

BeliefFeatures GridEnvironment::features(const GridBelief& belief) const {
  const double m1 = moment(belief, 1);
  const double m2 = moment(belief, 2);
  return {m1, std::sqrt(std::max(0.0, m2 - m1 * m1)), 0.0};
}

BeliefSnapshot GridEnvironment::snapshot(const GridBelief& belief) const {
  if (belief.is_point_mass()) return {{}, belief.atom()};
  return {{belief.values().begin(), belief.values().end()}, std::nullopt};
}

GridBelief GridEnvironment::from_snapshot(const BeliefSnapshot& s) const {
  if (s.atom) return GridBelief::point_mass(grid(), *s.atom);
  // Keep the bytes of an already normalised snapshot.
  try {
    return GridBelief(grid(), s.values);
  } catch (const InvalidArgument&) {
    return GridBelief::normalized(grid(), s.values);
  }
}

std::string GridEnvironment::memo_key(const GridBelief& belief) const {
  if (belief.is_point_mass()) {
    const double a = belief.atom();
    return "@" + bytes_of({&a, 1});
  }
  return bytes_of(belief.values());
}

FiniteEnvironment::FiniteEnvironment(FiniteChain chain, CostModel cost,
                                     std::vector<FinitePartition> candidates)
    : chain_(std::move(chain)), cost_(std::move(cost)), candidates_(std::move(candidates)) {
  if (candidates_.empty()) throw InvalidArgument("candidate list is empty");
  for (const auto& q : candidates_)
    if (q.alphabet_size() != chain_.size())
      throw InvalidArgument("partition alphabet does not match chain");
  if (!cost_.is_quadratic() && cost_.alphabet_size() != chain_.size())
    throw InvalidArgument("cost table rows do not match chain");
}

StageEvaluation FiniteEnvironment::evaluate(const SimplexBelief& belief, std::size_t q) const {
  const auto& part = candidates_.at(q);
  StageEvaluation ev;
  ev.masses.resize(part.levels());
  for (std::size_t m = 0; m < part.levels(); ++m) ev.masses[m] = cell_mass(belief, part, m);
  ev.cost = stage_cost(belief, chain_, part, cost_);
  return ev;
}

SimplexBelief FiniteEnvironment::posterior(const SimplexBelief& belief, std::size_t q,
                                           std::size_t m) const {
  return filter_update(belief, chain_, candidates_.at(q), m);
}

Reconstruction FiniteEnvironment::reconstruction(const SimplexBelief& belief, std::size_t q,
                                                 std::size_t m) const {
  return optimal_reconstruction(belief, chain_, candidates_.at(q), m, cost_);
}

double FiniteEnvironment::distortion(std::size_t x, const Reconstruction& u) const {
  return zdq::distortion(cost_, chain_, x, u);
}

BeliefFeatures FiniteEnvironment::features(const SimplexBelief& belief) const {
  const double m1 = moment(belief, chain_.state_values(), 1);
  const double m2 = moment(belief, chain_.state_values(), 2);
  return {m1, std::sqrt(std::max(0.0, m2 - m1 * m1)), belief[0]};
}

BeliefSnapshot FiniteEnvironment::snapshot(const SimplexBelief& belief) const {
  return {{belief.probabilities().begin(), belief.probabilities().end()}, std::nullopt};
}

SimplexBelief FiniteEnvironment::from_snapshot(const BeliefSnapshot& s) const {
  try {
    return SimplexBelief(s.values);
  } catch (const InvalidArgument&) {
    return SimplexBelief::normalized(s.values);
  }
}

std::string FiniteEnvironment::memo_key(const SimplexBelief& belief) const {
  return bytes_of(belief.probabilities());
}

FiniteEnvironment make_finite_environment(FiniteChain chain, CostModel cost, std::size_t levels) {
  auto parts = enumerate_finite_partitions(chain.size(), levels);
  return FiniteEnvironment(std::move(chain), std::move(cost), std::move(parts));
}

}  // namespace zdq
