#include "zdq/dp_designer.hpp"

#include <algorithm>
#include <cmath>

namespace zdq {

std::optional<std::size_t> PolicyTree::child(std::size_t node, std::size_t symbol) const {
  for (const auto& b : nodes.at(node).children)
    if (b.symbol == symbol) return b.child;
  return std::nullopt;
}

double max_bellman_violation(const PolicyTree& tree) {
  double worst = 0.0;
  const double inv_horizon = 1.0 / static_cast<double>(tree.horizon);
  for (const auto& node : tree.nodes) {
    double rhs = node.stage_cost * inv_horizon;
    double prob = 0.0;
    for (const auto& b : node.children) {
      rhs += b.probability * tree.nodes.at(b.child).value;
      prob += b.probability;
    }
    worst = std::max(worst, std::fabs(node.value - rhs));
    if (!node.children.empty())
      worst = std::max(worst, std::fabs(prob + node.pruned_mass - 1.0));
  }
  return worst;
}

double expected_continuation(std::span<const double> masses,
                             const std::map<std::size_t, double>& next_values, double eps_mass) {
  double total = 0.0;
  for (std::size_t m = 0; m < masses.size(); ++m) {
    if (!(masses[m] > eps_mass)) continue;
    const auto it = next_values.find(m);
    if (it == next_values.end())
      throw InvalidArgument("no continuation value for symbol " + std::to_string(m));
    total += masses[m] * it->second;
  }
  return total;
}

double expected_continuation(const GridBelief& belief, const IntervalQuantizer& q,
                             const std::map<std::size_t, double>& next_values) {
  std::vector<double> masses(q.levels());
  for (std::size_t m = 0; m < q.levels(); ++m) masses[m] = cell_mass(belief, q, m);
  return expected_continuation(masses, next_values);
}

double expected_continuation(const SimplexBelief& belief, const FinitePartition& q,
                             const std::map<std::size_t, double>& next_values) {
  std::vector<double> masses(q.levels());
  for (std::size_t m = 0; m < q.levels(); ++m) masses[m] = cell_mass(belief, q, m);
  return expected_continuation(masses, next_values);
}

template DesignResult solve_finite_horizon(const GridEnvironment&, const GridBelief&, std::size_t,
                                           const DesignOptions&);
template DesignResult solve_finite_horizon(const FiniteEnvironment&, const SimplexBelief&,
                                           std::size_t, const DesignOptions&);
template PolicyTree greedy_policy_tree(const GridEnvironment&, const GridBelief&, std::size_t,
                                       double);
template PolicyTree greedy_policy_tree(const FiniteEnvironment&, const SimplexBelief&, std::size_t,
                                       double);

}  // namespace zdq
