#include "zdq/stage_cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zdq/error.hpp"

namespace zdq {

CostModel CostModel::quadratic() { return CostModel{}; }

CostModel CostModel::tabular(std::vector<std::vector<double>> table, std::vector<double> labels) {
  CostModel c;
  c.kind_ = Kind::bounded_tabular;
  c.rows_ = table.size();
  if (c.rows_ == 0 || table.front().empty()) throw InvalidArgument("cost table is empty");
  c.cols_ = table.front().size();
  for (const auto& row : table) {
    if (row.size() != c.cols_) throw InvalidArgument("cost table rows differ in length");
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw InvalidArgument("cost table entries must be finite and nonnegative");
      c.table_.push_back(v);
    }
  }
  if (labels.empty()) {
    labels.resize(c.cols_);
    for (std::size_t k = 0; k < c.cols_; ++k) labels[k] = static_cast<double>(k);
  }
  if (labels.size() != c.cols_) throw InvalidArgument("reconstruction labels do not match table");
  c.labels_ = std::move(labels);
  return c;
}

double quadratic_cell_cost(const simd::Moments3& cell) {
  if (cell.zeroth < kNegligibleCellMass) return 0.0;
  return std::max(0.0, cell.second - cell.first * cell.first / cell.zeroth);
}

Reconstruction optimal_reconstruction(const GridBelief& belief, const IntervalQuantizer& q,
                                      std::size_t m) {
  if (m >= q.levels()) throw InvalidArgument("cell index out of range");
  if (belief.is_point_mass()) {
    if (q.classify(belief.atom()) != m) throw ZeroProbabilitySymbol(m, 0.0);
    return {belief.atom(), 0};
  }
  const auto [l, r] = q.cell_bounds(m);
  const auto mom = integrate(interval_cell_weights(belief.grid(), l, r), belief);
  if (mom.zeroth < kNegligibleCellMass) throw ZeroProbabilitySymbol(m, mom.zeroth);
  return {mom.first / mom.zeroth, 0};
}

namespace {

void check_finite(const SimplexBelief& belief, const FiniteChain& chain, const FinitePartition& q,
                  const CostModel& cost) {
  if (belief.size() != chain.size() || q.alphabet_size() != chain.size())
    throw InvalidArgument("belief, chain and partition sizes differ");
  if (!cost.is_quadratic() && cost.alphabet_size() != chain.size())
    throw InvalidArgument("cost table rows do not match the alphabet");
}

}  // namespace

double finite_cell_cost(const SimplexBelief& belief, const FiniteChain& chain,
                        const FinitePartition& q, std::size_t m, const CostModel& cost,
                        const Reconstruction& u) {
  double s = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i)
    if (q.classify(i) == m) s += belief[i] * distortion(cost, chain, i, u);
  return s;
}

Reconstruction optimal_reconstruction(const SimplexBelief& belief, const FiniteChain& chain,
                                      const FinitePartition& q, std::size_t m,
                                      const CostModel& cost) {
  check_finite(belief, chain, q, cost);
  const double mass = cell_mass(belief, q, m);
  if (mass < kNegligibleCellMass) throw ZeroProbabilitySymbol(m, mass);
  if (cost.is_quadratic()) {
    double first = 0.0;
    for (std::size_t i = 0; i < chain.size(); ++i)
      if (q.classify(i) == m) first += belief[i] * chain.state_value(i);
    return {first / mass, 0};
  }
  Reconstruction best{cost.label(0), 0};
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cost.reconstruction_count(); ++k) {
    const Reconstruction u{cost.label(k), k};
    const double c = finite_cell_cost(belief, chain, q, m, cost, u);
    if (c < best_cost) {
      best_cost = c;
      best = u;
    }
  }
  return best;
}

double stage_cost(const GridBelief& belief, const IntervalQuantizer& q) {
  if (belief.is_point_mass()) return 0.0;
  double total = 0.0;
  for (const auto& cell : cell_weights(belief.grid(), q))
    total += quadratic_cell_cost(integrate(cell, belief));
  return total;
}

double stage_cost(const SimplexBelief& belief, const FiniteChain& chain, const FinitePartition& q,
                  const CostModel& cost) {
  check_finite(belief, chain, q, cost);
  double total = 0.0;
  for (std::size_t m = 0; m < q.levels(); ++m) {
    if (cell_mass(belief, q, m) < kNegligibleCellMass) continue;
    // Quadratic cells use the centred sum, which is exactly zero on
    // single-symbol cells.
    total += finite_cell_cost(belief, chain, q, m, cost,
                              optimal_reconstruction(belief, chain, q, m, cost));
  }
  return total;
}

double distortion(const CostModel& cost, double x, const Reconstruction& u) {
  if (!cost.is_quadratic()) throw InvalidArgument("tabular cost needs a finite source symbol");
  return (x - u.value) * (x - u.value);
}

double distortion(const CostModel& cost, const FiniteChain& chain, std::size_t x,
                  const Reconstruction& u) {
  if (cost.is_quadratic()) {
    const double d = chain.state_value(x) - u.value;
    return d * d;
  }
  return cost.entry(x, u.index);
}

}  // namespace zdq
