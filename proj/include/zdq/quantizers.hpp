#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "zdq/belief_types.hpp"
#include "zdq/simd/kernels.hpp"

namespace zdq {

// Cells are indexed 0..M-1 throughout.

// Scalar quantizer with convex (interval) cells
// (-inf, t_0], (t_0, t_1], ..., (t_{M-2}, inf).
class IntervalQuantizer {
 public:
  IntervalQuantizer() = default;  // one cell
  explicit IntervalQuantizer(std::vector<double> thresholds);

  std::size_t levels() const noexcept { return thresholds_.size() + 1; }
  std::span<const double> thresholds() const noexcept { return thresholds_; }

  // Boundary points belong to the lower cell.
  std::size_t classify(double x) const;

  // (left, right] of cell m; infinite at the ends.
  std::pair<double, double> cell_bounds(std::size_t m) const;

  friend bool operator==(const IntervalQuantizer&, const IntervalQuantizer&) = default;

 private:
  std::vector<double> thresholds_;
};

// d-dimensional quantizer whose cells are intersections of half-spaces.
// For i < j the pair (i, j) carries a unit normal n and offset b; cell i lies
// on the side n.x <= b and cell j on the side n.x >= b.
class HyperplaneQuantizer {
 public:
  struct Hyperplane {
    std::vector<double> normal;
    double offset = 0.0;
  };

  // `planes` lists the pairs in order (0,1), (0,2), ..., (0,M-1), (1,2), ...
  // Normals are rescaled to unit length.
  HyperplaneQuantizer(std::size_t dimension, std::size_t levels, std::vector<Hyperplane> planes);

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t levels() const noexcept { return levels_; }
  const Hyperplane& plane(std::size_t i, std::size_t j) const;
  std::span<const Hyperplane> planes() const noexcept { return planes_; }

  // Lowest index whose half-space constraints all hold. Throws
  // EmptyClassification when no cell contains x.
  std::size_t classify(std::span<const double> x) const;

 private:
  std::size_t pair_index(std::size_t i, std::size_t j) const;
  std::size_t dim_;
  std::size_t levels_;
  std::vector<Hyperplane> planes_;
};

// Assignment of each finite-alphabet symbol to a cell. Cells may be empty.
class FinitePartition {
 public:
  FinitePartition(std::vector<std::size_t> assignment, std::size_t levels);

  std::size_t levels() const noexcept { return levels_; }
  std::size_t alphabet_size() const noexcept { return assignment_.size(); }
  std::size_t classify(std::size_t symbol) const { return assignment_.at(symbol); }
  std::span<const std::size_t> assignment() const noexcept { return assignment_; }

  // Relabelled so cells appear in order of first use.
  FinitePartition canonical() const;

  friend bool operator==(const FinitePartition&, const FinitePartition&) = default;

 private:
  std::vector<std::size_t> assignment_;
  std::size_t levels_;
};

// Quadrature weights of one interval cell on a grid: w[k] is the integral
// over the cell of the hat function centred at node begin + k, so
// sum_k w[k] f(x_{begin+k}) integrates the piecewise-linear interpolant of
// f over the cell. wx and wxx fold in x and x^2. The weights of the cells
// of a quantizer add up to the trapezoid weights of the grid.
struct CellWeights {
  std::size_t begin = 0;
  std::vector<double> w;
  std::vector<double> wx;
  std::vector<double> wxx;

  std::size_t end() const noexcept { return begin + w.size(); }
  bool empty() const noexcept { return w.empty(); }
};

CellWeights interval_cell_weights(const Grid& grid, double left, double right);
std::vector<CellWeights> cell_weights(const Grid& grid, const IntervalQuantizer& q);

// (mass, first moment, second moment) of a belief restricted to the cell.
simd::Moments3 integrate(const CellWeights& cell, const GridBelief& belief);

double cell_mass(const GridBelief& belief, const IntervalQuantizer& q, std::size_t m);
double cell_mass(const SimplexBelief& belief, const FinitePartition& q, std::size_t m);

struct IntervalCandidateSpec {
  std::size_t levels = 2;
  double lo = -1.0;
  double hi = 1.0;
  std::size_t steps = 3;
};

// All strictly increasing (M-1)-subsets of `steps` evenly spaced points on
// [lo, hi], in lexicographic order.
std::vector<IntervalQuantizer> enumerate_interval_candidates(const IntervalCandidateSpec& spec);

// All partitions of an n-letter alphabet into at most M labelled cells, one
// representative per relabelling class (canonical first-use order).
std::vector<FinitePartition> enumerate_finite_partitions(std::size_t n, std::size_t levels);

using Quantizer = std::variant<IntervalQuantizer, HyperplaneQuantizer, FinitePartition>;

}  // namespace zdq
