#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "zdq/belief_types.hpp"
#include "zdq/quantizers.hpp"
#include "zdq/simd/kernels.hpp"
#include "zdq/source_models.hpp"

namespace zdq {

// Cells lighter than this contribute nothing and have no reconstruction.
inline constexpr double kNegligibleCellMass = 1e-12;

// Distortion c0(x, u): squared error on the real line, or a bounded table
// over (source symbol, reconstruction index) for finite alphabets.
class CostModel {
 public:
  enum class Kind { quadratic, bounded_tabular };

  static CostModel quadratic();
  // table[x][k] = c0(x, u_k); `labels` are the u_k values (default 0..K-1).
  static CostModel tabular(std::vector<std::vector<double>> table, std::vector<double> labels = {});

  Kind kind() const noexcept { return kind_; }
  bool is_quadratic() const noexcept { return kind_ == Kind::quadratic; }
  std::size_t alphabet_size() const noexcept { return rows_; }
  std::size_t reconstruction_count() const noexcept { return cols_; }
  double entry(std::size_t x, std::size_t k) const { return table_[x * cols_ + k]; }
  double label(std::size_t k) const { return labels_[k]; }

 private:
  Kind kind_ = Kind::quadratic;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> table_;
  std::vector<double> labels_;
};

// Decoder output for one cell. `index` is the reconstruction-set index for
// tabular costs and 0 for quadratic ones.
struct Reconstruction {
  double value = 0.0;
  std::size_t index = 0;
};

// mass * conditional variance = second - first^2 / mass, clamped at 0.
double quadratic_cell_cost(const simd::Moments3& cell);

// Conditional mean of the cell (quadratic cost).
Reconstruction optimal_reconstruction(const GridBelief& belief, const IntervalQuantizer& q,
                                      std::size_t m);
Reconstruction optimal_reconstruction(const SimplexBelief& belief, const FiniteChain& chain,
                                      const FinitePartition& q, std::size_t m,
                                      const CostModel& cost);

// c(pi, Q) = sum over cells of min_u int_{B_m} c0(x, u) pi(dx).
double stage_cost(const GridBelief& belief, const IntervalQuantizer& q);
double stage_cost(const SimplexBelief& belief, const FiniteChain& chain, const FinitePartition& q,
                  const CostModel& cost);

// Cost of decoding cell m to u for a finite belief: sum_{x in B_m} pi(x) c0(x, u).
double finite_cell_cost(const SimplexBelief& belief, const FiniteChain& chain,
                        const FinitePartition& q, std::size_t m, const CostModel& cost,
                        const Reconstruction& u);

double distortion(const CostModel& cost, double x, const Reconstruction& u);
double distortion(const CostModel& cost, const FiniteChain& chain, std::size_t x,
                  const Reconstruction& u);

}  // namespace zdq
