#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace zdq {

// Uniform grid of `points` nodes spanning [lo, hi].
class Grid {
 public:
  Grid(double lo, double hi, std::size_t points);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t size() const noexcept { return points_; }
  double spacing() const noexcept { return (hi_ - lo_) / static_cast<double>(points_ - 1); }
  double node(std::size_t i) const noexcept {
    return i + 1 == points_ ? hi_ : lo_ + static_cast<double>(i) * spacing();
  }

  std::vector<double> nodes() const;
  std::vector<double> trapezoid_weights() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double lo_;
  double hi_;
  std::size_t points_;
};

// Density belief sampled at the nodes of a grid, or a point mass.
// Densities integrate to one under the trapezoid rule.
class GridBelief {
 public:
  // Values must already integrate to one within 1e-9.
  GridBelief(Grid grid, std::vector<double> values);

  // Rescales `values` to unit trapezoid integral and records |integral - 1|.
  static GridBelief normalized(Grid grid, std::vector<double> values);
  static GridBelief point_mass(Grid grid, double atom);
  static GridBelief normal(Grid grid, double mean, double stddev);
  static GridBelief uniform(Grid grid);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  bool is_point_mass() const noexcept { return atom_.has_value(); }
  double atom() const { return atom_.value(); }

  // Absolute normalisation correction applied when the belief was built.
  double renormalization_drift() const noexcept { return drift_; }

  // Identity of the numerical content: grid, atom and density bytes.
  bool same_bytes(const GridBelief& other) const noexcept;

 private:
  GridBelief() = default;
  Grid grid_{0.0, 1.0, 16};
  std::vector<double> values_;
  std::optional<double> atom_;
  double drift_ = 0.0;
};

// Probability vector over a finite alphabet.
class SimplexBelief {
 public:
  explicit SimplexBelief(std::vector<double> probabilities);

  // Rescales to unit sum.
  static SimplexBelief normalized(std::vector<double> weights);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> probabilities() const noexcept { return p_; }

  bool same_bytes(const SimplexBelief& other) const noexcept;

 private:
  struct Unchecked {};
  SimplexBelief(Unchecked, std::vector<double> p) : p_(std::move(p)) {}
  std::vector<double> p_;
};

}  // namespace zdq
