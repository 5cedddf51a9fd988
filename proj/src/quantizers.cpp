#include "zdq/quantizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "zdq/error.hpp"

namespace zdq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

IntervalQuantizer::IntervalQuantizer(std::vector<double> thresholds)
    : thresholds_(std::move(thresholds)) {
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    if (!std::isfinite(thresholds_[i])) throw InvalidArgument("thresholds must be finite");
    if (i > 0 && !(thresholds_[i] > thresholds_[i - 1]))
      throw InvalidArgument("thresholds must be strictly increasing");
  }
}

std::size_t IntervalQuantizer::classify(double x) const {
  // First threshold >= x; x == t_k stays in cell k.
  return static_cast<std::size_t>(
      std::lower_bound(thresholds_.begin(), thresholds_.end(), x) - thresholds_.begin());
}

std::pair<double, double> IntervalQuantizer::cell_bounds(std::size_t m) const {
  if (m >= levels()) throw InvalidArgument("cell index out of range");
  const double left = m == 0 ? -kInf : thresholds_[m - 1];
  const double right = m + 1 == levels() ? kInf : thresholds_[m];
  return {left, right};
}

HyperplaneQuantizer::HyperplaneQuantizer(std::size_t dimension, std::size_t levels,
                                         std::vector<Hyperplane> planes)
    : dim_(dimension), levels_(levels), planes_(std::move(planes)) {
  if (dim_ < 2) throw InvalidArgument("hyperplane quantizer needs dimension >= 2");
  if (levels_ < 1) throw InvalidArgument("quantizer needs at least one level");
  if (planes_.size() != levels_ * (levels_ - 1) / 2)
    throw InvalidArgument("expected M(M-1)/2 hyperplanes");
  for (auto& h : planes_) {
    if (h.normal.size() != dim_) throw InvalidArgument("hyperplane normal has wrong dimension");
    double norm = 0.0;
    for (double v : h.normal) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) throw InvalidArgument("hyperplane normal must be nonzero");
    if (std::fabs(norm - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) {
      for (double& v : h.normal) v /= norm;
      h.offset /= norm;
    }
  }
}

std::size_t HyperplaneQuantizer::pair_index(std::size_t i, std::size_t j) const {
  // Row-major position of (i, j), i < j, in the strict upper triangle.
  return i * levels_ - i * (i + 1) / 2 + (j - i - 1);
}

const HyperplaneQuantizer::Hyperplane& HyperplaneQuantizer::plane(std::size_t i,
                                                                  std::size_t j) const {
  if (!(i < j && j < levels_)) throw InvalidArgument("hyperplane pair must satisfy i < j < M");
  return planes_[pair_index(i, j)];
}

std::size_t HyperplaneQuantizer::classify(std::span<const double> x) const {
  if (x.size() != dim_) throw InvalidArgument("point has wrong dimension");
  for (std::size_t i = 0; i < levels_; ++i) {
    bool inside = true;
    for (std::size_t j = 0; j < levels_ && inside; ++j) {
      if (j == i) continue;
      const Hyperplane& h = plane(std::min(i, j), std::max(i, j));
      double s = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) s += h.normal[k] * x[k];
      inside = i < j ? s <= h.offset : s >= h.offset;
    }
    if (inside) return i;
  }
  throw EmptyClassification();
}

FinitePartition::FinitePartition(std::vector<std::size_t> assignment, std::size_t levels)
    : assignment_(std::move(assignment)), levels_(levels) {
  if (levels_ < 1) throw InvalidArgument("partition needs at least one level");
  if (assignment_.empty()) throw InvalidArgument("partition needs a nonempty alphabet");
  for (std::size_t c : assignment_)
    if (c >= levels_) throw InvalidArgument("partition assigns a symbol to a nonexistent cell");
}

FinitePartition FinitePartition::canonical() const {
  std::vector<std::size_t> relabel(levels_, levels_);
  std::size_t next = 0;
  std::vector<std::size_t> out(assignment_.size());
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    std::size_t& r = relabel[assignment_[i]];
    if (r == levels_) r = next++;
    out[i] = r;
  }
  return FinitePartition(std::move(out), levels_);
}

CellWeights interval_cell_weights(const Grid& grid, double left, double right) {
  CellWeights cell;
  const double lo = std::max(left, grid.lo());
  const double hi = std::min(right, grid.hi());
  if (!(lo < hi)) return cell;
  const double h = grid.spacing();
  const std::size_t last = grid.size() - 1;
  const auto to_index = [&](double v) {
    const double f = (v - grid.lo()) / h;
    return std::clamp<double>(f, 0.0, static_cast<double>(last));
  };
  const std::size_t i0 = static_cast<std::size_t>(std::floor(to_index(lo)));
  const std::size_t i1 = static_cast<std::size_t>(std::ceil(to_index(hi)));
  cell.begin = i0;
  cell.w.reserve(i1 - i0 + 1);
  for (std::size_t k = i0; k <= i1; ++k) {
    const double xk = grid.node(k);
    double wk = 0.0;
    if (k > 0) {  // rising half on [x_{k-1}, x_k]
      const double a = grid.node(k - 1);
      const double l = std::max(lo, a);
      const double u = std::min(hi, xk);
      if (u > l) wk += ((u - a) * (u - a) - (l - a) * (l - a)) / (2.0 * h);
    }
    if (k < last) {  // falling half on [x_k, x_{k+1}]
      const double b = grid.node(k + 1);
      const double l = std::max(lo, xk);
      const double u = std::min(hi, b);
      if (u > l) wk += ((b - l) * (b - l) - (b - u) * (b - u)) / (2.0 * h);
    }
    cell.w.push_back(wk);
  }
  cell.wx.resize(cell.w.size());
  cell.wxx.resize(cell.w.size());
  for (std::size_t k = 0; k < cell.w.size(); ++k) {
    const double x = grid.node(i0 + k);
    cell.wx[k] = cell.w[k] * x;
    cell.wxx[k] = cell.w[k] * x * x;
  }
  return cell;
}

std::vector<CellWeights> cell_weights(const Grid& grid, const IntervalQuantizer& q) {
  std::vector<CellWeights> cells;
  cells.reserve(q.levels());
  for (std::size_t m = 0; m < q.levels(); ++m) {
    const auto [l, r] = q.cell_bounds(m);
    cells.push_back(interval_cell_weights(grid, l, r));
  }
  return cells;
}

simd::Moments3 integrate(const CellWeights& cell, const GridBelief& belief) {
  if (cell.empty()) return {};
  if (cell.end() > belief.grid().size()) throw InvalidArgument("cell weights do not match grid");
  return simd::active().moments3(cell.w.data(), cell.wx.data(), cell.wxx.data(),
                                 belief.values().data() + cell.begin, cell.w.size());
}

double cell_mass(const GridBelief& belief, const IntervalQuantizer& q, std::size_t m) {
  if (m >= q.levels()) throw InvalidArgument("cell index out of range");
  if (belief.is_point_mass()) return q.classify(belief.atom()) == m ? 1.0 : 0.0;
  const auto [l, r] = q.cell_bounds(m);
  return integrate(interval_cell_weights(belief.grid(), l, r), belief).zeroth;
}

double cell_mass(const SimplexBelief& belief, const FinitePartition& q, std::size_t m) {
  if (m >= q.levels()) throw InvalidArgument("cell index out of range");
  if (belief.size() != q.alphabet_size())
    throw InvalidArgument("partition alphabet does not match belief");
  double mass = 0.0;
  for (std::size_t i = 0; i < belief.size(); ++i)
    if (q.classify(i) == m) mass += belief[i];
  return mass;
}

std::vector<IntervalQuantizer> enumerate_interval_candidates(const IntervalCandidateSpec& spec) {
  if (spec.levels < 1) throw InvalidArgument("levels must be >= 1");
  if (spec.levels == 1) return {IntervalQuantizer()};
  const std::size_t k = spec.levels - 1;
  if (spec.steps < k) throw InvalidArgument("steps must be at least levels - 1");
  if (spec.steps > 1 && !(spec.lo < spec.hi)) throw InvalidArgument("candidate range needs lo < hi");
  std::vector<double> points(spec.steps);
  for (std::size_t i = 0; i < spec.steps; ++i)
    points[i] = spec.steps == 1 ? spec.lo
                                : spec.lo + (spec.hi - spec.lo) * static_cast<double>(i) /
                                                static_cast<double>(spec.steps - 1);

  std::vector<IntervalQuantizer> out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    std::vector<double> t(k);
    for (std::size_t i = 0; i < k; ++i) t[i] = points[idx[i]];
    out.emplace_back(std::move(t));
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == spec.steps - k + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

std::vector<FinitePartition> enumerate_finite_partitions(std::size_t n, std::size_t levels) {
  if (n < 1 || levels < 1) throw InvalidArgument("need n >= 1 and M >= 1");
  // Restricted growth strings a_0 = 0, a_i <= 1 + max(a_0..a_{i-1}), a_i < M,
  // produced in lexicographic order.
  std::vector<FinitePartition> out;
  std::vector<std::size_t> a(n, 0);
  std::vector<std::size_t> prefix_max(n, 0);
  while (true) {
    out.emplace_back(a, levels);
    std::size_t i = n;
    while (i > 1) {
      const std::size_t limit = std::min(prefix_max[i - 2] + 1, levels - 1);
      if (a[i - 1] < limit) break;
      --i;
    }
    if (i <= 1) break;
    ++a[i - 1];
    prefix_max[i - 1] = std::max(prefix_max[i - 2], a[i - 1]);
    for (std::size_t j = i; j < n; ++j) {
      a[j] = 0;
      prefix_max[j] = prefix_max[j - 1];
    }
  }
  return out;
}

}  // namespace zdq
