#include "zdq/belief.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <ostream>

#include "zdq/error.hpp"
#include "zdq/simd/kernels.hpp"

namespace zdq {

namespace {

double trapezoid_integral(const Grid& grid, std::span<const double> v) {
  const double inner = simd::sum(v);
  return grid.spacing() * (inner - 0.5 * (v.front() + v.back()));
}

bool same_doubles(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

}  // namespace

Grid::Grid(double lo, double hi, std::size_t points) : lo_(lo), hi_(hi), points_(points) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw InvalidArgument("grid needs finite lo < hi");
  if (points < 16) throw InvalidArgument("grid needs at least 16 points");
}

std::vector<double> Grid::nodes() const {
  std::vector<double> x(points_);
  for (std::size_t i = 0; i < points_; ++i) x[i] = node(i);
  return x;
}

std::vector<double> Grid::trapezoid_weights() const {
  std::vector<double> w(points_, spacing());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

GridBelief::GridBelief(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw InvalidArgument("density size does not match grid");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("density values must be finite and nonnegative");
  const double total = trapezoid_integral(grid_, values_);
  if (std::fabs(total - 1.0) > 1e-9)
    throw InvalidArgument("density does not integrate to 1 (integral " + std::to_string(total) +
                          ")");
}

GridBelief GridBelief::normalized(Grid grid, std::vector<double> values) {
  if (values.size() != grid.size()) throw InvalidArgument("density size does not match grid");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("density values must be finite and nonnegative");
  const double total = trapezoid_integral(grid, values);
  if (!(total > 0.0)) throw InvalidArgument("density has zero mass on the grid");
  simd::active().scale(values.data(), 1.0 / total, values.size());
  GridBelief b;
  b.grid_ = grid;
  b.values_ = std::move(values);
  b.drift_ = std::fabs(total - 1.0);
  return b;
}

GridBelief GridBelief::point_mass(Grid grid, double atom) {
  if (!std::isfinite(atom)) throw InvalidArgument("point mass location must be finite");
  GridBelief b;
  b.grid_ = grid;
  b.values_.assign(grid.size(), 0.0);
  b.atom_ = atom;
  return b;
}

GridBelief GridBelief::normal(Grid grid, double mean, double stddev) {
  if (!(stddev > 0.0)) throw InvalidArgument("normal belief needs stddev > 0");
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double u = (grid.node(i) - mean) / stddev;
    v[i] = std::exp(-0.5 * u * u);
  }
  return normalized(grid, std::move(v));
}

GridBelief GridBelief::uniform(Grid grid) {
  return normalized(grid, std::vector<double>(grid.size(), 1.0));
}

bool GridBelief::same_bytes(const GridBelief& other) const noexcept {
  if (!(grid_ == other.grid_) || atom_.has_value() != other.atom_.has_value()) return false;
  if (atom_ && std::memcmp(&*atom_, &*other.atom_, sizeof(double)) != 0) return false;
  return same_doubles(values_, other.values_);
}

SimplexBelief::SimplexBelief(std::vector<double> probabilities) : p_(std::move(probabilities)) {
  if (p_.empty()) throw InvalidArgument("belief over an empty alphabet");
  double total = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("probabilities must be finite and nonnegative");
    total += v;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw InvalidArgument("probabilities do not sum to 1");
}

SimplexBelief SimplexBelief::normalized(std::vector<double> weights) {
  double total = 0.0;
  for (double v : weights) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("weights must be finite and nonnegative");
    total += v;
  }
  if (!(total > 0.0)) throw InvalidArgument("weights have zero total");
  for (double& v : weights) v /= total;
  return SimplexBelief(Unchecked{}, std::move(weights));
}

bool SimplexBelief::same_bytes(const SimplexBelief& other) const noexcept {
  return same_doubles(p_, other.p_);
}

PredictionKernel::PredictionKernel(LinearGaussianSource model, Grid grid)
    : model_(model), grid_(grid), nodes_(grid.nodes()), trapezoid_(grid.trapezoid_weights()) {
  if (model_.is_noiseless()) throw InvalidArgument("prediction kernel needs noise_std > 0");
  const std::size_t n = grid_.size();
  matrix_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      matrix_[i * n + j] = model_.transition_density(nodes_[i], nodes_[j]);
}

GridBelief PredictionKernel::propagate(std::size_t begin, std::span<const double> weighted) const {
  const std::size_t n = grid_.size();
  if (begin + weighted.size() > n) throw InvalidArgument("weights exceed grid");
  std::vector<double> out(n);
  simd::active().matvec(matrix_.data() + begin, n, weighted.size(), n, weighted.data(),
                        out.data());
  return GridBelief::normalized(grid_, std::move(out));
}

GridBelief PredictionKernel::propagate_point(double x) const {
  std::vector<double> out(grid_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = model_.transition_density(nodes_[i], x);
  return GridBelief::normalized(grid_, std::move(out));
}

GridBelief predict(const GridBelief& belief, const PredictionKernel& kernel) {
  if (!(belief.grid() == kernel.grid())) throw InvalidArgument("belief and kernel grids differ");
  if (belief.is_point_mass()) return kernel.propagate_point(belief.atom());
  std::vector<double> weighted(belief.grid().size());
  simd::active().multiply(kernel.trapezoid_weights().data(), belief.values().data(),
                          weighted.data(), weighted.size());
  return kernel.propagate(0, weighted);
}

SimplexBelief predict(const SimplexBelief& belief, const FiniteChain& chain) {
  if (belief.size() != chain.size()) throw InvalidArgument("belief size does not match chain");
  std::vector<double> out(chain.size(), 0.0);
  for (std::size_t i = 0; i < chain.size(); ++i)
    for (std::size_t j = 0; j < chain.size(); ++j) out[j] += belief[i] * chain.transition(i, j);
  return SimplexBelief::normalized(std::move(out));
}

GridBelief filter_update(const GridBelief& belief, const PredictionKernel& kernel,
                         const IntervalQuantizer& q, std::size_t m, double eps_mass) {
  if (m >= q.levels()) throw InvalidArgument("cell index out of range");
  const auto [l, r] = q.cell_bounds(m);
  if (belief.is_point_mass()) {
    if (q.classify(belief.atom()) != m) throw ZeroProbabilitySymbol(m, 0.0);
    return kernel.propagate_point(belief.atom());
  }
  return filter_update(belief, kernel, interval_cell_weights(belief.grid(), l, r), m, eps_mass);
}

GridBelief filter_update(const GridBelief& belief, const PredictionKernel& kernel,
                         const CellWeights& cell, std::size_t m, double eps_mass) {
  if (!(belief.grid() == kernel.grid())) throw InvalidArgument("belief and kernel grids differ");
  if (belief.is_point_mass())
    throw InvalidArgument("point-mass filtering needs the quantizer, not cell weights");
  const double mass = integrate(cell, belief).zeroth;
  if (!(mass > eps_mass)) throw ZeroProbabilitySymbol(m, mass);
  std::vector<double> weighted(cell.w.size());
  simd::active().multiply(cell.w.data(), belief.values().data() + cell.begin, weighted.data(),
                          weighted.size());
  simd::active().scale(weighted.data(), 1.0 / mass, weighted.size());
  return kernel.propagate(cell.begin, weighted);
}

SimplexBelief filter_update(const SimplexBelief& belief, const FiniteChain& chain,
                            const FinitePartition& q, std::size_t m, double eps_mass) {
  if (belief.size() != chain.size() || q.alphabet_size() != chain.size())
    throw InvalidArgument("belief, chain and partition sizes differ");
  if (m >= q.levels()) throw InvalidArgument("cell index out of range");
  const double mass = cell_mass(belief, q, m);
  if (!(mass > eps_mass)) throw ZeroProbabilitySymbol(m, mass);
  std::vector<double> out(chain.size(), 0.0);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (q.classify(i) != m) continue;
    for (std::size_t j = 0; j < chain.size(); ++j) out[j] += belief[i] * chain.transition(i, j);
  }
  for (double& v : out) v /= mass;
  return SimplexBelief::normalized(std::move(out));
}

double tv_distance(const GridBelief& a, const GridBelief& b) {
  if (!(a.grid() == b.grid())) throw InvalidArgument("tv_distance on mismatched grids");
  if (a.is_point_mass() || b.is_point_mass()) {
    if (a.is_point_mass() && b.is_point_mass() && a.atom() == b.atom()) return 0.0;
    return 2.0;
  }
  const auto va = a.values();
  const auto vb = b.values();
  const double inner = simd::active().abs_diff_sum(va.data(), vb.data(), va.size());
  const double ends = 0.5 * (std::fabs(va.front() - vb.front()) + std::fabs(va.back() - vb.back()));
  return a.grid().spacing() * (inner - ends);
}

double tv_distance(const SimplexBelief& a, const SimplexBelief& b) {
  if (a.size() != b.size()) throw InvalidArgument("tv_distance on mismatched alphabets");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::fabs(a[i] - b[i]);
  return d;
}

SMembershipReport check_S_membership(const GridBelief& belief, const DensityBounds& bounds,
                                     double tol) {
  SMembershipReport r;
  if (belief.is_point_mass()) {
    r.max_density = std::numeric_limits<double>::infinity();
    r.lipschitz_estimate = std::numeric_limits<double>::infinity();
    return r;
  }
  const auto v = belief.values();
  const double h = belief.grid().spacing();
  r.max_density = *std::max_element(v.begin(), v.end());
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    r.lipschitz_estimate = std::max(r.lipschitz_estimate, std::fabs(v[i + 1] - v[i]) / h);
  r.pass = r.max_density <= bounds.sup + tol && r.lipschitz_estimate <= bounds.lipschitz + tol;
  return r;
}

double moment(const GridBelief& belief, int k) {
  if (k != 1 && k != 2) throw InvalidArgument("moment order must be 1 or 2");
  if (belief.is_point_mass()) return k == 1 ? belief.atom() : belief.atom() * belief.atom();
  const auto whole = interval_cell_weights(belief.grid(), -std::numeric_limits<double>::infinity(),
                                           std::numeric_limits<double>::infinity());
  const auto m = integrate(whole, belief);
  return k == 1 ? m.first : m.second;
}

double moment(const SimplexBelief& belief, std::span<const double> state_values, int k) {
  if (k != 1 && k != 2) throw InvalidArgument("moment order must be 1 or 2");
  if (state_values.size() != belief.size())
    throw InvalidArgument("state values do not match belief");
  double s = 0.0;
  for (std::size_t i = 0; i < belief.size(); ++i)
    s += belief[i] * (k == 1 ? state_values[i] : state_values[i] * state_values[i]);
  return s;
}

void write_csv(std::ostream& out, const GridBelief& belief) {
  const auto old = out.precision(17);
  out << "grid_x,density\n";
  if (belief.is_point_mass()) {
    out << belief.atom() << ",inf\n";
  } else {
    const auto v = belief.values();
    for (std::size_t i = 0; i < v.size(); ++i) out << belief.grid().node(i) << ',' << v[i] << '\n';
  }
  out.precision(old);
}

}  // namespace zdq
