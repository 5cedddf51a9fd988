#include "zdq/source_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "zdq/error.hpp"

namespace zdq {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/sqrt(2 pi)

double normal_pdf(double z, double mean, double stddev) {
  const double u = (z - mean) / stddev;
  return kInvSqrt2Pi / stddev * std::exp(-0.5 * u * u);
}
}  // namespace

LinearGaussianSource::LinearGaussianSource(double a, double sigma,
                                           std::optional<InitialLaw> initial)
    : a_(a), sigma_(sigma), initial_(initial) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InvalidArgument("noise_std must be positive and finite");
  if (!std::isfinite(a)) throw InvalidArgument("coefficient must be finite");
  if (initial && (initial->stddev < 0.0 || !std::isfinite(initial->mean)))
    throw InvalidArgument("initial law needs a finite mean and stddev >= 0");
  if (!initial && !is_stable())
    throw InvalidArgument("an unstable source (|a| >= 1) needs an explicit initial law");
}

LinearGaussianSource LinearGaussianSource::noiseless_for_testing(double a, InitialLaw initial) {
  LinearGaussianSource s;
  s.a_ = a;
  s.sigma_ = 0.0;
  s.initial_ = initial;
  return s;
}

double LinearGaussianSource::stationary_std() const {
  if (!is_stable()) throw NoInvariantDistribution("|a| >= 1");
  return sigma_ / std::sqrt(1.0 - a_ * a_);
}

InitialLaw LinearGaussianSource::initial() const {
  if (initial_) return *initial_;
  return InitialLaw{0.0, stationary_std()};
}

double LinearGaussianSource::transition_density(double z, double x) const {
  if (is_noiseless()) throw InvalidArgument("noiseless source has no transition density");
  return normal_pdf(z, a_ * x, sigma_);
}

double LinearGaussianSource::sample_next(double x, RandomStream& rng) const {
  const double w = rng.normal();
  return a_ * x + sigma_ * w;
}

double LinearGaussianSource::sample_initial(RandomStream& rng) const {
  const InitialLaw law = initial();
  const double w = rng.normal();
  return law.mean + law.stddev * w;
}

FiniteChain::FiniteChain(std::vector<std::vector<double>> transition, std::vector<double> initial,
                         std::vector<double> state_values)
    : n_(transition.size()), initial_(std::move(initial)), values_(std::move(state_values)) {
  if (n_ < 2) throw InvalidArgument("finite chain needs at least two states");
  p_.reserve(n_ * n_);
  strictly_positive_ = true;
  for (std::size_t i = 0; i < n_; ++i) {
    if (transition[i].size() != n_) throw InvalidArgument("transition matrix must be square");
    double total = 0.0;
    for (double v : transition[i]) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw InvalidArgument("transition entries must be finite and nonnegative");
      if (v == 0.0) strictly_positive_ = false;
      total += v;
      p_.push_back(v);
    }
    if (std::fabs(total - 1.0) > 1e-12)
      throw InvalidArgument("transition row " + std::to_string(i) + " does not sum to 1");
  }
  if (initial_.size() != n_) throw InvalidArgument("initial belief size does not match chain");
  if (values_.empty()) {
    values_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) values_[i] = static_cast<double>(i);
  }
  if (values_.size() != n_) throw InvalidArgument("state_values size does not match chain");
}

bool FiniteChain::irreducible() const {
  // Every state reaches state 0 and is reached from it.
  auto reach = [&](bool forward) {
    std::vector<bool> seen(n_, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n_; ++j) {
        const double w = forward ? transition(i, j) : transition(j, i);
        if (w > 0.0 && !seen[j]) {
          seen[j] = true;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  return reach(true) && reach(false);
}

std::size_t sample_categorical(std::span<const double> probabilities, RandomStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] <= 0.0) continue;
    acc += probabilities[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

std::size_t FiniteChain::sample_next(std::size_t x, RandomStream& rng) const {
  return sample_categorical(row(x), rng);
}

std::size_t FiniteChain::sample_initial(RandomStream& rng) const {
  return sample_categorical(initial_.probabilities(), rng);
}

FiniteChain FiniteChain::with_initial(SimplexBelief initial) const {
  if (initial.size() != n_) throw InvalidArgument("initial belief size does not match chain");
  FiniteChain copy = *this;
  copy.initial_ = std::move(initial);
  return copy;
}

DensityBounds density_bounds(const LinearGaussianSource& model) {
  if (model.is_noiseless()) throw InvalidArgument("noiseless source has no density bounds");
  const double s = model.noise_std();
  // |d/dz phi| = |u| pdf(u) / s^2 with u = (z - a x)/s, maximal at |u| = 1.
  return DensityBounds{kInvSqrt2Pi / s, kInvSqrt2Pi * std::exp(-0.5) / (s * s)};
}

SimplexBelief invariant_distribution(const FiniteChain& chain) {
  if (!chain.irreducible()) throw NoInvariantDistribution("chain is reducible");
  const std::size_t n = chain.size();
  // Solve pi (P - I) = 0 with the last equation replaced by sum(pi) = 1.
  std::vector<double> a(n * n);
  std::vector<double> b(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      a[j * n + i] = chain.transition(i, j) - (i == j ? 1.0 : 0.0);
  for (std::size_t i = 0; i < n; ++i) a[(n - 1) * n + i] = 1.0;
  b[n - 1] = 1.0;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    if (std::fabs(a[pivot * n + col]) < 1e-300) throw NoInvariantDistribution("singular system");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> pi(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a[r * n + c] * pi[c];
    pi[r] = s / a[r * n + r];
  }
  for (double& v : pi) v = std::max(v, 0.0);
  return SimplexBelief::normalized(std::move(pi));
}

GridBelief invariant_distribution(const LinearGaussianSource& model, const Grid& grid) {
  if (!model.is_stable()) throw NoInvariantDistribution("|a| >= 1");
  return GridBelief::normal(grid, 0.0, model.stationary_std());
}

Grid default_grid(const LinearGaussianSource& model, std::size_t points, double width) {
  const InitialLaw init = model.initial();
  double lo = init.mean - width * std::max(init.stddev, model.noise_std());
  double hi = init.mean + width * std::max(init.stddev, model.noise_std());
  if (model.is_stable()) {
    const double half = width * model.stationary_std();
    lo = std::min(lo, -half);
    hi = std::max(hi, half);
  }
  return Grid(lo, hi, points);
}

GridBelief initial_belief(const LinearGaussianSource& model, const Grid& grid) {
  const InitialLaw init = model.initial();
  if (init.is_point_mass()) return GridBelief::point_mass(grid, init.mean);
  return GridBelief::normal(grid, init.mean, init.stddev);
}

}  // namespace zdq
