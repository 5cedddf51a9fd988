#include "zdq/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zdq/belief.hpp"
#include "zdq/error.hpp"

namespace zdq::oracles {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// min_u sum_x w[x] c0(x, u) for a finite alphabet.
double decode_cost(const std::vector<double>& w, const FiniteChain& chain, const CostModel& cost) {
  double mass = 0.0;
  for (double v : w) mass += v;
  if (mass <= 0.0) return 0.0;
  if (cost.is_quadratic()) {
    double mean = 0.0;
    for (std::size_t x = 0; x < w.size(); ++x) mean += w[x] * chain.state_value(x);
    mean /= mass;
    double c = 0.0;
    for (std::size_t x = 0; x < w.size(); ++x) {
      const double d = chain.state_value(x) - mean;
      c += w[x] * d * d;
    }
    return c;
  }
  double best = kInf;
  for (std::size_t k = 0; k < cost.reconstruction_count(); ++k) {
    double c = 0.0;
    for (std::size_t x = 0; x < w.size(); ++x) c += w[x] * cost.entry(x, k);
    best = std::min(best, c);
  }
  return best;
}

// Every labelling of n symbols with M labels, in odometer order.
std::vector<std::vector<std::size_t>> all_labellings(std::size_t n, std::size_t levels) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> a(n, 0);
  while (true) {
    out.push_back(a);
    std::size_t i = n;
    while (i > 0 && a[i - 1] + 1 == levels) a[--i] = 0;
    if (i == 0) break;
    ++a[i - 1];
  }
  return out;
}

bool first_use_order(const std::vector<std::size_t>& a) {
  std::size_t next = 0;
  for (std::size_t v : a) {
    if (v > next) return false;
    if (v == next) ++next;
  }
  return true;
}

class Search {
 public:
  Search(const FiniteChain& chain, std::size_t levels, std::size_t horizon, const CostModel& cost,
         std::size_t budget)
      : chain_(chain), levels_(levels), horizon_(horizon), cost_(cost), budget_(budget) {
    for (auto& a : all_labellings(chain.size(), levels))
      if (first_use_order(a)) partitions_.push_back(std::move(a));
  }

  double value(const std::vector<double>& belief, std::size_t t) {
    if (t == horizon_) return 0.0;
    const std::size_t n = chain_.size();
    double best = kInf;
    for (const auto& part : partitions_) {
      if (++evaluations_ > budget_) throw BudgetExceeded(budget_, kInf);
      double total = 0.0;
      for (std::size_t m = 0; m < levels_; ++m) {
        std::vector<double> w(n, 0.0);
        double mass = 0.0;
        for (std::size_t x = 0; x < n; ++x)
          if (part[x] == m) {
            w[x] = belief[x];
            mass += belief[x];
          }
        if (mass <= 0.0) continue;
        total += decode_cost(w, chain_, cost_) / static_cast<double>(horizon_);
        if (t + 1 == horizon_) continue;
        std::vector<double> next(n, 0.0);
        for (std::size_t x = 0; x < n; ++x)
          for (std::size_t y = 0; y < n; ++y) next[y] += w[x] * chain_.transition(x, y) / mass;
        total += mass * value(next, t + 1);
      }
      best = std::min(best, total);
    }
    return best;
  }

 private:
  const FiniteChain& chain_;
  std::size_t levels_;
  std::size_t horizon_;
  const CostModel& cost_;
  std::size_t budget_;
  std::size_t evaluations_ = 0;
  std::vector<std::vector<std::size_t>> partitions_;
};

void check_cost(const FiniteChain& chain, const CostModel& cost) {
  if (!cost.is_quadratic() && cost.alphabet_size() != chain.size())
    throw InvalidArgument("cost table rows do not match chain");
}

}  // namespace

double brute_force_finite(const SimplexBelief& initial, const FiniteChain& chain,
                          std::size_t levels, std::size_t horizon, const CostModel& cost,
                          std::size_t budget) {
  if (horizon == 0 || levels == 0) throw InvalidArgument("need T >= 1 and M >= 1");
  if (initial.size() != chain.size()) throw InvalidArgument("belief size does not match chain");
  check_cost(chain, cost);
  Search s(chain, levels, horizon, cost, budget);
  return s.value({initial.probabilities().begin(), initial.probabilities().end()}, 0);
}

double exhaustive_admissible_search(const FiniteChain& chain, std::size_t levels,
                                    std::size_t horizon, const CostModel& cost) {
  if (horizon == 0 || horizon > 2) throw InvalidArgument("admissible search supports T in {1, 2}");
  const std::size_t n = chain.size();
  check_cost(chain, cost);
  // Policy count M^n * M^(M n) for T = 2.
  const double count = std::pow(static_cast<double>(levels), static_cast<double>(n)) *
                       (horizon == 2 ? std::pow(static_cast<double>(levels),
                                                static_cast<double>(levels * n))
                                     : 1.0);
  if (count > 1e7) throw InvalidArgument("instance too large for admissible search");

  const auto pi0 = chain.initial().probabilities();
  const auto encoders0 = all_labellings(n, levels);
  const auto encoders1 = horizon == 2 ? all_labellings(levels * n, levels)
                                      : std::vector<std::vector<std::size_t>>{};
  double best = kInf;
  for (const auto& f0 : encoders0) {
    double c0 = 0.0;
    for (std::size_t q0 = 0; q0 < levels; ++q0) {
      std::vector<double> w(n, 0.0);
      for (std::size_t x = 0; x < n; ++x)
        if (f0[x] == q0) w[x] = pi0[x];
      c0 += decode_cost(w, chain, cost);
    }
    if (horizon == 1) {
      best = std::min(best, c0);
      continue;
    }
    for (const auto& f1 : encoders1) {  // f1[q0 * n + x1]
      double c1 = 0.0;
      for (std::size_t q0 = 0; q0 < levels; ++q0) {
        for (std::size_t q1 = 0; q1 < levels; ++q1) {
          std::vector<double> w(n, 0.0);
          for (std::size_t x0 = 0; x0 < n; ++x0) {
            if (f0[x0] != q0) continue;
            for (std::size_t x1 = 0; x1 < n; ++x1)
              if (f1[q0 * n + x1] == q1) w[x1] += pi0[x0] * chain.transition(x0, x1);
          }
          c1 += decode_cost(w, chain, cost);
        }
      }
      best = std::min(best, 0.5 * (c0 + c1));
    }
  }
  return best;
}

LloydMaxResult lloyd_max(const GridBelief& belief, std::size_t levels, std::size_t max_iter,
                         double tol) {
  if (levels == 0) throw InvalidArgument("levels must be >= 1");
  if (belief.is_point_mass()) throw InvalidArgument("Lloyd-Max needs a density belief");
  const Grid& grid = belief.grid();

  auto centroids = [&](const std::vector<double>& thr, const std::vector<double>& previous) {
    std::vector<double> u(levels);
    for (std::size_t m = 0; m < levels; ++m) {
      const double l = m == 0 ? -kInf : thr[m - 1];
      const double r = m + 1 == levels ? kInf : thr[m];
      const auto mom = integrate(interval_cell_weights(grid, l, r), belief);
      u[m] = mom.zeroth > 1e-300 ? mom.first / mom.zeroth : previous[m];
    }
    return u;
  };

  // Start from the M-quantiles of the piecewise-linear CDF.
  std::vector<double> thr;
  {
    const auto v = belief.values();
    const double h = grid.spacing();
    double cdf = 0.0;
    std::size_t next = 1;
    for (std::size_t i = 0; i + 1 < v.size() && next < levels; ++i) {
      const double seg = 0.5 * h * (v[i] + v[i + 1]);
      while (next < levels && cdf + seg >= static_cast<double>(next) / levels) {
        const double frac = seg > 0.0 ? (static_cast<double>(next) / levels - cdf) / seg : 0.0;
        thr.push_back(grid.node(i) + frac * h);
        ++next;
      }
      cdf += seg;
    }
    while (thr.size() + 1 < levels) thr.push_back(grid.hi());
    for (std::size_t i = 1; i < thr.size(); ++i)
      if (!(thr[i] > thr[i - 1])) thr[i] = std::nextafter(thr[i - 1], kInf);
  }

  std::vector<double> u(levels, moment(belief, 1));
  LloydMaxResult out;
  bool converged = levels == 1;
  double move = 0.0;
  for (std::size_t it = 0; it < max_iter && !converged; ++it) {
    u = centroids(thr, u);
    move = 0.0;
    for (std::size_t m = 0; m + 1 < levels; ++m) {
      const double mid = 0.5 * (u[m] + u[m + 1]);
      move = std::max(move, std::fabs(mid - thr[m]));
      thr[m] = mid;
    }
    out.iterations = it + 1;
    converged = move < tol;
  }
  if (!converged) throw NotConverged("Lloyd-Max", move);
  u = centroids(thr, u);

  double mse = 0.0;
  for (std::size_t m = 0; m < levels; ++m) {
    const double l = m == 0 ? -kInf : thr[m - 1];
    const double r = m + 1 == levels ? kInf : thr[m];
    const auto mom = integrate(interval_cell_weights(grid, l, r), belief);
    mse += mom.second - 2.0 * u[m] * mom.first + u[m] * u[m] * mom.zeroth;
  }
  out.quantizer = IntervalQuantizer(thr);
  out.reconstructions = std::move(u);
  out.mse = std::max(mse, 0.0);
  return out;
}

}  // namespace zdq::oracles
