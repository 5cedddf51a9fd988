#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include "zdq/dp_designer.hpp"
#include "zdq/environment.hpp"
#include "zdq/error.hpp"
#include "zdq/random.hpp"

namespace zdq {

// ---------------------------------------------------------------------------
// Piecing schedule

// Segment k replays the T_k-horizon policy n_k times; segment lengths are
// T'_k = n_k T_k and boundaries N_k = T'_1 + ... + T'_k.
struct PiecingSchedule {
  std::vector<std::uint64_t> horizons;
  std::vector<std::uint64_t> repetitions;
  std::vector<std::uint64_t> segment_lengths;
  std::vector<std::uint64_t> boundaries;
  // N_{k-1} / T'_k for k >= 2 (tends to 0, so N_k / T'_k tends to 1).
  std::vector<double> tail_ratios;

  std::size_t segments() const noexcept { return horizons.size(); }
};

// n_1 = 1, n_k = ceil(k * max(T_{k+1} / T_k, n_{k-1} T_{k-1} / T_k)).
// `horizons` must be strictly increasing with at least k_max + 1 entries.
PiecingSchedule piecing_schedule(std::span<const std::uint64_t> horizons, std::size_t k_max);

struct SegmentPosition {
  std::size_t segment = 0;     // k - 1
  std::uint64_t repetition = 0;  // j
  std::uint64_t offset = 0;      // i, time within the repetition
};

// Position of time t; past N_{k_max} the last segment keeps repeating.
SegmentPosition locate(const PiecingSchedule& schedule, std::uint64_t t);

// Time-varying Markov policy: on segment k replay trees[k], restarting from
// its root belief at every repetition boundary.
struct PiecedPolicy {
  PiecingSchedule schedule;
  std::vector<PolicyTree> trees;
};

PiecedPolicy build_pieced_policy(std::vector<PolicyTree> trees, PiecingSchedule schedule);

// One tree replayed back to back (period = its horizon).
PiecedPolicy replay_policy(PolicyTree tree);

// ---------------------------------------------------------------------------
// Belief binning and stationary randomized policies

struct BeliefBinning {
  enum class Kind { simplex_coordinate, mean_std };
  Kind kind = Kind::simplex_coordinate;
  std::size_t bins_first = 50;   // coordinate or mean
  std::size_t bins_second = 1;   // std (mean_std only)
  double first_lo = 0.0, first_hi = 1.0;
  double second_lo = 0.0, second_hi = 1.0;

  static BeliefBinning simplex(std::size_t bins = 50);
  static BeliefBinning mean_std(double mean_lo, double mean_hi, double std_lo, double std_hi,
                                std::size_t mean_bins = 50, std::size_t std_bins = 20);

  std::size_t bin_count() const noexcept { return bins_first * bins_second; }
  // Out-of-range features are clamped into the edge bins.
  std::size_t bin(const BeliefFeatures& f) const;

  friend bool operator==(const BeliefBinning&, const BeliefBinning&) = default;
};

// Table bin -> distribution over candidate ids. The choice at each step uses
// a uniform r_t from a stream shared by encoder and decoder.
struct RandomizedStationaryPolicy {
  BeliefBinning binning;
  std::vector<std::vector<double>> table;

  static RandomizedStationaryPolicy deterministic(BeliefBinning binning,
                                                  std::vector<std::size_t> choice,
                                                  std::size_t candidate_count);
  void validate(std::size_t candidate_count) const;
  std::size_t choose(std::size_t bin, RandomStream& shared) const;
};

struct GreedyPolicy {};

using RolloutPolicy = std::variant<PiecedPolicy, GreedyPolicy, RandomizedStationaryPolicy>;

// ---------------------------------------------------------------------------
// Occupation measures

struct OccupationHistogram {
  BeliefBinning binning;
  std::size_t candidate_count = 0;
  std::vector<std::uint64_t> counts;  // bin * candidate_count + q
  std::uint64_t total_steps = 0;
  double average_stage_cost = 0.0;  // time average of c(pi_t, Q_t)
  // Mean belief of the visits to each occupied (bin, q) cell.
  std::map<std::size_t, BeliefSnapshot> representatives;

  std::uint64_t count(std::size_t bin, std::size_t q) const {
    return counts.at(bin * candidate_count + q);
  }
  std::vector<double> normalized() const;
};

class OccupationAccumulator {
 public:
  OccupationAccumulator(BeliefBinning binning, std::size_t candidate_count);
  void add(const BeliefFeatures& features, const BeliefSnapshot& belief, std::size_t q,
           double stage_cost);
  OccupationHistogram finish() const;

 private:
  OccupationHistogram hist_;
  double cost_sum_ = 0.0;
  std::map<std::size_t, BeliefSnapshot> sums_;
};

// Sum of absolute differences of the normalised histograms (same binning).
double histogram_tv(const OccupationHistogram& a, const OccupationHistogram& b);

// ---------------------------------------------------------------------------
// Rollout

struct TrajectoryRow {
  std::uint64_t t = 0;
  double x = 0.0;
  std::size_t symbol = 0;
  double reconstruction = 0.0;
  double cost = 0.0;        // realised c0(x_t, u_t)
  double stage_cost = 0.0;  // c(pi_t, Q_t)
  double belief_mean = 0.0;
  double belief_std = 0.0;
  std::size_t quantizer = 0;
};

struct TrajectoryLog {
  std::vector<TrajectoryRow> rows;
  std::vector<BeliefFeatures> features;  // when beliefs are kept
  std::vector<BeliefSnapshot> beliefs;   // when beliefs are kept
};

struct RolloutOptions {
  std::uint64_t horizon = 1;
  std::size_t paths = 1;
  std::uint64_t seed = 0;
  bool log_path0 = true;     // per-step rows of path 0
  bool keep_beliefs = false; // belief snapshots in the log (path 0)
  OccupationAccumulator* occupancy = nullptr;  // all paths, all steps
};

struct RolloutResult {
  std::vector<double> path_average;  // (1/N) sum c0 per path
  double mean_cost = 0.0;
  double std_error = 0.0;
  std::vector<double> cesaro;  // mean over paths of the running average
  TrajectoryLog log;
  double max_renormalization_drift = 0.0;
};

// ---------------------------------------------------------------------------
// Discounted value iteration

struct DiscountedResult {
  std::vector<double> values;
  std::vector<std::size_t> policy;
  double residual = 0.0;  // sup |V - TV| on the grid at exit
  std::size_t iterations = 0;
  std::vector<double> sup_differences;  // per iteration
  bool approximate = false;  // continuous beliefs: nearest-neighbour bias unquantified
};

// Lattice {k / resolution} on the (n-1)-simplex, lexicographic in the counts.
std::vector<SimplexBelief> simplex_grid(std::size_t n, std::size_t resolution);

namespace detail {

inline double finite_state_as_real(const FiniteEnvironment& env, std::size_t x) {
  return env.state_value(x);
}
inline double finite_state_as_real(const GridEnvironment&, double x) { return x; }

template <class Env>
struct PolicyAgent {
  using Belief = typename Env::Belief;
  const Env& env;
  const RolloutPolicy& policy;
  RandomStream shared;
  Belief belief;
  std::size_t tree = 0;
  std::size_t node = 0;

  std::size_t choose(std::uint64_t t) {
    if (const auto* pieced = std::get_if<PiecedPolicy>(&policy)) {
      const SegmentPosition pos = locate(pieced->schedule, t);
      if (pos.offset == 0) {
        tree = pos.segment;
        node = 0;
        belief = env.from_snapshot(pieced->trees[tree].root().belief);
      }
      return pieced->trees[tree].nodes[node].candidate;
    }
    if (std::holds_alternative<GreedyPolicy>(policy)) return greedy_policy_step(env, belief);
    const auto& rsp = std::get<RandomizedStationaryPolicy>(policy);
    return rsp.choose(rsp.binning.bin(env.features(belief)), shared);
  }

  void advance(std::size_t q, std::size_t symbol, std::uint64_t t) {
    if (const auto* pieced = std::get_if<PiecedPolicy>(&policy)) {
      if (locate(pieced->schedule, t + 1).offset == 0) return;  // next step restarts
      const auto next = pieced->trees[tree].child(node, symbol);
      if (!next) throw ZeroProbabilitySymbol(symbol, 0.0);
      node = *next;
    }
    belief = env.posterior(belief, q, symbol);
  }
};

}  // namespace detail

// Simulates source, encoder and decoder. Encoder and decoder keep separate
// belief copies (and separate copies of the shared randomness) and are
// checked for byte-identical state at every step.
template <class Env>
RolloutResult rollout(const Env& env, const RolloutPolicy& policy, const RolloutOptions& options) {
  if (options.horizon == 0 || options.paths == 0)
    throw InvalidArgument("rollout needs horizon >= 1 and paths >= 1");
  if (const auto* pieced = std::get_if<PiecedPolicy>(&policy)) {
    if (pieced->trees.size() != pieced->schedule.segments())
      throw InvalidArgument("pieced policy has one tree per segment");
  }
  if (const auto* rsp = std::get_if<RandomizedStationaryPolicy>(&policy))
    rsp->validate(env.candidate_count());

  RolloutResult result;
  result.path_average.resize(options.paths);
  result.cesaro.assign(options.horizon, 0.0);
  const RandomStream root(options.seed);

  for (std::size_t p = 0; p < options.paths; ++p) {
    const RandomStream path_stream = root.split(p);
    RandomStream source = path_stream.split(0);
    const RandomStream shared = path_stream.split(1);
    detail::PolicyAgent<Env> encoder{env, policy, shared, env.initial_belief()};
    detail::PolicyAgent<Env> decoder{env, policy, shared, env.initial_belief()};
    auto x = env.sample_initial(source);
    double total = 0.0;
    const bool log_this = p == 0 && options.log_path0;

    for (std::uint64_t t = 0; t < options.horizon; ++t) {
      const std::size_t q = encoder.choose(t);
      const std::size_t q_dec = decoder.choose(t);
      if (q != q_dec || !env.same(encoder.belief, decoder.belief)) throw Desynchronized(t);

      const std::size_t symbol = env.classify(q, x);
      const Reconstruction u = env.reconstruction(decoder.belief, q, symbol);
      const double c = env.distortion(x, u);
      total += c;
      result.cesaro[t] += total / static_cast<double>(t + 1);

      const bool need_stage = log_this || options.occupancy;
      if (need_stage) {
        const double stage = env.evaluate(decoder.belief, q).cost;
        const BeliefFeatures f = env.features(decoder.belief);
        if (options.occupancy) options.occupancy->add(f, env.snapshot(decoder.belief), q, stage);
        if (log_this) {
          result.log.rows.push_back({t, detail::finite_state_as_real(env, x), symbol, u.value, c,
                                     stage, f.mean, f.stddev, q});
          if (options.keep_beliefs) {
            result.log.features.push_back(f);
            result.log.beliefs.push_back(env.snapshot(decoder.belief));
          }
        }
      }

      encoder.advance(q, symbol, t);
      decoder.advance(q, symbol, t);
      if constexpr (std::is_same_v<typename Env::Belief, GridBelief>)
        result.max_renormalization_drift =
            std::max(result.max_renormalization_drift, decoder.belief.renormalization_drift());
      x = env.sample_next(x, source);
    }
    result.path_average[p] = total / static_cast<double>(options.horizon);
  }

  double sum = 0.0;
  for (double v : result.path_average) sum += v;
  result.mean_cost = sum / static_cast<double>(options.paths);
  if (options.paths > 1) {
    double ss = 0.0;
    for (double v : result.path_average) ss += (v - result.mean_cost) * (v - result.mean_cost);
    const double var = ss / static_cast<double>(options.paths - 1);
    result.std_error = std::sqrt(var / static_cast<double>(options.paths));
  }
  for (double& c : result.cesaro) c /= static_cast<double>(options.paths);
  return result;
}

// Histogram of (belief bin, quantizer) visits from a log that kept beliefs.
OccupationHistogram occupation_measure(const TrajectoryLog& log, const BeliefBinning& binning,
                                       std::size_t candidate_count);

// Pushes the normalised histogram one step through the belief transition
// kernel (posterior of each cell representative, rebinned, next quantizer
// drawn from the stationary table) and returns its distance (sum of absolute
// differences) to the histogram itself.
template <class Env>
double invariance_residual(const OccupationHistogram& hist, const Env& env,
                           const RandomizedStationaryPolicy& policy) {
  if (hist.total_steps == 0) throw InvalidArgument("empty occupation histogram");
  if (!(hist.binning == policy.binning))
    throw InvalidArgument("histogram and policy binnings differ");
  policy.validate(env.candidate_count());
  const std::size_t k = hist.candidate_count;
  const std::vector<double> nu = hist.normalized();
  std::vector<double> pushed(nu.size(), 0.0);
  for (const auto& [cell, snapshot] : hist.representatives) {
    const double weight = nu[cell];
    if (weight == 0.0) continue;
    const std::size_t q = cell % k;
    const auto belief = env.from_snapshot(snapshot);
    const StageEvaluation ev = env.evaluate(belief, q);
    for (std::size_t m = 0; m < ev.masses.size(); ++m) {
      if (!(ev.masses[m] > kDefaultMassEpsilon)) continue;
      const std::size_t next_bin =
          hist.binning.bin(env.features(env.posterior(belief, q, m)));
      const auto& row = policy.table[next_bin];
      for (std::size_t q2 = 0; q2 < k; ++q2)
        pushed[next_bin * k + q2] += weight * ev.masses[m] * row[q2];
    }
  }
  double d = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) d += std::fabs(pushed[i] - nu[i]);
  return d;
}

// V <- min_Q [c(pi, Q) + beta sum_m pi(B_m) V(nearest grid point to pi_hat(m, pi, Q))].
// Stops when the sup-norm change drops below tol; throws NotConverged after
// max_iter sweeps.
template <class Env>
DiscountedResult discounted_value_iteration(const Env& env,
                                            std::span<const typename Env::Belief> grid,
                                            double beta, double tol, std::size_t max_iter) {
  if (!(beta >= 0.0 && beta < 1.0)) throw InvalidArgument("discount must lie in [0, 1)");
  if (grid.empty()) throw InvalidArgument("belief grid is empty");
  const std::size_t g = grid.size();
  const std::size_t k = env.candidate_count();

  struct Transition {
    double mass;
    std::size_t target;
  };
  std::vector<double> stage(g * k);
  std::vector<std::vector<Transition>> moves(g * k);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t q = 0; q < k; ++q) {
      const StageEvaluation ev = env.evaluate(grid[i], q);
      stage[i * k + q] = ev.cost;
      for (std::size_t m = 0; m < ev.masses.size(); ++m) {
        if (!(ev.masses[m] > kDefaultMassEpsilon)) continue;
        const auto next = env.posterior(grid[i], q, m);
        std::size_t nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < g; ++j) {
          const double d = env.distance(next, grid[j]);
          if (d < best) {
            best = d;
            nearest = j;
          }
        }
        moves[i * k + q].push_back({ev.masses[m], nearest});
      }
    }
  }

  DiscountedResult result;
  result.approximate = std::is_same_v<typename Env::Belief, GridBelief>;
  result.values.assign(g, 0.0);
  result.policy.assign(g, 0);
  std::vector<double> next(g);
  auto sweep = [&](const std::vector<double>& v, std::vector<double>& out,
                   std::vector<std::size_t>& argmin) {
    double diff = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_q = 0;
      for (std::size_t q = 0; q < k; ++q) {
        double cont = 0.0;
        for (const auto& mv : moves[i * k + q]) cont += mv.mass * v[mv.target];
        const double val = stage[i * k + q] + beta * cont;
        if (val < best) {
          best = val;
          best_q = q;
        }
      }
      out[i] = best;
      argmin[i] = best_q;
      diff = std::max(diff, std::fabs(best - v[i]));
    }
    return diff;
  };

  for (std::size_t it = 0; it < max_iter; ++it) {
    const double diff = sweep(result.values, next, result.policy);
    result.values.swap(next);
    result.sup_differences.push_back(diff);
    result.iterations = it + 1;
    if (diff < tol) {
      std::vector<std::size_t> scratch(g);
      result.residual = sweep(result.values, next, scratch);
      return result;
    }
  }
  std::vector<std::size_t> scratch(g);
  result.residual = sweep(result.values, next, scratch);
  throw NotConverged("discounted value iteration", result.residual);
}

}  // namespace zdq
