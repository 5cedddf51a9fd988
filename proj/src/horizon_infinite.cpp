#include "zdq/horizon_infinite.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace zdq {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  if (p > std::numeric_limits<std::uint64_t>::max())
    throw InvalidArgument("piecing schedule overflows 64-bit time indices");
  return static_cast<std::uint64_t>(p);
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (a > std::numeric_limits<std::uint64_t>::max() - b)
    throw InvalidArgument("piecing schedule overflows 64-bit time indices");
  return a + b;
}

}  // namespace

PiecingSchedule piecing_schedule(std::span<const std::uint64_t> horizons, std::size_t k_max) {
  if (k_max == 0) throw InvalidArgument("k_max must be at least 1");
  if (horizons.size() < k_max + 1)
    throw InvalidArgument("need k_max + 1 horizons (n_k looks one horizon ahead)");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] == 0) throw InvalidArgument("horizons must be positive");
    if (i > 0 && horizons[i] <= horizons[i - 1])
      throw InvalidArgument("horizons must be strictly increasing");
  }
  PiecingSchedule s;
  s.horizons.assign(horizons.begin(), horizons.begin() + static_cast<std::ptrdiff_t>(k_max));
  for (std::size_t idx = 0; idx < k_max; ++idx) {
    const std::uint64_t k = idx + 1;
    std::uint64_t n = 1;
    if (k >= 2) {
      // ceil(k * max(T_{k+1}, n_{k-1} T_{k-1}) / T_k) in exact integer arithmetic.
      const std::uint64_t numer =
          checked_mul(k, std::max(horizons[idx + 1], s.segment_lengths[idx - 1]));
      n = numer / horizons[idx] + (numer % horizons[idx] != 0 ? 1 : 0);
    }
    s.repetitions.push_back(n);
    s.segment_lengths.push_back(checked_mul(n, horizons[idx]));
    const std::uint64_t prev = idx == 0 ? 0 : s.boundaries.back();
    if (idx >= 1)
      s.tail_ratios.push_back(static_cast<double>(prev) /
                              static_cast<double>(s.segment_lengths.back()));
    s.boundaries.push_back(checked_add(prev, s.segment_lengths.back()));
  }
  return s;
}

SegmentPosition locate(const PiecingSchedule& schedule, std::uint64_t t) {
  if (schedule.segments() == 0) throw InvalidArgument("empty schedule");
  const auto it = std::upper_bound(schedule.boundaries.begin(), schedule.boundaries.end(), t);
  const std::size_t k = it == schedule.boundaries.end()
                            ? schedule.segments() - 1
                            : static_cast<std::size_t>(it - schedule.boundaries.begin());
  const std::uint64_t start = k == 0 ? 0 : schedule.boundaries[k - 1];
  const std::uint64_t rel = t - start;
  const std::uint64_t period = schedule.horizons[k];
  return {k, rel / period, rel % period};
}

PiecedPolicy build_pieced_policy(std::vector<PolicyTree> trees, PiecingSchedule schedule) {
  if (trees.size() != schedule.segments())
    throw InvalidArgument("schedule has " + std::to_string(schedule.segments()) +
                          " segments but " + std::to_string(trees.size()) + " policies");
  for (std::size_t k = 0; k < trees.size(); ++k) {
    if (trees[k].nodes.empty()) throw InvalidArgument("empty policy tree");
    if (trees[k].horizon != schedule.horizons[k])
      throw InvalidArgument("policy " + std::to_string(k + 1) + " was solved for horizon " +
                            std::to_string(trees[k].horizon) + ", schedule needs " +
                            std::to_string(schedule.horizons[k]));
    const auto& a = trees[k].root().belief;
    const auto& b = trees.front().root().belief;
    if (a.values != b.values || a.atom != b.atom)
      throw InvalidArgument("policies must share the restart belief");
  }
  return PiecedPolicy{std::move(schedule), std::move(trees)};
}

PiecedPolicy replay_policy(PolicyTree tree) {
  if (tree.nodes.empty() || tree.horizon == 0) throw InvalidArgument("empty policy tree");
  PiecingSchedule s;
  s.horizons = {tree.horizon};
  s.repetitions = {1};
  s.segment_lengths = {tree.horizon};
  s.boundaries = {tree.horizon};
  std::vector<PolicyTree> trees;
  trees.push_back(std::move(tree));
  return PiecedPolicy{std::move(s), std::move(trees)};
}

BeliefBinning BeliefBinning::simplex(std::size_t bins) {
  if (bins == 0) throw InvalidArgument("need at least one bin");
  BeliefBinning b;
  b.kind = Kind::simplex_coordinate;
  b.bins_first = bins;
  b.bins_second = 1;
  return b;
}

BeliefBinning BeliefBinning::mean_std(double mean_lo, double mean_hi, double std_lo,
                                      double std_hi, std::size_t mean_bins,
                                      std::size_t std_bins) {
  if (mean_bins == 0 || std_bins == 0) throw InvalidArgument("need at least one bin");
  if (!(mean_lo < mean_hi) || !(std_lo < std_hi)) throw InvalidArgument("empty binning range");
  BeliefBinning b;
  b.kind = Kind::mean_std;
  b.bins_first = mean_bins;
  b.bins_second = std_bins;
  b.first_lo = mean_lo;
  b.first_hi = mean_hi;
  b.second_lo = std_lo;
  b.second_hi = std_hi;
  return b;
}

namespace {
std::size_t axis_bin(double v, double lo, double hi, std::size_t bins) {
  const double f = (v - lo) / (hi - lo) * static_cast<double>(bins);
  if (!(f > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(f), bins - 1);
}
}  // namespace

std::size_t BeliefBinning::bin(const BeliefFeatures& f) const {
  if (kind == Kind::simplex_coordinate)
    return axis_bin(f.coordinate, first_lo, first_hi, bins_first);
  return axis_bin(f.mean, first_lo, first_hi, bins_first) * bins_second +
         axis_bin(f.stddev, second_lo, second_hi, bins_second);
}

RandomizedStationaryPolicy RandomizedStationaryPolicy::deterministic(
    BeliefBinning binning, std::vector<std::size_t> choice, std::size_t candidate_count) {
  if (choice.size() != binning.bin_count()) throw InvalidArgument("one choice per bin");
  RandomizedStationaryPolicy p{binning, {}};
  for (std::size_t c : choice) {
    if (c >= candidate_count) throw InvalidArgument("choice names a nonexistent candidate");
    std::vector<double> row(candidate_count, 0.0);
    row[c] = 1.0;
    p.table.push_back(std::move(row));
  }
  return p;
}

void RandomizedStationaryPolicy::validate(std::size_t candidate_count) const {
  if (table.size() != binning.bin_count())
    throw InvalidArgument("stationary policy table needs one row per bin");
  for (const auto& row : table) {
    if (row.size() != candidate_count)
      throw InvalidArgument("stationary policy row length differs from candidate count");
    double s = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) throw InvalidArgument("stationary policy probabilities must be >= 0");
      s += v;
    }
    if (std::fabs(s - 1.0) > 1e-12) throw InvalidArgument("stationary policy row must sum to 1");
  }
}

std::size_t RandomizedStationaryPolicy::choose(std::size_t bin, RandomStream& shared) const {
  return sample_categorical(table.at(bin), shared);
}

std::vector<double> OccupationHistogram::normalized() const {
  std::vector<double> out(counts.size(), 0.0);
  if (total_steps == 0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i)
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(total_steps);
  return out;
}

OccupationAccumulator::OccupationAccumulator(BeliefBinning binning, std::size_t candidate_count) {
  if (candidate_count == 0) throw InvalidArgument("need at least one candidate");
  hist_.binning = binning;
  hist_.candidate_count = candidate_count;
  hist_.counts.assign(binning.bin_count() * candidate_count, 0);
}

void OccupationAccumulator::add(const BeliefFeatures& features, const BeliefSnapshot& belief,
                                std::size_t q, double stage_cost) {
  if (q >= hist_.candidate_count) throw InvalidArgument("quantizer id out of range");
  const std::size_t cell = hist_.binning.bin(features) * hist_.candidate_count + q;
  ++hist_.counts[cell];
  ++hist_.total_steps;
  cost_sum_ += stage_cost;
  auto [it, inserted] = sums_.try_emplace(cell, belief);
  if (!inserted) {
    auto& acc = it->second;
    if (acc.values.size() != belief.values.size())
      throw InvalidArgument("belief snapshots of different sizes");
    for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += belief.values[i];
    if (acc.atom && belief.atom) *acc.atom += *belief.atom;
  }
}

OccupationHistogram OccupationAccumulator::finish() const {
  OccupationHistogram h = hist_;
  h.average_stage_cost =
      h.total_steps == 0 ? 0.0 : cost_sum_ / static_cast<double>(h.total_steps);
  for (const auto& [cell, sum] : sums_) {
    const double n = static_cast<double>(h.counts[cell]);
    BeliefSnapshot mean = sum;
    for (double& v : mean.values) v /= n;
    if (mean.atom) *mean.atom /= n;
    h.representatives.emplace(cell, std::move(mean));
  }
  return h;
}

double histogram_tv(const OccupationHistogram& a, const OccupationHistogram& b) {
  if (!(a.binning == b.binning) || a.candidate_count != b.candidate_count)
    throw InvalidArgument("histograms use different binnings");
  const auto na = a.normalized();
  const auto nb = b.normalized();
  double d = 0.0;
  for (std::size_t i = 0; i < na.size(); ++i) d += std::fabs(na[i] - nb[i]);
  return d;
}

OccupationHistogram occupation_measure(const TrajectoryLog& log, const BeliefBinning& binning,
                                       std::size_t candidate_count) {
  if (log.beliefs.size() != log.rows.size() || log.features.size() != log.rows.size())
    throw InvalidArgument("trajectory log does not carry beliefs for every step");
  OccupationAccumulator acc(binning, candidate_count);
  for (std::size_t i = 0; i < log.rows.size(); ++i)
    acc.add(log.features[i], log.beliefs[i], log.rows[i].quantizer, log.rows[i].stage_cost);
  return acc.finish();
}

std::vector<SimplexBelief> simplex_grid(std::size_t n, std::size_t resolution) {
  if (n < 2 || resolution < 1) throw InvalidArgument("simplex grid needs n >= 2, resolution >= 1");
  std::vector<SimplexBelief> out;
  std::vector<std::size_t> counts(n, 0);
  // Enumerate compositions of `resolution` into n parts, lexicographically.
  auto emit = [&](auto&& self, std::size_t i, std::size_t left) -> void {
    if (i + 1 == n) {
      counts[i] = left;
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j)
        p[j] = static_cast<double>(counts[j]) / static_cast<double>(resolution);
      out.push_back(SimplexBelief::normalized(std::move(p)));
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      counts[i] = c;
      self(self, i + 1, left - c);
    }
  };
  emit(emit, 0, resolution);
  return out;
}

template RolloutResult rollout(const GridEnvironment&, const RolloutPolicy&,
                               const RolloutOptions&);
template RolloutResult rollout(const FiniteEnvironment&, const RolloutPolicy&,
                               const RolloutOptions&);
template double invariance_residual(const OccupationHistogram&, const GridEnvironment&,
                                    const RandomizedStationaryPolicy&);
template double invariance_residual(const OccupationHistogram&, const FiniteEnvironment&,
                                    const RandomizedStationaryPolicy&);
template DiscountedResult discounted_value_iteration(const GridEnvironment&,
                                                     std::span<const GridBelief>, double, double,
                                                     std::size_t);
template DiscountedResult discounted_value_iteration(const FiniteEnvironment&,
                                                     std::span<const SimplexBelief>, double,
                                                     double, std::size_t);

}  // namespace zdq
