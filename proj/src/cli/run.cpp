#include "zdq/cli/run.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "zdq/belief.hpp"
#include "zdq/dp_designer.hpp"
#include "zdq/environment.hpp"
#include "zdq/horizon_infinite.hpp"
#include "zdq/oracles.hpp"
#include "zdq/serialization.hpp"
#include "zdq/simd/kernels.hpp"

namespace zdq::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kOracleTolerance = 1e-12;

void atomic_write(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << content;
    f.flush();
    if (!f) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    atomic_write(dir_ / name, content);
    artifacts_.push_back(name);
  }

  template <class F>
  void write_with(const std::string& name, F&& fill) {
    std::ostringstream os;
    fill(os);
    write(name, os.str());
  }

  const fs::path& dir() const noexcept { return dir_; }
  const std::vector<std::string>& artifacts() const noexcept { return artifacts_; }

 private:
  fs::path dir_;
  std::vector<std::string> artifacts_;
};

struct Context {
  const ExperimentConfig& config;
  Output& output;
  std::ostream& out;
  json results = json::object();
  std::string status = "ok";
  int exit_code = kExitOk;
};

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------
// Environments

FiniteChain make_chain(const ModelConfig& m) {
  const std::size_t n = m.transition.size();
  std::vector<double> initial = m.initial ? *m.initial : std::vector<double>(n, 1.0 / static_cast<double>(n));
  FiniteChain chain(m.transition, std::move(initial), m.state_values);
  if (!m.initial) chain = chain.with_initial(invariant_distribution(chain));
  return chain;
}

CostModel make_cost(const CostConfig& c) {
  return c.quadratic ? CostModel::quadratic() : CostModel::tabular(c.table, c.reconstructions);
}

FiniteEnvironment make_finite(const ExperimentConfig& c) {
  return make_finite_environment(make_chain(*c.model), make_cost(c.cost), c.quantizers->levels);
}

GridEnvironment make_grid(const ExperimentConfig& c) {
  const ModelConfig& m = *c.model;
  LinearGaussianSource source(m.a, m.sigma, m.initial_law);
  const Grid grid = m.grid.lo ? Grid(*m.grid.lo, *m.grid.hi, m.grid.points)
                              : default_grid(source, m.grid.points, m.grid.width);
  const QuantizerConfig& q = *c.quantizers;
  return GridEnvironment(source, grid,
                         enumerate_interval_candidates({q.levels, q.lo, q.hi, q.steps}));
}

bool is_finite_model(const ExperimentConfig& c) {
  return c.model && c.model->kind == ModelConfig::Kind::finite_chain;
}

// Model errors found while building the environment are reported as
// config errors on the model field.
template <class Build>
auto build_environment(Build&& build) {
  try {
    return build();
  } catch (const NoInvariantDistribution& e) {
    throw ConfigError("model", e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError("model", e.what());
  }
}

template <class F>
void with_environment(const ExperimentConfig& c, F&& f) {
  if (is_finite_model(c)) {
    const FiniteEnvironment env = build_environment([&] { return make_finite(c); });
    f(env);
  } else {
    const GridEnvironment env = build_environment([&] { return make_grid(c); });
    f(env);
  }
}

DesignOptions design_options(const ExperimentConfig& c) {
  DesignOptions o;
  o.node_budget = c.budget;
  o.prune_mass = c.prune_mass;
  return o;
}

BeliefBinning make_binning(const ExperimentConfig& c) {
  const BinningConfig& b = c.policy->binning;
  if (is_finite_model(c)) return BeliefBinning::simplex(b.bins);
  return BeliefBinning::mean_std(b.mean_lo, b.mean_hi, b.std_lo, b.std_hi, b.bins, b.std_bins);
}

RandomizedStationaryPolicy make_randomized(const ExperimentConfig& c, std::size_t candidates) {
  RandomizedStationaryPolicy p;
  p.binning = make_binning(c);
  if (!c.policy->row.empty())
    p.table.assign(p.binning.bin_count(), c.policy->row);
  else
    p.table = c.policy->table;
  try {
    p.validate(candidates);
  } catch (const InvalidArgument& e) {
    throw ConfigError("policy", e.what());
  }
  return p;
}

// ---------------------------------------------------------------------------
// Tasks

template <class Env>
void run_design(Context& ctx, const Env& env) {
  const ExperimentConfig& c = ctx.config;
  const json candidates = candidates_json(env);
  ctx.results["candidate_count"] = env.candidate_count();
  const DesignResult dp = solve_finite_horizon(env, env.initial_belief(), *c.horizon, design_options(c));
  const PolicyTree greedy = greedy_policy_tree(env, env.initial_belief(), *c.horizon, c.prune_mass);

  ctx.results["value"] = dp.value;
  ctx.results["greedy_value"] = greedy.value();
  ctx.results["evaluated_nodes"] = dp.evaluated_nodes;
  ctx.results["memo_hits"] = dp.memo_hits;
  ctx.results["pruned_mass"] = dp.pruned_mass;
  ctx.results["tree_nodes"] = dp.tree.nodes.size();
  ctx.results["bellman_violation"] = max_bellman_violation(dp.tree);
  ctx.results["greedy_bellman_violation"] = max_bellman_violation(greedy);
  ctx.results["root_candidate"] = dp.tree.root().candidate;
  ctx.results["root_quantizer"] = candidates.at(dp.tree.root().candidate);

  ctx.output.write("policy_tree.json", to_json(dp.tree, candidates).dump(2) + "\n");
  ctx.output.write_with("policy_tree.csv",
                        [&](std::ostream& os) { write_policy_csv(os, dp.tree, candidates); });
  ctx.output.write_with("greedy_tree.csv",
                        [&](std::ostream& os) { write_policy_csv(os, greedy, candidates); });
  ctx.out << "J_T = " << format_double(dp.value) << " (greedy " << format_double(greedy.value())
          << ")\n";
}

void run_oracle_check(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const FiniteEnvironment env = build_environment([&] { return make_finite(c); });
  const std::size_t levels = c.quantizers->levels;
  const std::size_t horizon = *c.horizon;
  const DesignResult dp = solve_finite_horizon(env, env.initial_belief(), horizon, design_options(c));
  const double brute =
      oracles::brute_force_finite(env.chain().initial(), env.chain(), levels, horizon, env.cost());
  double delta = std::fabs(dp.value - brute);
  ctx.results["dp_value"] = dp.value;
  ctx.results["brute_force_value"] = brute;
  ctx.results["brute_force_delta"] = std::fabs(dp.value - brute);
  if (horizon <= 2) {
    try {
      const double adm =
          oracles::exhaustive_admissible_search(env.chain(), levels, horizon, env.cost());
      ctx.results["admissible_value"] = adm;
      ctx.results["admissible_delta"] = std::fabs(dp.value - adm);
      delta = std::max(delta, std::fabs(dp.value - adm));
    } catch (const InvalidArgument& e) {
      ctx.results["admissible_skipped"] = e.what();
    }
  }
  const bool pass = delta <= kOracleTolerance;
  ctx.results["delta"] = delta;
  ctx.results["pass"] = pass;
  ctx.out << (pass ? "PASS" : "FAIL") << ", |ΔJ| = " << format_short_scientific(delta) << "\n";
  if (!pass) {
    ctx.status = "oracle_mismatch";
    ctx.exit_code = kExitNumerical;
  }
}

template <class Env>
void run_rollout(Context& ctx, const Env& env) {
  const ExperimentConfig& c = ctx.config;
  const DesignOptions opts = design_options(c);
  RolloutPolicy policy = GreedyPolicy{};
  std::uint64_t steps = 0;
  const json candidates = candidates_json(env);

  switch (c.policy->kind) {
    case PolicyConfig::Kind::dp: {
      const DesignResult dp = solve_finite_horizon(env, env.initial_belief(), *c.horizon, opts);
      ctx.results["dp_value"] = dp.value;
      ctx.output.write("policy_tree.json", to_json(dp.tree, candidates).dump(2) + "\n");
      steps = c.rollout.steps.value_or(*c.horizon);
      policy = replay_policy(dp.tree);
      break;
    }
    case PolicyConfig::Kind::pieced: {
      PiecingSchedule schedule;
      try {
        schedule = piecing_schedule(c.schedule->horizons, c.schedule->k_max);
      } catch (const InvalidArgument& e) {
        throw ConfigError("schedule", e.what());
      }
      std::vector<PolicyTree> trees;
      json values = json::array();
      for (std::uint64_t h : schedule.horizons) {
        DesignResult dp = solve_finite_horizon(env, env.initial_belief(), h, opts);
        values.push_back(dp.value);
        trees.push_back(std::move(dp.tree));
      }
      ctx.results["segment_dp_values"] = values;
      ctx.results["schedule"] = to_json(schedule);
      steps = c.rollout.steps.value_or(schedule.boundaries.back());
      policy = build_pieced_policy(std::move(trees), std::move(schedule));
      break;
    }
    case PolicyConfig::Kind::greedy:
      steps = *c.rollout.steps;
      break;
    case PolicyConfig::Kind::randomized:
      steps = *c.rollout.steps;
      policy = make_randomized(c, env.candidate_count());
      break;
  }

  RolloutOptions ro;
  ro.horizon = steps;
  ro.paths = c.rollout.paths;
  ro.seed = *c.seed;
  const RolloutResult r = rollout(env, policy, ro);

  ctx.results["steps"] = steps;
  ctx.results["paths"] = ro.paths;
  ctx.results["mean_cost"] = r.mean_cost;
  ctx.results["std_error"] = r.std_error;
  ctx.results["cesaro_final"] = r.cesaro.back();
  ctx.results["max_renormalization_drift"] = r.max_renormalization_drift;

  ctx.output.write_with("trajectories.csv",
                        [&](std::ostream& os) { write_trajectory_csv(os, r.log); });
  ctx.output.write_with("cesaro.csv", [&](std::ostream& os) {
    os << "t,running_average\n";
    const std::size_t stride = std::max<std::size_t>(1, r.cesaro.size() / 10000);
    for (std::size_t t = 0; t < r.cesaro.size(); ++t)
      if (t % stride == 0 || t + 1 == r.cesaro.size())
        os << t << "," << format_double(r.cesaro[t]) << "\n";
  });
  ctx.out << "mean cost " << format_double(r.mean_cost) << " +- " << format_double(r.std_error)
          << " (" << ro.paths << " paths, " << steps << " steps)\n";
}

template <class Env>
OccupationHistogram occupancy_histogram(const Env& env, const RandomizedStationaryPolicy& policy,
                                        std::uint64_t steps, std::uint64_t seed) {
  OccupationAccumulator acc(policy.binning, env.candidate_count());
  RolloutOptions ro;
  ro.horizon = steps;
  ro.paths = 1;
  ro.seed = seed;
  ro.log_path0 = false;
  ro.occupancy = &acc;
  rollout(env, RolloutPolicy{policy}, ro);
  return acc.finish();
}

template <class Env>
void run_occupancy(Context& ctx, const Env& env) {
  const ExperimentConfig& c = ctx.config;
  const RandomizedStationaryPolicy policy = make_randomized(c, env.candidate_count());
  const OccupationHistogram hist = occupancy_histogram(env, policy, c.occupancy.steps, *c.seed);
  const double residual = invariance_residual(hist, env, policy);
  ctx.results["steps"] = c.occupancy.steps;
  ctx.results["invariance_residual"] = residual;
  ctx.results["average_stage_cost"] = hist.average_stage_cost;
  ctx.results["occupied_cells"] = hist.representatives.size();
  if (c.occupancy.compare_seed) {
    const OccupationHistogram other =
        occupancy_histogram(env, policy, c.occupancy.steps, *c.occupancy.compare_seed);
    ctx.results["compare_seed"] = *c.occupancy.compare_seed;
    ctx.results["seed_tv_distance"] = histogram_tv(hist, other);
  }
  ctx.output.write("histogram.json", to_json(hist).dump(2) + "\n");
  ctx.output.write_with("histogram.csv", [&](std::ostream& os) {
    os << "bin,quantizer,count,frequency\n";
    const std::vector<double> nu = hist.normalized();
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
      if (hist.counts[i] == 0) continue;
      os << i / hist.candidate_count << "," << i % hist.candidate_count << "," << hist.counts[i]
         << "," << format_double(nu[i]) << "\n";
    }
  });
  ctx.out << "invariance residual " << format_double(residual) << "\n";
}

void run_discounted_vi(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const ViConfig& v = c.vi;
  if (is_finite_model(c)) {
    const FiniteEnvironment env = build_environment([&] { return make_finite(c); });
    const std::vector<SimplexBelief> grid = simplex_grid(env.chain().size(), v.resolution);
    const DiscountedResult r = discounted_value_iteration(
        env, std::span<const SimplexBelief>(grid), v.discount, v.tol, v.max_iter);
    ctx.output.write_with("value_function.csv", [&](std::ostream& os) {
      for (std::size_t i = 0; i < env.chain().size(); ++i) os << "p" << i << ",";
      os << "value,candidate\n";
      for (std::size_t g = 0; g < grid.size(); ++g) {
        for (double p : grid[g].probabilities()) os << format_double(p) << ",";
        os << format_double(r.values[g]) << "," << r.policy[g] << "\n";
      }
    });
    ctx.results["grid_points"] = grid.size();
    ctx.results["iterations"] = r.iterations;
    ctx.results["residual"] = r.residual;
    ctx.results["approximate"] = r.approximate;
    ctx.results["value_min"] = *std::min_element(r.values.begin(), r.values.end());
    ctx.results["value_max"] = *std::max_element(r.values.begin(), r.values.end());
    ctx.out << "residual " << format_double(r.residual) << " after " << r.iterations
            << " iterations\n";
    return;
  }
  const GridEnvironment env = build_environment([&] { return make_grid(c); });
  std::vector<GridBelief> grid;
  std::vector<std::pair<double, double>> params;
  auto mesh = [](double lo, double hi, std::size_t count, std::size_t i) {
    return count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  };
  for (std::size_t i = 0; i < v.mean_count; ++i) {
    for (std::size_t j = 0; j < v.std_count; ++j) {
      const double mean = mesh(v.mean_lo, v.mean_hi, v.mean_count, i);
      const double sd = mesh(v.std_lo, v.std_hi, v.std_count, j);
      grid.push_back(GridBelief::normal(env.grid(), mean, sd));
      params.emplace_back(mean, sd);
    }
  }
  const DiscountedResult r = discounted_value_iteration(env, std::span<const GridBelief>(grid),
                                                        v.discount, v.tol, v.max_iter);
  ctx.output.write_with("value_function.csv", [&](std::ostream& os) {
    os << "mean,std,value,candidate\n";
    for (std::size_t g = 0; g < grid.size(); ++g)
      os << format_double(params[g].first) << "," << format_double(params[g].second) << ","
         << format_double(r.values[g]) << "," << r.policy[g] << "\n";
  });
  ctx.results["grid_points"] = grid.size();
  ctx.results["iterations"] = r.iterations;
  ctx.results["residual"] = r.residual;
  ctx.results["approximate"] = r.approximate;
  ctx.results["note"] = "approximate: nearest-neighbour grid bias is not quantified";
  ctx.out << "residual " << format_double(r.residual) << " after " << r.iterations
          << " iterations (approximate)\n";
}

void run_schedule(Context& ctx) {
  const ScheduleConfig& s = *ctx.config.schedule;
  PiecingSchedule schedule;
  try {
    schedule = piecing_schedule(s.horizons, s.k_max);
  } catch (const InvalidArgument& e) {
    throw ConfigError("schedule", e.what());
  }
  bool growth = true;
  for (std::size_t k = 1; k < schedule.segments(); ++k)
    growth = growth && schedule.segment_lengths[k] >= (k + 1) * schedule.segment_lengths[k - 1];
  ctx.results["schedule"] = to_json(schedule);
  ctx.results["segment_growth_holds"] = growth;
  ctx.output.write("schedule.json", to_json(schedule).dump(2) + "\n");
  ctx.output.write_with("schedule.csv",
                        [&](std::ostream& os) { write_schedule_csv(os, schedule); });
  ctx.out << "n =";
  for (auto n : schedule.repetitions) ctx.out << " " << n;
  ctx.out << "\n";
}

void dispatch(Task task, Context& ctx) {
  switch (task) {
    case Task::design:
      with_environment(ctx.config, [&](const auto& env) { run_design(ctx, env); });
      break;
    case Task::rollout:
      with_environment(ctx.config, [&](const auto& env) { run_rollout(ctx, env); });
      break;
    case Task::occupancy:
      with_environment(ctx.config, [&](const auto& env) { run_occupancy(ctx, env); });
      break;
    case Task::oracle_check:
      run_oracle_check(ctx);
      break;
    case Task::discounted_vi:
      run_discounted_vi(ctx);
      break;
    case Task::schedule:
      run_schedule(ctx);
      break;
  }
}

json tolerances(const ExperimentConfig& c) {
  return {{"mass_epsilon", kDefaultMassEpsilon},
          {"negligible_cell_mass", kNegligibleCellMass},
          {"prune_mass", c.prune_mass},
          {"node_budget", c.budget},
          {"oracle", kOracleTolerance},
          {"vi_tol", c.vi.tol},
          {"vi_max_iter", c.vi.max_iter}};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string git_blob_sha1(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_MD_CTX* md = EVP_MD_CTX_new();
  if (!md) throw Error("EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(md, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(md, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(md, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(md, digest, &length) == 1;
  EVP_MD_CTX_free(md);
  if (!ok) throw Error("SHA-1 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < length; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::string format_short_scientific(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  if (v == 0.0) return std::signbit(v) ? "-0.0e0" : "0.0e0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1e", v);
  std::string s(buf);
  const auto e = s.find('e');
  const int exponent = std::stoi(s.substr(e + 1));
  return s.substr(0, e) + "e" + std::to_string(exponent);
}

int run(Task task, ExperimentConfig config, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  try {
    validate_for_task(config, task);
    config.task = task;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  const json config_echo = echo(config);
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "config error: output_dir: cannot create " << dir << ": " << ec.message() << "\n";
    return kExitConfig;
  }

  Output output(dir);
  Context ctx{config, output, out};
  try {
    dispatch(task, ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BudgetExceeded& e) {
    ctx.status = "budget_exceeded";
    ctx.exit_code = kExitNumerical;
    ctx.results["partial"] = true;
    ctx.results["budget"] = e.budget();
    ctx.results["partial_bound"] = finite_or_null(e.partial_bound());
    err << e.what() << "\n";
  } catch (const NotConverged& e) {
    ctx.status = "not_converged";
    ctx.exit_code = kExitNumerical;
    ctx.results["partial"] = true;
    ctx.results["residual"] = e.residual();
    err << e.what() << "\n";
  } catch (const Error& e) {
    ctx.status = "failed";
    ctx.exit_code = kExitNumerical;
    ctx.results["error"] = e.what();
    err << "error: " << e.what() << "\n";
  }

  json doc = {{"task", std::string(task_name(task))},
              {"status", ctx.status},
              {"config", config_echo},
              {"input_hash", git_blob_sha1(config_echo.dump())},
              {"tolerances", tolerances(config)},
              {"kernels", std::string(simd::active().name)},
              {"results", ctx.results},
              {"artifacts", output.artifacts()}};
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  try {
    atomic_write(dir / "results.json", doc.dump(2) + "\n");
    const json timing = {{"task", std::string(task_name(task))},
                         {"runtime_seconds", seconds},
                         {"finished_at", utc_timestamp()}};
    atomic_write(dir / "timing.json", timing.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return ctx.exit_code;
}

int run(Task task, const std::string& config_path, const RunOverrides& overrides,
        std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  try {
    config = parse_config(read_config_file(config_path));
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (overrides.out) config.output_dir = *overrides.out;
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.budget) {
    if (*overrides.budget == 0) {
      err << "config error: budget: must be at least 1\n";
      return kExitConfig;
    }
    config.budget = *overrides.budget;
  }
  return run(task, std::move(config), out, err);
}

}  // namespace zdq::cli
