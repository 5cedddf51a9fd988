// Acceptance suite: one PASS/FAIL line per criterion A1..A11.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zdq/belief.hpp"
#include "zdq/dp_designer.hpp"
#include "zdq/horizon_infinite.hpp"
#include "zdq/oracles.hpp"
#include "zdq/serialization.hpp"

namespace {

namespace fs = std::filesystem;
using namespace zdq;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string cli_path;
std::string config_dir;
fs::path work_dir;

int run_cli(const std::string& args) {
  const std::string cmd = cli_path + " " + args + " >/dev/null 2>>" + (work_dir / "cli_stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<double>> random_stochastic(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.02, 1.0);
  std::vector<std::vector<double>> p(n, std::vector<double>(n));
  for (auto& row : p) {
    double s = 0.0;
    for (double& v : row) s += (v = u(gen));
    for (double& v : row) v /= s;
  }
  return p;
}

std::vector<double> random_simplex(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.02, 1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (double& v : p) s += (v = u(gen));
  for (double& v : p) v /= s;
  return p;
}

// Random chain with either the quadratic cost on random state values or a
// random tabular cost.
struct Instance {
  FiniteChain chain;
  CostModel cost;
};

Instance random_instance(std::size_t n, bool tabular, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> values(n);
  for (double& v : values) v = u(gen);
  FiniteChain chain(random_stochastic(n, gen), random_simplex(n, gen), values);
  if (!tabular) return {std::move(chain), CostModel::quadratic()};
  std::vector<std::vector<double>> table(n, std::vector<double>(n));
  for (auto& row : table)
    for (double& v : row) v = u(gen);
  return {std::move(chain), CostModel::tabular(table)};
}

// --- A1 -------------------------------------------------------------------

Verdict a1() {
  std::mt19937_64 gen(101);
  double worst = 0.0;
  int done = 0;
  while (done < 100) {
    const std::size_t n = 2 + gen() % 3;
    const FiniteChain chain(random_stochastic(n, gen), random_simplex(n, gen));
    const std::vector<double> pi = random_simplex(n, gen);
    const auto parts = enumerate_finite_partitions(n, 1 + gen() % n);
    const FinitePartition& q = parts[gen() % parts.size()];
    const std::size_t m = gen() % q.levels();
    double mass = 0.0;
    for (std::size_t x = 0; x < n; ++x)
      if (q.classify(x) == m) mass += pi[x];
    if (mass == 0.0) continue;
    std::vector<double> hand(n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
      if (q.classify(x) != m) continue;
      for (std::size_t y = 0; y < n; ++y) hand[y] += pi[x] * chain.transition(x, y) / mass;
    }
    const SimplexBelief got = filter_update(SimplexBelief(pi), chain, q, m);
    for (std::size_t y = 0; y < n; ++y) worst = std::max(worst, std::fabs(got[y] - hand[y]));
    ++done;
  }
  return {worst <= 1e-12, "100 instances, max |diff| = " + num(worst)};
}

// --- A2 -------------------------------------------------------------------

std::vector<PolicyTree> a2_trees;

Verdict a2() {
  std::mt19937_64 gen(202);
  double worst = 0.0;
  int count = 0, nonzero = 0;
  for (int i = 0; i < 10; ++i) {
    const Instance inst = random_instance(2 + i % 2, i % 2 == 0 || i % 3 == 0, gen);
    const FiniteEnvironment env = make_finite_environment(inst.chain, inst.cost, 2);
    for (std::size_t t = 1; t <= 3; ++t) {
      const DesignResult dp = solve_finite_horizon(env, env.initial_belief(), t);
      const double oracle = oracles::brute_force_finite(inst.chain.initial(), inst.chain, 2, t, inst.cost);
      worst = std::max(worst, std::fabs(dp.value - oracle));
      if (oracle > 1e-6) ++nonzero;
      ++count;
      a2_trees.push_back(dp.tree);
    }
  }
  return {worst <= 1e-12 && count >= 20,
          std::to_string(count) + " instances (" + std::to_string(nonzero) + " nonzero), max |dJ| = " + num(worst)};
}

// --- A3 -------------------------------------------------------------------

Verdict a3() {
  std::mt19937_64 gen(303);
  double worst = 0.0;
  int count = 0;
  for (int i = 0; i < 12; ++i) {
    const Instance inst = random_instance(2 + i % 2, i % 2 == 0, gen);
    const FiniteEnvironment env = make_finite_environment(inst.chain, inst.cost, 2);
    const double dp = solve_finite_horizon(env, env.initial_belief(), 2).value;
    const double adm = oracles::exhaustive_admissible_search(inst.chain, 2, 2, inst.cost);
    worst = std::max(worst, std::fabs(dp - adm));
    ++count;
  }
  return {worst <= 1e-12 && count >= 10, std::to_string(count) + " instances, max |dJ| = " + num(worst)};
}

// --- A4 -------------------------------------------------------------------

Verdict a4() {
  const LinearGaussianSource iid(0.0, 1.0);
  const GridEnvironment env(iid, default_grid(iid), enumerate_interval_candidates({2, -2.0, 2.0, 41}));
  const double target = 1.0 - 2.0 / std::numbers::pi;
  bool ok = true;
  double worst = 0.0;
  for (std::size_t t = 1; t <= 3; ++t) {
    const DesignResult r = solve_finite_horizon(env, env.initial_belief(), t);
    for (const auto& node : r.tree.nodes) {
      const auto th = env.candidate(node.candidate).thresholds();
      ok = ok && th.size() == 1 && th[0] == 0.0;
    }
    worst = std::max(worst, std::fabs(r.value - target));
  }
  return {ok && worst <= 2e-3,
          std::string(ok ? "threshold 0 everywhere" : "nonzero threshold chosen") + ", T=1..3, max |J - (1-2/pi)| = " +
              num(worst)};
}

// --- A5 -------------------------------------------------------------------

Verdict a5() {
  const double sigma = 1.0;
  const double c = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  const double c1 = 1.0 / (sigma * sigma * std::sqrt(2.0 * std::numbers::pi * std::numbers::e));
  const LinearGaussianSource ar(0.5, sigma);
  const GridEnvironment env(ar, default_grid(ar), enumerate_interval_candidates({2, -2.0, 2.0, 41}));
  const double h = env.grid().spacing();
  const double tol = 2.0 * h * c1;
  double max_density = 0.0, max_lip = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    RolloutOptions opts;
    opts.horizon = 100;
    opts.seed = seed;
    opts.keep_beliefs = true;
    const RolloutResult r = rollout(env, RolloutPolicy{GreedyPolicy{}}, opts);
    for (std::size_t t = 1; t < r.log.beliefs.size(); ++t) {
      const auto& v = r.log.beliefs[t].values;
      for (std::size_t i = 0; i < v.size(); ++i) {
        max_density = std::max(max_density, v[i]);
        if (i + 1 < v.size()) max_lip = std::max(max_lip, std::fabs(v[i + 1] - v[i]) / h);
      }
      ++checked;
    }
  }
  const bool ok = checked == 297 && max_density <= c + tol && max_lip <= c1 + tol;
  return {ok, std::to_string(checked) + " beliefs, max density " + num(max_density) + " (<= " + num(c + tol) +
                  "), Lipschitz " + num(max_lip) + " (<= " + num(c1 + tol) + ")"};
}

// --- A6 -------------------------------------------------------------------

// Checks a tree as emitted in policy_tree.json, independently of the solver.
double json_bellman(const json& node, double horizon) {
  double cont = 0.0, worst = 0.0;
  for (const auto& b : node.at("children")) {
    cont += b.at("probability").get<double>() * b.at("node").at("value").get<double>();
    worst = std::max(worst, json_bellman(b.at("node"), horizon));
  }
  const double expect = node.at("stage_cost").get<double>() / horizon + cont;
  return std::max(worst, std::fabs(node.at("value").get<double>() - expect));
}

Verdict a6() {
  double worst = 0.0;
  std::size_t trees = 0;
  for (const auto& t : a2_trees) {
    worst = std::max(worst, max_bellman_violation(t));
    ++trees;
  }
  for (const char* name : {"design_finite", "design_gaussian", "rollout_dp"}) {
    const std::string task = std::string(name).rfind("design", 0) == 0 ? "design" : "rollout";
    const fs::path out = work_dir / (std::string("a6_") + name);
    if (run_cli(task + " --config " + config_dir + "/" + name + ".json --out " + out.string()) != 0)
      return {false, std::string("CLI failed on ") + name};
    for (const char* file : {"policy_tree.json", "greedy_tree.json"}) {
      if (!fs::exists(out / file)) continue;
      const json tree = json::parse(slurp(out / file));
      worst = std::max(worst, json_bellman(tree.at("root"), tree.at("horizon").get<double>()));
      ++trees;
    }
  }
  return {worst <= 1e-9, std::to_string(trees) + " trees, max violation " + num(worst)};
}

// --- A7 -------------------------------------------------------------------

Verdict a7() {
  std::mt19937_64 gen(707);
  double worst_z = 0.0;
  bool ok = true;
  int count = 0;
  for (int i = 0; i < 4; ++i) {
    const Instance inst = random_instance(3, i % 2 == 1, gen);
    const FiniteEnvironment env = make_finite_environment(inst.chain, inst.cost, 2);
    const std::size_t horizon = 2 + i % 2;
    const DesignResult dp = solve_finite_horizon(env, env.initial_belief(), horizon);
    RolloutOptions opts;
    opts.horizon = horizon;
    opts.paths = 10000;
    opts.seed = 7000 + i;
    opts.log_path0 = false;
    const RolloutResult r = rollout(env, RolloutPolicy{replay_policy(dp.tree)}, opts);
    const double diff = std::fabs(r.mean_cost - dp.value);
    ok = ok && diff <= 3.0 * r.std_error;
    if (r.std_error > 0.0) worst_z = std::max(worst_z, diff / r.std_error);
    ++count;
  }
  return {ok, std::to_string(count) + " chains x 1e4 paths, max |mean - J|/SE = " + num(worst_z)};
}

// --- A8 -------------------------------------------------------------------

Verdict a8() {
  const std::vector<std::uint64_t> worked = {2, 4, 8, 16};
  const PiecingSchedule ex = piecing_schedule(worked, 3);
  bool ok = ex.repetitions == std::vector<std::uint64_t>{1, 4, 6};

  std::mt19937_64 gen(808);
  int schedules = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t k_max = 8;
    std::vector<std::uint64_t> h(k_max + 1);
    std::uint64_t v = 0;
    for (auto& x : h) x = (v += 1 + gen() % (trial % 2 ? 3 : v + 1));
    const PiecingSchedule s = piecing_schedule(h, k_max);
    ok = ok && s.repetitions[0] == 1;
    for (std::size_t k = 1; k < k_max; ++k) {
      // n_k = ceil(k max(T_{k+1}/T_k, n_{k-1} T_{k-1} / T_k)) in integers.
      const std::uint64_t kk = k + 1;
      const std::uint64_t a = (kk * h[k + 1] + h[k] - 1) / h[k];
      const std::uint64_t b = (kk * s.repetitions[k - 1] * h[k - 1] + h[k] - 1) / h[k];
      ok = ok && s.repetitions[k] == std::max(a, b);
      ok = ok && s.segment_lengths[k] >= kk * s.segment_lengths[k - 1];
    }
    ++schedules;
  }
  const fs::path out = work_dir / "a8";
  ok = ok && run_cli("schedule --config " + config_dir + "/schedule.json --out " + out.string()) == 0;
  ok = ok && slurp(out / "schedule.csv").find("3,8,6,48,66") != std::string::npos;
  return {ok, "worked example n=(1,4,6), " + std::to_string(schedules) + " random schedules with k <= 8"};
}

// --- A9 -------------------------------------------------------------------

Verdict a9() {
  const FiniteChain chain({{0.9, 0.1}, {0.2, 0.8}}, {0.5, 0.5}, {0.0, 1.0});
  const auto grid = simplex_grid(2, 200);
  const std::span<const SimplexBelief> g(grid);
  bool ok = grid.size() == 201;
  double worst_residual = 0.0;
  std::size_t most_iterations = 0;
  const std::vector<FiniteEnvironment> envs = {
      FiniteEnvironment(chain, CostModel::quadratic(), enumerate_finite_partitions(2, 1)),
      FiniteEnvironment(chain, CostModel::tabular({{0.0, 1.0, 0.4}, {1.0, 0.0, 0.4}}),
                        enumerate_finite_partitions(2, 1)),
  };
  for (const auto& env : envs) {
    const DiscountedResult r = discounted_value_iteration(env, g, 0.9, 1e-9, 400);
    worst_residual = std::max(worst_residual, r.residual);
    most_iterations = std::max(most_iterations, r.iterations);
    ok = ok && r.residual < 1e-6 && r.iterations <= 400;

    const DiscountedResult zero = discounted_value_iteration(env, g, 0.0, 1e-12, 400);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double best = env.evaluate(grid[i], 0).cost;
      for (std::size_t q = 1; q < env.candidate_count(); ++q) best = std::min(best, env.evaluate(grid[i], q).cost);
      ok = ok && zero.values[i] == best;
    }
  }
  // Hand value of the quadratic one-cell stage cost: p (1 - p).
  const DiscountedResult zero = discounted_value_iteration(envs[0], g, 0.0, 1e-12, 400);
  for (std::size_t i = 0; i < grid.size(); ++i)
    ok = ok && std::fabs(zero.values[i] - grid[i][0] * grid[i][1]) <= 1e-15;
  return {ok, "201-point grid, beta=0.9 residual " + num(worst_residual) + " after " +
                  std::to_string(most_iterations) + " iterations, beta=0 exact"};
}

// --- A10 ------------------------------------------------------------------

Verdict a10() {
  const FiniteChain base({{0.9, 0.1}, {0.2, 0.8}}, {0.5, 0.5});
  const SimplexBelief star = invariant_distribution(base);
  const FiniteChain chain({{0.9, 0.1}, {0.2, 0.8}}, {star[0], star[1]});
  const FiniteEnvironment env = make_finite_environment(chain, CostModel::quadratic(), 2);
  const BeliefBinning binning = BeliefBinning::simplex(50);
  RandomizedStationaryPolicy policy{binning, {}};
  policy.table.assign(binning.bin_count(), std::vector<double>(env.candidate_count(),
                                                               1.0 / static_cast<double>(env.candidate_count())));
  auto measure = [&](std::uint64_t seed) {
    OccupationAccumulator acc(binning, env.candidate_count());
    RolloutOptions opts;
    opts.horizon = 100000;
    opts.seed = seed;
    opts.log_path0 = false;
    opts.occupancy = &acc;
    rollout(env, RolloutPolicy{policy}, opts);
    return acc.finish();
  };
  const OccupationHistogram a = measure(1);
  const OccupationHistogram b = measure(2);
  const double residual = invariance_residual(a, env, policy);
  const double tv = histogram_tv(a, b);

  const fs::path out = work_dir / "a10";
  const bool cli_ok = run_cli("occupancy --config " + config_dir + "/occupancy.json --out " + out.string()) == 0;
  double cli_residual = 1.0, cli_tv = 1.0;
  if (cli_ok) {
    const json r = json::parse(slurp(out / "results.json")).at("results");
    cli_residual = r.at("invariance_residual").get<double>();
    cli_tv = r.at("seed_tv_distance").get<double>();
  }
  const bool ok = residual < 0.1 && tv < 0.05 && cli_ok && cli_residual < 0.1 && cli_tv < 0.05;
  return {ok, "1e5 steps, residual " + num(residual) + ", seed TV " + num(tv) + " (CLI: " + num(cli_residual) +
                  ", " + num(cli_tv) + ")"};
}

// --- A11 ------------------------------------------------------------------

Verdict a11() {
  int compared = 0;
  for (const char* name : {"rollout_pieced", "occupancy", "design_gaussian", "discounted_vi"}) {
    std::string task = name;
    task = task.substr(0, task.find('_'));
    if (task == "discounted") task = "discounted-vi";
    std::string first;
    for (int run = 0; run < 2; ++run) {
      const fs::path out = work_dir / ("a11_" + std::string(name) + "_" + std::to_string(run));
      if (run_cli(task + " --config " + config_dir + "/" + name + ".json --out " + out.string()) != 0)
        return {false, std::string("CLI failed on ") + name};
      const std::string bytes = slurp(out / "results.json");
      if (run == 0) first = bytes;
      else if (bytes != first) return {false, std::string("results.json differs for ") + name};
    }
    ++compared;
  }
  return {true, std::to_string(compared) + " configs, results.json byte-identical"};
}

struct Criterion {
  const char* id;
  double limit_seconds;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria A1-A11"};
  app.add_option("--cli", cli_path, "Path to the zdq executable")->required();
  app.add_option("--configs", config_dir, "Directory with the example configs")->required();
  CLI11_PARSE(app, argc, argv);

  work_dir = fs::temp_directory_path() / ("zdq_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work_dir);
  fs::create_directories(work_dir);

  const std::vector<Criterion> criteria = {
      {"A1", 1, a1},   {"A2", 30, a2},  {"A3", 60, a3},  {"A4", 10, a4},
      {"A5", 30, a5},  {"A6", 10, a6},  {"A7", 60, a7},  {"A8", 1, a8},
      {"A9", 30, a9},  {"A10", 60, a10}, {"A11", 30, a11},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.limit_seconds) {
      v.pass = false;
      v.detail += ", over the " + num(c.limit_seconds) + " s limit";
    }
    if (!v.pass) ++failures;
    std::printf("%-4s %s  %s  [%.2f s]\n", c.id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  fs::remove_all(work_dir);
  return failures == 0 ? 0 : 1;
}
