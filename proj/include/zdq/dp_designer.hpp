#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "zdq/environment.hpp"
#include "zdq/error.hpp"

namespace zdq {

struct PolicyBranch {
  std::size_t symbol = 0;
  double probability = 0.0;
  std::size_t child = 0;  // index into PolicyTree::nodes
};

struct PolicyNode {
  std::size_t t = 0;
  std::size_t candidate = 0;
  double stage_cost = 0.0;  // c(pi_t, Q_t), not divided by the horizon
  double value = 0.0;       // expected (1/T) sum of remaining stage costs
  double pruned_mass = 0.0;  // branch mass dropped below the pruning threshold
  BeliefSnapshot belief;
  std::vector<PolicyBranch> children;
};

// Markov policy on the reachable belief tree: one quantizer per node,
// children indexed by transmitted symbol. nodes[0] is the root, stored in
// depth-first preorder.
struct PolicyTree {
  std::size_t horizon = 0;
  std::vector<PolicyNode> nodes;

  const PolicyNode& root() const { return nodes.front(); }
  double value() const { return nodes.front().value; }
  // Symbol -> child index, or nullopt when the branch was not expanded.
  std::optional<std::size_t> child(std::size_t node, std::size_t symbol) const;
};

struct DesignOptions {
  std::size_t node_budget = 2'000'000;
  double prune_mass = 1e-9;
  bool memoize = true;
  std::size_t memo_capacity_bytes = std::size_t{1} << 30;
};

struct DesignResult {
  double value = 0.0;
  PolicyTree tree;
  std::size_t evaluated_nodes = 0;
  std::size_t memo_hits = 0;
  // Probability-weighted branch mass dropped by pruning along the optimal
  // tree; the value error is at most pruned_mass * max stage cost.
  double pruned_mass = 0.0;
};

// Largest |value - (stage/T + sum prob * child value)| over the tree.
double max_bellman_violation(const PolicyTree& tree);

// sum_m masses[m] * next_values[m]; cells with mass <= eps contribute 0, the
// others must have an entry.
double expected_continuation(std::span<const double> masses,
                             const std::map<std::size_t, double>& next_values,
                             double eps_mass = kDefaultMassEpsilon);
double expected_continuation(const GridBelief& belief, const IntervalQuantizer& q,
                             const std::map<std::size_t, double>& next_values);
double expected_continuation(const SimplexBelief& belief, const FinitePartition& q,
                             const std::map<std::size_t, double>& next_values);

// Myopic choice: argmin of the stage cost, first candidate on ties.
template <class Env>
std::size_t greedy_policy_step(const Env& env, const typename Env::Belief& belief) {
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < env.candidate_count(); ++q) {
    const double c = env.evaluate(belief, q).cost;
    if (c < best_cost) {
      best_cost = c;
      best = q;
    }
  }
  return best;
}

namespace detail {

// Depth-first backward induction over the forward-reachable belief tree.
template <class Env>
class FiniteHorizonSearch {
 public:
  using Belief = typename Env::Belief;

  FiniteHorizonSearch(const Env& env, std::size_t horizon, const DesignOptions& options)
      : env_(env), horizon_(horizon), options_(options) {}

  DesignResult run(const Belief& root) {
    auto best = solve(root, 0);
    DesignResult result;
    result.value = best->value;
    result.evaluated_nodes = evaluated_;
    result.memo_hits = memo_hits_;
    result.tree.horizon = horizon_;
    extract(*best, root, 1.0, result);
    return result;
  }

 private:
  struct Node {
    std::size_t candidate = 0;
    double stage_cost = 0.0;
    double value = 0.0;
    double pruned_mass = 0.0;
    std::vector<std::size_t> symbols;
    std::vector<double> masses;
    std::vector<std::shared_ptr<const Node>> children;
  };

  std::shared_ptr<const Node> solve(const Belief& belief, std::size_t t) {
    std::string key;
    if (options_.memoize) {
      key = env_.memo_key(belief);
      key.append(reinterpret_cast<const char*>(&t), sizeof t);
      if (auto it = memo_.find(key); it != memo_.end()) {
        ++memo_hits_;
        return it->second;
      }
    }
    if (++evaluated_ > options_.node_budget)
      throw BudgetExceeded(options_.node_budget, root_bound_);

    const bool last = t + 1 == horizon_;
    const double inv_horizon = 1.0 / static_cast<double>(horizon_);
    std::shared_ptr<Node> best;
    for (std::size_t q = 0; q < env_.candidate_count(); ++q) {
      const StageEvaluation ev = env_.evaluate(belief, q);
      auto node = std::make_shared<Node>();
      node->candidate = q;
      node->stage_cost = ev.cost;
      node->value = ev.cost * inv_horizon;
      if (!last) {
        for (std::size_t m = 0; m < ev.masses.size(); ++m) {
          const double mass = ev.masses[m];
          if (!(mass > options_.prune_mass)) {
            node->pruned_mass += std::max(mass, 0.0);
            continue;
          }
          auto child = solve(env_.posterior(belief, q, m), t + 1);
          node->value += mass * child->value;
          node->symbols.push_back(m);
          node->masses.push_back(mass);
          node->children.push_back(std::move(child));
        }
      }
      if (!best || node->value < best->value) best = std::move(node);
      if (t == 0) root_bound_ = std::min(root_bound_, best->value);
    }
    if (options_.memoize && memo_bytes_ + key.size() <= options_.memo_capacity_bytes) {
      memo_bytes_ += key.size();
      memo_.emplace(std::move(key), best);
    }
    return best;
  }

  std::size_t extract(const Node& node, const Belief& belief, double reach, DesignResult& out) {
    const std::size_t index = out.tree.nodes.size();
    out.tree.nodes.emplace_back();
    {
      PolicyNode& pn = out.tree.nodes.back();
      pn.t = depth_;
      pn.candidate = node.candidate;
      pn.stage_cost = node.stage_cost;
      pn.value = node.value;
      pn.pruned_mass = node.pruned_mass;
      pn.belief = env_.snapshot(belief);
    }
    out.pruned_mass += reach * node.pruned_mass;
    for (std::size_t k = 0; k < node.children.size(); ++k) {
      const Belief next = env_.posterior(belief, node.candidate, node.symbols[k]);
      ++depth_;
      const std::size_t child = extract(*node.children[k], next, reach * node.masses[k], out);
      --depth_;
      out.tree.nodes[index].children.push_back({node.symbols[k], node.masses[k], child});
    }
    return index;
  }

  const Env& env_;
  std::size_t horizon_;
  DesignOptions options_;
  std::size_t evaluated_ = 0;
  std::size_t memo_hits_ = 0;
  std::size_t memo_bytes_ = 0;
  std::size_t depth_ = 0;
  double root_bound_ = std::numeric_limits<double>::infinity();
  std::unordered_map<std::string, std::shared_ptr<const Node>> memo_;
};

template <class Env>
std::size_t build_greedy(const Env& env, const typename Env::Belief& belief, std::size_t t,
                         std::size_t horizon, double prune_mass, PolicyTree& tree) {
  const std::size_t q = greedy_policy_step(env, belief);
  const StageEvaluation ev = env.evaluate(belief, q);
  const std::size_t index = tree.nodes.size();
  tree.nodes.emplace_back();
  tree.nodes[index].t = t;
  tree.nodes[index].candidate = q;
  tree.nodes[index].stage_cost = ev.cost;
  tree.nodes[index].belief = env.snapshot(belief);
  double value = ev.cost / static_cast<double>(horizon);
  if (t + 1 < horizon) {
    for (std::size_t m = 0; m < ev.masses.size(); ++m) {
      if (!(ev.masses[m] > prune_mass)) {
        tree.nodes[index].pruned_mass += std::max(ev.masses[m], 0.0);
        continue;
      }
      const std::size_t child =
          build_greedy(env, env.posterior(belief, q, m), t + 1, horizon, prune_mass, tree);
      value += ev.masses[m] * tree.nodes[child].value;
      tree.nodes[index].children.push_back({m, ev.masses[m], child});
    }
  }
  tree.nodes[index].value = value;
  return index;
}

}  // namespace detail

// Optimal Markov policy for E[(1/T) sum_{t<T} c(pi_t, Q_t)] over the candidate
// list, by backward induction on the reachable belief tree from `root`.
// Ties go to the earliest candidate. Throws BudgetExceeded when more than
// options.node_budget belief nodes would be evaluated.
template <class Env>
DesignResult solve_finite_horizon(const Env& env, const typename Env::Belief& root,
                                  std::size_t horizon, const DesignOptions& options = {}) {
  if (horizon == 0) throw InvalidArgument("horizon must be at least 1");
  if (env.candidate_count() == 0) throw InvalidArgument("candidate list is empty");
  return detail::FiniteHorizonSearch<Env>(env, horizon, options).run(root);
}

// The greedy policy rolled through the exact belief recursion, as a tree
// whose node values are its expected average cost.
template <class Env>
PolicyTree greedy_policy_tree(const Env& env, const typename Env::Belief& root,
                              std::size_t horizon, double prune_mass = 1e-9) {
  if (horizon == 0) throw InvalidArgument("horizon must be at least 1");
  PolicyTree tree;
  tree.horizon = horizon;
  detail::build_greedy(env, root, 0, horizon, prune_mass, tree);
  return tree;
}

}  // namespace zdq
