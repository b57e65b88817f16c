#pragma once

// Nested Monte-Carlo tree search over circuit layouts.
//
// A node at depth i holds a layout prefix of length i; each edge appends one
// pool index. Every layer decision is a local bandit whose arms are the
// allowed pool entries. Under the naive assumption the reward of a complete
// circuit is credited unchanged to every (node, action) on its arc, so each
// arm's running mean estimates the local reward of that layer choice.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "qas/params.hpp"
#include "qas/pool.hpp"
#include "qas/supernet.hpp"
#include "qas/tasks.hpp"

namespace qas {

struct ArmStats {
    std::uint64_t pulls = 0;
    double mean_reward = 0.0;
};

struct TreeNode {
    CircuitLayout prefix;
    TreeNode *parent = nullptr;
    /// n_i: rounds whose arc passed through this node.
    std::uint64_t visits = 0;
    /// Running mean of every reward backpropagated through this node.
    double mean_reward = 0.0;
    /// allowed_actions(prefix) at creation time; empty for leaves.
    std::vector<std::size_t> allowed;
    std::map<std::size_t, ArmStats> arms;
    std::map<std::size_t, std::unique_ptr<TreeNode>> children;
    /// Excluded from selection; their stats are kept.
    std::set<std::size_t> pruned;

    [[nodiscard]] std::size_t depth() const noexcept { return prefix.size(); }
    [[nodiscard]] bool fully_expanded() const noexcept { return children.size() == allowed.size(); }
};

struct SearchConfig {
    /// UCB exploration weight.
    double alpha = 0.4;
    double prune_ratio = 0.5;
    std::size_t min_children = 2;
    /// Simulation rounds N per sample_arc / per level of exploit_arc.
    std::size_t rounds = 10;
    /// 0: best circuit found by root-only rounds; 1: per-level nested rounds.
    std::size_t nesting_level = 1;
    std::size_t iterations = 50;
    /// Overrides the task's threshold when set.
    std::optional<double> early_stop_reward;
    std::uint64_t seed = 0;
};

/// Throws ConfigError for out-of-range fields.
void validate(const SearchConfig &cfg);

struct TreeStats {
    std::size_t node_count = 0;
    std::size_t prune_count = 0;
    std::size_t max_depth = 0;
    std::uint64_t simulations = 0;
};

/// Owns the nodes and the tie/expansion RNG. Depth of leaves is limits.max_layers.
class SearchTree {
  public:
    SearchTree(OperationPool pool, HardLimits limits, std::uint64_t seed);
    SearchTree(const SearchTree &) = delete;
    SearchTree &operator=(const SearchTree &) = delete;

    [[nodiscard]] TreeNode &root() noexcept { return *root_; }
    [[nodiscard]] const TreeNode &root() const noexcept { return *root_; }
    [[nodiscard]] const OperationPool &pool() const noexcept { return pool_; }
    [[nodiscard]] const HardLimits &limits() const noexcept { return limits_; }
    [[nodiscard]] std::size_t leaf_depth() const noexcept { return limits_.max_layers; }
    [[nodiscard]] bool is_leaf(const TreeNode &n) const noexcept { return n.depth() >= leaf_depth(); }
    [[nodiscard]] const TreeStats &stats() const noexcept { return stats_; }

    /// Creates the child reached by `action`.
    TreeNode &expand(TreeNode &node, std::size_t action);
    [[nodiscard]] std::mt19937_64 &rng() noexcept { return rng_; }
    void note_pruned(std::size_t n) noexcept { stats_.prune_count += n; }
    void note_simulation() noexcept { ++stats_.simulations; }

  private:
    OperationPool pool_;
    HardLimits limits_;
    std::unique_ptr<TreeNode> root_;
    std::mt19937_64 rng_;
    TreeStats stats_;
};

/// Reward of a complete layout (the simulation stage).
using RewardFn = std::function<double(const CircuitLayout &)>;

/// avg + alpha * sqrt(2 ln n_i / n_j); +inf when n_j == 0.
[[nodiscard]] double ucb_score(double avg_reward, std::uint64_t node_visits,
                               std::uint64_t arm_pulls, double alpha);

/// Credits `reward` to every (node, action) on the arc from the root to `leaf`.
void backpropagate(TreeNode &leaf, double reward);

/// Marks children whose mean reward is below prune_ratio * node.mean_reward,
/// lowest first, while more than min_children unpruned children remain.
/// Children never pulled are left alone. Returns the number newly pruned.
std::size_t prune_children(TreeNode &node, double prune_ratio, std::size_t min_children);

/// Expands a random unperformed allowed action if the node is not fully
/// expanded; otherwise prunes and returns the unpruned child of highest UCB
/// score (lowest pool index on ties).
TreeNode &select_node(SearchTree &tree, TreeNode &node, const SearchConfig &cfg);

/// Descends from `start` to a leaf, evaluates it, backpropagates; returns the reward.
double execute_single_round(SearchTree &tree, TreeNode &start, const SearchConfig &cfg,
                            const RewardFn &reward);

/// N rounds from the root, then a policy descent from the root to a leaf.
[[nodiscard]] CircuitLayout sample_arc(SearchTree &tree, const SearchConfig &cfg,
                                       const RewardFn &reward, std::size_t rounds);

/// At every level: N rounds from the current node, then one selection step.
[[nodiscard]] CircuitLayout exploit_arc(SearchTree &tree, const SearchConfig &cfg,
                                        const RewardFn &reward, std::size_t rounds);

/// Reward function evaluating the task with the given (live) parameters.
[[nodiscard]] RewardFn task_reward(const TaskSpec &task, const OperationPool &pool,
                                   const SharedParameters &params);

struct TracePoint {
    std::size_t iteration = 0;
    /// Reward and loss of the circuit extracted in this iteration.
    double reward = 0.0;
    double loss = 0.0;
    /// Best reward seen up to and including this iteration.
    double best_reward = 0.0;
};

struct SearchReport {
    CircuitLayout best_layout;
    double best_reward = 0.0;
    double best_loss = 0.0;
    /// Parameters at the moment best_reward was measured.
    SharedParameters best_params;
    SharedParameters final_params;
    std::vector<TracePoint> reward_trace;
    bool stopped_early = false;
    TreeStats tree_stats;
};

struct SearchSetup {
    InitSpec init;
    /// Starting parameters; overrides `init` when set.
    std::optional<SharedParameters> params;
};

/// Optional warm-up (opt.steps > 0 and a parametric pool), then per
/// iteration: sample a batch of opt.batch_size arcs, update the shared
/// parameters with their averaged gradient, extract the current best circuit
/// and stop once its reward reaches the early-stop threshold.
[[nodiscard]] SearchReport run_search(const TaskSpec &task, const OperationPool &pool,
                                      const HardLimits &limits, const SearchConfig &cfg,
                                      const OptimizerConfig &opt, const SearchSetup &setup = {});

} // namespace qas
