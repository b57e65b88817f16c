#include "qas/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "qas/errors.hpp"

namespace qas {

void validate(const SearchConfig &cfg) {
    if (!(cfg.alpha >= 0.0) || !std::isfinite(cfg.alpha)) {
        throw ConfigError("alpha must be a finite non-negative number");
    }
    if (!(cfg.prune_ratio >= 0.0 && cfg.prune_ratio < 1.0)) {
        throw ConfigError("prune_ratio must lie in [0, 1)");
    }
    if (cfg.min_children < 1) throw ConfigError("min_children must be >= 1");
    if (cfg.nesting_level > 1) throw ConfigError("nesting_level must be 0 or 1");
}

SearchTree::SearchTree(OperationPool pool, HardLimits limits, std::uint64_t seed)
    : pool_(std::move(pool)), limits_(std::move(limits)), root_(std::make_unique<TreeNode>()),
      rng_(seed) {
    if (limits_.max_layers < 1) throw ConfigError("max_layers must be >= 1");
    root_->allowed = allowed_actions(root_->prefix, pool_, limits_);
    stats_.node_count = 1;
}

TreeNode &SearchTree::expand(TreeNode &node, std::size_t action) {
    if (node.children.contains(action)) return *node.children.at(action);
    if (!std::ranges::binary_search(node.allowed, action)) {
        throw StateError("action " + std::to_string(action) + " is not allowed at depth " +
                         std::to_string(node.depth()));
    }
    auto child = std::make_unique<TreeNode>();
    child->prefix = node.prefix;
    child->prefix.push_back(action);
    child->parent = &node;
    if (child->depth() < leaf_depth()) child->allowed = allowed_actions(child->prefix, pool_, limits_);
    ++stats_.node_count;
    stats_.max_depth = std::max(stats_.max_depth, child->depth());
    TreeNode &ref = *child;
    node.children.emplace(action, std::move(child));
    return ref;
}

double ucb_score(double avg_reward, std::uint64_t node_visits, std::uint64_t arm_pulls,
                 double alpha) {
    if (arm_pulls == 0) return std::numeric_limits<double>::infinity();
    if (alpha == 0.0) return avg_reward;
    const double n_i = static_cast<double>(std::max<std::uint64_t>(node_visits, 1));
    return avg_reward + alpha * std::sqrt(2.0 * std::log(n_i) / static_cast<double>(arm_pulls));
}

void backpropagate(TreeNode &leaf, double reward) {
    TreeNode *node = &leaf;
    ++node->visits;
    node->mean_reward += (reward - node->mean_reward) / static_cast<double>(node->visits);
    while (node->parent != nullptr) {
        TreeNode *parent = node->parent;
        ArmStats &arm = parent->arms[node->prefix.back()];
        ++arm.pulls;
        arm.mean_reward += (reward - arm.mean_reward) / static_cast<double>(arm.pulls);
        ++parent->visits;
        parent->mean_reward += (reward - parent->mean_reward) / static_cast<double>(parent->visits);
        node = parent;
    }
}

std::size_t prune_children(TreeNode &node, double prune_ratio, std::size_t min_children) {
    std::vector<std::pair<double, std::size_t>> candidates;
    std::size_t survivors = 0;
    for (const auto &[action, child] : node.children) {
        if (node.pruned.contains(action)) continue;
        ++survivors;
        const auto it = node.arms.find(action);
        if (it == node.arms.end() || it->second.pulls == 0) continue;
        if (it->second.mean_reward < prune_ratio * node.mean_reward) {
            candidates.emplace_back(it->second.mean_reward, action);
        }
    }
    std::ranges::sort(candidates);
    std::size_t pruned = 0;
    for (const auto &[mean, action] : candidates) {
        if (survivors <= min_children) break;
        node.pruned.insert(action);
        --survivors;
        ++pruned;
    }
    return pruned;
}

TreeNode &select_node(SearchTree &tree, TreeNode &node, const SearchConfig &cfg) {
    if (tree.is_leaf(node)) throw StateError("select_node called on a leaf");
    if (node.allowed.empty()) {
        throw DeadEndError("no allowed action at depth " + std::to_string(node.depth()));
    }
    if (!node.fully_expanded()) {
        std::vector<std::size_t> fresh;
        for (std::size_t a : node.allowed) {
            if (!node.children.contains(a)) fresh.push_back(a);
        }
        std::uniform_int_distribution<std::size_t> pick(0, fresh.size() - 1);
        return tree.expand(node, fresh[pick(tree.rng())]);
    }

    tree.note_pruned(prune_children(node, cfg.prune_ratio, cfg.min_children));
    TreeNode *best = nullptr;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const auto &[action, child] : node.children) {
        if (node.pruned.contains(action)) continue;
        const auto it = node.arms.find(action);
        const ArmStats stats = it == node.arms.end() ? ArmStats{} : it->second;
        const double score = ucb_score(stats.mean_reward, node.visits, stats.pulls, cfg.alpha);
        if (best == nullptr || score > best_score) {
            best = child.get();
            best_score = score;
        }
    }
    if (best == nullptr) throw DeadEndError("every child is pruned");
    return *best;
}

double execute_single_round(SearchTree &tree, TreeNode &start, const SearchConfig &cfg,
                            const RewardFn &reward) {
    TreeNode *node = &start;
    while (!tree.is_leaf(*node)) node = &select_node(tree, *node, cfg);
    const double r = reward(node->prefix);
    tree.note_simulation();
    backpropagate(*node, r);
    return r;
}

CircuitLayout sample_arc(SearchTree &tree, const SearchConfig &cfg, const RewardFn &reward,
                         std::size_t rounds) {
    for (std::size_t r = 0; r < rounds; ++r) execute_single_round(tree, tree.root(), cfg, reward);
    TreeNode *node = &tree.root();
    while (!tree.is_leaf(*node)) node = &select_node(tree, *node, cfg);
    return node->prefix;
}

CircuitLayout exploit_arc(SearchTree &tree, const SearchConfig &cfg, const RewardFn &reward,
                          std::size_t rounds) {
    TreeNode *node = &tree.root();
    while (!tree.is_leaf(*node)) {
        for (std::size_t r = 0; r < rounds; ++r) execute_single_round(tree, *node, cfg, reward);
        node = &select_node(tree, *node, cfg);
    }
    return node->prefix;
}

RewardFn task_reward(const TaskSpec &task, const OperationPool &pool,
                     const SharedParameters &params) {
    if (task.has_parameters(pool)) {
        return [&task, &pool, &params](const CircuitLayout &layout) {
            return evaluate(task, pool, layout, params).reward;
        };
    }
    // Rewards of parameter-free circuits never change, so they are memoised.
    auto cache = std::make_shared<std::map<CircuitLayout, double>>();
    return [&task, &pool, &params, cache](const CircuitLayout &layout) {
        if (const auto it = cache->find(layout); it != cache->end()) return it->second;
        const double r = evaluate(task, pool, layout, params).reward;
        cache->emplace(layout, r);
        return r;
    };
}

SearchReport run_search(const TaskSpec &task, const OperationPool &pool, const HardLimits &limits,
                        const SearchConfig &cfg, const OptimizerConfig &opt,
                        const SearchSetup &setup) {
    validate(cfg);
    validate(opt);
    validate_task(task);
    if (pool.num_qubits() != task.num_qubits) {
        throw ConfigError("pool has " + std::to_string(pool.num_qubits()) + " qubits, task has " +
                          std::to_string(task.num_qubits));
    }

    SharedParameters params =
        setup.params ? *setup.params
                     : init_params(limits.max_layers, pool.size(), pool.max_params(), setup.init,
                                   cfg.seed + 1);
    check_shape(params, pool);
    if (params.layers() < limits.max_layers) {
        throw ParameterError("parameter tensor has fewer layers than max_layers");
    }

    const bool parametric = task.has_parameters(pool);
    if (parametric && opt.steps > 0) {
        const LayoutSampler sampler = [&](std::mt19937_64 &rng) {
            return random_layout(pool, limits, rng);
        };
        params = warmup(task, pool, sampler, std::move(params), opt);
    }

    SearchTree tree(pool, limits, cfg.seed);
    const RewardFn reward = task_reward(task, tree.pool(), params);
    Optimizer optimizer(opt, params);
    std::mt19937_64 noise_rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
    const std::optional<double> threshold =
        cfg.early_stop_reward ? cfg.early_stop_reward : task.early_stop_reward;

    SearchReport report;
    report.best_reward = -std::numeric_limits<double>::infinity();
    std::vector<CircuitLayout> batch(opt.batch_size);
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        for (auto &layout : batch) layout = sample_arc(tree, cfg, reward, cfg.rounds);
        if (parametric) {
            batch_update(task, pool, batch, params, optimizer, opt.gradient_noise_sigma, noise_rng);
        }

        const CircuitLayout current = cfg.nesting_level >= 1
                                          ? exploit_arc(tree, cfg, reward, cfg.rounds)
                                          : sample_arc(tree, cfg, reward, cfg.rounds);
        const Evaluation ev = evaluate(task, pool, current, params);
        if (ev.reward > report.best_reward) {
            report.best_reward = ev.reward;
            report.best_loss = ev.loss;
            report.best_layout = current;
            report.best_params = params;
        }
        report.reward_trace.push_back({it, ev.reward, ev.loss, report.best_reward});
        if (threshold && ev.reward >= *threshold) {
            report.stopped_early = true;
            break;
        }
    }
    if (report.reward_trace.empty()) {
        // No iteration ran: report the policy's current choice without new simulations.
        report.best_layout = sample_arc(tree, cfg, reward, 0);
        const Evaluation ev = evaluate(task, pool, report.best_layout, params);
        report.best_reward = ev.reward;
        report.best_loss = ev.loss;
        report.best_params = params;
    }
    report.final_params = std::move(params);
    report.tree_stats = tree.stats();
    return report;
}

} // namespace qas
