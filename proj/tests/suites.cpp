#include "suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include "qas/gradient.hpp"
#include "qas/search.hpp"
#include "qas/tasks.hpp"
#include "reference.hpp"

using namespace qas;

namespace suites {

namespace {

std::string fmt(const char *f, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

TaskSpec random_task(int variant, std::size_t n, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> coeff(-0.3, 0.3);
    const char letters[] = "IXYZ";
    auto word = [&] {
        std::string w;
        for (std::size_t q = 0; q < n; ++q) w += letters[ref::pick(rng, 4)];
        return w;
    };
    switch (variant) {
    case 0:
        return TaskSpec::qec422();
    case 1: {
        VqlsPayload p{n, {{1.0, std::string(n, 'I')}}};
        for (int t = 0; t < 3; ++t) p.a_terms.push_back({coeff(rng), word()});
        return TaskSpec::vqls(p);
    }
    case 2: {
        PauliSum h(n, {});
        for (int t = 0; t < 6; ++t) h.add(3 * coeff(rng), word());
        return TaskSpec::vqe(h);
    }
    default: {
        Graph g{n, {{0, 1, 1.0}}};
        std::uniform_real_distribution<double> w(0.5, 3.0);
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v)
                if ((u || v != 1) && ref::pick(rng, 10) < 6) g.edges.push_back({u, v, w(rng)});
        return TaskSpec::maxcut(g);
    }
    }
}

using Arc = std::pair<CircuitLayout, double>;

void collect(const TreeNode &node, std::vector<const TreeNode *> &out) {
    out.push_back(&node);
    for (const auto &[a, child] : node.children) collect(*child, out);
}

bool starts_with(const CircuitLayout &layout, const CircuitLayout &prefix) {
    return layout.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), layout.begin());
}

/// Checks every node of `tree` against the recorded arcs. Returns the number of violations.
int audit_tree(const SearchTree &tree, const std::vector<Arc> &arcs, std::size_t min_children,
               double &worst_mean_error) {
    std::vector<const TreeNode *> nodes;
    collect(tree.root(), nodes);
    int bad = 0;
    for (const TreeNode *n : nodes) {
        std::uint64_t through = 0;
        double sum = 0.0;
        for (const auto &[layout, r] : arcs)
            if (starts_with(layout, n->prefix)) ++through, sum += r;
        if (n->visits != through) ++bad;
        if (through) worst_mean_error = std::max(worst_mean_error, std::abs(n->mean_reward - sum / through));
        if (n->parent) {
            const auto it = n->parent->arms.find(n->prefix.back());
            if ((it == n->parent->arms.end() ? 0 : it->second.pulls) != n->visits) ++bad;
        }
        if (tree.is_leaf(*n)) continue;

        std::uint64_t pulls = 0;
        for (const auto &[a, s] : n->arms) {
            pulls += s.pulls;
            CircuitLayout ext = n->prefix;
            ext.push_back(a);
            std::uint64_t cnt = 0;
            double total = 0.0;
            for (const auto &[layout, r] : arcs)
                if (starts_with(layout, ext)) ++cnt, total += r;
            if (cnt != s.pulls) ++bad;
            if (cnt) worst_mean_error = std::max(worst_mean_error, std::abs(s.mean_reward - total / cnt));
        }
        if (pulls != n->visits) ++bad;
        const std::size_t survivors = n->children.size() - n->pruned.size();
        if (!n->pruned.empty() && survivors < std::min(min_children, n->children.size())) ++bad;
    }
    return bad;
}

/// Deterministic pseudo-random reward per layout; records every evaluation.
RewardFn recording_reward(std::vector<Arc> &arcs, std::uint64_t salt) {
    return [&arcs, salt](const CircuitLayout &layout) {
        std::uint64_t h = salt;
        for (std::size_t a : layout) h = h * 1000003u + a + 1;
        std::mt19937_64 g(h);
        const double r = std::uniform_real_distribution<double>(0.0, 1.0)(g);
        arcs.emplace_back(layout, r);
        return r;
    };
}

OperationPool h_pool(std::size_t n) {
    return build_pool(n, {GateKind::H}, {TopologyKind::custom, {}}, false);
}

/// Root with every action expanded and the given arm statistics.
void rig_root(SearchTree &tree, const std::vector<ArmStats> &arms, double node_mean) {
    TreeNode &root = tree.root();
    std::uint64_t visits = 0;
    for (std::size_t a = 0; a < arms.size(); ++a) {
        if (!root.children.count(a)) tree.expand(root, a);
        root.arms[a] = arms[a];
        visits += arms[a].pulls;
    }
    root.visits = visits;
    root.mean_reward = node_mean;
}

} // namespace

Result gradient_vs_finite_differences(std::uint64_t seed, int trials) {
    std::mt19937_64 rng(seed);
    const double h = 1e-5;
    double worst = 0.0;
    int leaks = 0;
    for (int t = 0; t < trials; ++t) {
        const int variant = t % 4;
        const std::size_t n = variant == 0 ? 4 : variant == 3 ? 2 + ref::pick(rng, 4) : 1 + ref::pick(rng, 5);
        const TaskSpec task = random_task(variant, n, rng);
        const Topology topo = n > 1 ? Topology{TopologyKind::line, {}} : Topology{TopologyKind::custom, {}};
        const auto pool = build_pool(
            n, {GateKind::Rot, GateKind::RY, GateKind::RZ, GateKind::U3, GateKind::H}, topo, true);
        const std::size_t p = 1 + ref::pick(rng, 8);
        CircuitLayout layout;
        for (std::size_t i = 0; i < p; ++i) layout.push_back(ref::pick(rng, pool.size()));
        SharedParameters params = init_params(p, pool.size(), pool.max_params(),
                                              {InitScheme::uniform, std::numbers::pi}, seed + t);
        const SharedParameters grad = loss_gradient(task, pool, layout, params);

        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t k = 0; k < pool.size(); ++k)
                for (std::size_t j = 0; j < pool.max_params(); ++j) {
                    if (k != layout[i] || j >= param_count(pool[k].kind)) {
                        if (grad.at(i, k, j) != 0.0) ++leaks;
                        continue;
                    }
                    SharedParameters plus = params, minus = params;
                    plus.at(i, k, j) += h;
                    minus.at(i, k, j) -= h;
                    const double fd = (evaluate(task, pool, layout, plus).loss -
                                       evaluate(task, pool, layout, minus).loss) /
                                      (2 * h);
                    worst = std::max(worst, std::abs(fd - grad.at(i, k, j)));
                }
    }
    return {worst <= 1e-6 && leaks == 0,
            std::to_string(trials) + " circuits, " +
                fmt("max |shift - fd| = %.2e, nonzero entries off-layout = %.0f", worst, leaks)};
}

Result tree_bookkeeping(std::uint64_t seed) {
    std::vector<std::string> failures;
    auto expect = [&](bool ok, const std::string &what) {
        if (!ok) failures.push_back(what);
    };

    // UCB formula and the unvisited-arm rule.
    expect(std::abs(ucb_score(0.0, 8, 2, 1.0) - std::sqrt(std::log(8.0))) <= 1e-15, "ucb value");
    expect(ucb_score(0.7, 5, 3, 0.0) == 0.7, "ucb alpha=0");
    expect(ucb_score(-3.0, 4, 0, 0.0) == std::numeric_limits<double>::infinity(), "ucb +inf");

    // Running mean along hand-built arcs; disjoint arcs stay separate.
    {
        SearchTree tree(h_pool(4), HardLimits{{}, 2}, seed);
        TreeNode &c = tree.expand(tree.root(), 1);
        TreeNode &leaf = tree.expand(c, 2);
        backpropagate(leaf, 0.0);
        expect(tree.root().arms[1].pulls == 1 && tree.root().arms[1].mean_reward == 0.0, "first pull");
        backpropagate(leaf, 1.0);
        expect(tree.root().arms[1].pulls == 2 && tree.root().arms[1].mean_reward == 0.5, "running mean");
        expect(c.arms[2].pulls == 2 && c.arms[2].mean_reward == 0.5, "running mean depth 1");
        TreeNode &other = tree.expand(tree.expand(tree.root(), 0), 3);
        backpropagate(other, 7.0);
        expect(tree.root().arms[1].mean_reward == 0.5 && c.arms[2].pulls == 2, "locality");
        expect(tree.root().visits == 3 && tree.root().arms[0].mean_reward == 7.0, "root visits");

        const double rs[] = {0.25, 0.5, 1.0, 0.125, 2.0};
        SearchTree fixed(h_pool(4), HardLimits{{}, 2}, seed);
        TreeNode &f = fixed.expand(fixed.expand(fixed.root(), 3), 0);
        for (double r : rs) backpropagate(f, r);
        expect(std::abs(fixed.root().arms[3].mean_reward - 0.775) <= 1e-15, "mean of fixed arc");
        expect(std::abs(f.parent->arms[0].mean_reward - 0.775) <= 1e-15, "mean of fixed arc depth 1");
    }

    // Greedy selection, ties, argmax invariance and the +inf rule on a rigged root.
    {
        SearchConfig greedy;
        greedy.alpha = 0.0;
        greedy.prune_ratio = 0.0;
        SearchTree tree(h_pool(3), HardLimits{{}, 2}, seed);
        rig_root(tree, {{4, 0.3}, {2, 0.9}, {3, 0.9}}, 0.6);
        expect(select_node(tree, tree.root(), greedy).prefix == CircuitLayout{1}, "greedy tie -> lowest");
        rig_root(tree, {{4, 5.3}, {2, 5.9}, {3, 5.95}}, 5.6);
        expect(select_node(tree, tree.root(), greedy).prefix == CircuitLayout{2}, "greedy argmax");
        rig_root(tree, {{4, 15.3}, {2, 15.9}, {3, 15.95}}, 15.6);
        expect(select_node(tree, tree.root(), greedy).prefix == CircuitLayout{2}, "argmax invariance");
        SearchConfig explore = greedy;
        explore.alpha = 0.4;
        rig_root(tree, {{0, 0.0}, {2, 0.9}, {3, 0.95}}, 0.6);
        expect(select_node(tree, tree.root(), explore).prefix == CircuitLayout{0}, "unvisited arm first");
    }

    // Prune rule and floor.
    {
        SearchTree tree(h_pool(3), HardLimits{{}, 2}, seed);
        rig_root(tree, {{1, 1.0}, {1, 0.5}, {1, 0.1}}, 0.8);
        expect(prune_children(tree.root(), 0.5, 2) == 1 && tree.root().pruned == std::set<std::size_t>{2},
               "prune example");
        SearchTree floor(h_pool(4), HardLimits{{}, 2}, seed);
        rig_root(floor, {{1, 0.1}, {1, 0.2}, {1, 0.3}, {1, 0.4}}, 1.0);
        prune_children(floor.root(), 0.99, 2);
        expect(floor.root().pruned == std::set<std::size_t>{0, 1}, "prune floor");
        SearchTree keep(h_pool(3), HardLimits{{}, 2}, seed);
        rig_root(keep, {{1, 1.0}, {1, 0.5}, {1, 0.1}}, 0.8);
        expect(prune_children(keep.root(), 0.5, 3) == 0, "min_children = child count");
        expect(prune_children(keep.root(), 0.0, 1) == 0, "ratio 0");
    }

    // Whole searches audited against every recorded arc, then replayed.
    double worst = 0.0;
    std::vector<std::vector<Arc>> replays;
    for (int rep = 0; rep < 2; ++rep) {
        const auto pool = build_pool(3, {GateKind::H}, {TopologyKind::line, {}}, true);
        SearchTree tree(pool, HardLimits{{{GateKind::CNOT, 2}}, 4}, seed);
        std::vector<Arc> arcs;
        const RewardFn reward = recording_reward(arcs, seed);
        SearchConfig cfg;
        cfg.rounds = 15;
        for (int it = 0; it < 25; ++it) {
            (void)sample_arc(tree, cfg, reward, cfg.rounds);
            (void)exploit_arc(tree, cfg, reward, 3);
        }
        const int bad = audit_tree(tree, arcs, cfg.min_children, worst);
        expect(bad == 0, "audit found " + std::to_string(bad) + " violations");
        expect(tree.stats().prune_count > 0, "search exercised pruning");
        expect(tree.root().visits == arcs.size(), "root visits = rounds");
        replays.push_back(std::move(arcs));
    }
    expect(worst <= 1e-12, fmt("running means off by %.2e", worst));
    expect(replays[0] == replays[1], "replay differs");

    // Bit-reproducible end-to-end search on a parametric task.
    {
        const TaskSpec task = TaskSpec::maxcut(Graph{3, {{0, 1, 1}, {1, 2, 2}, {0, 2, 1}}});
        const auto pool = build_pool(3, {GateKind::Rot}, {TopologyKind::line, {}}, true);
        const HardLimits limits{{{GateKind::CNOT, 2}}, 4};
        SearchConfig cfg;
        cfg.rounds = 5;
        cfg.iterations = 4;
        cfg.seed = seed;
        OptimizerConfig opt;
        opt.steps = 3;
        opt.batch_size = 3;
        opt.gradient_noise_sigma = 0.01;
        const SearchReport a = run_search(task, pool, limits, cfg, opt);
        const SearchReport b = run_search(task, pool, limits, cfg, opt);
        bool same = a.best_layout == b.best_layout && a.best_reward == b.best_reward &&
                    a.final_params == b.final_params && a.best_params == b.best_params &&
                    a.reward_trace.size() == b.reward_trace.size() &&
                    a.tree_stats.node_count == b.tree_stats.node_count;
        for (std::size_t i = 0; same && i < a.reward_trace.size(); ++i)
            same = a.reward_trace[i].reward == b.reward_trace[i].reward &&
                   a.reward_trace[i].best_reward == b.reward_trace[i].best_reward;
        expect(same, "run_search not reproducible");
    }

    std::string detail = failures.empty() ? "all exact checks hold" : "failed:";
    for (const auto &f : failures) detail += " [" + f + "]";
    return {failures.empty(), detail + fmt(", worst running-mean drift %.1e", worst)};
}

Result simulator_properties(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double norm = 0.0, invol = 0.0, unit = 0.0, rzz = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + ref::pick(rng, 6);
        StateVector s = ref::from_vec(ref::random_state(rng, n));
        apply_circuit(s, ref::random_circuit(rng, n, 40));
        norm = std::max(norm, std::abs(s.norm_squared() - 1.0));

        const ref::Vec psi = ref::to_vec(s);
        const std::size_t q = ref::pick(rng, n);
        StateVector w = s;
        w.apply({GateKind::H, {q}, {}});
        w.apply({GateKind::H, {q}, {}});
        invol = std::max(invol, ref::max_abs_diff(ref::to_vec(w), psi));
        if (n > 1) {
            std::size_t c = ref::pick(rng, n - 1);
            if (c >= q) ++c;
            w.apply({GateKind::CNOT, {c, q}, {}});
            w.apply({GateKind::CNOT, {c, q}, {}});
            invol = std::max(invol, ref::max_abs_diff(ref::to_vec(w), psi));
        }

        for (GateKind k : {GateKind::Rot, GateKind::U3}) {
            const double p[3] = {ref::angle(rng), ref::angle(rng), ref::angle(rng)};
            const Matrix2 m = single_qubit_matrix(k, p);
            const ref::Mat g = ref::m2(m[0], m[1], m[2], m[3]);
            unit = std::max(unit, (g.adjoint() * g - ref::id2()).cwiseAbs().maxCoeff());
        }

        const double theta = ref::angle(rng);
        const Complex a = std::polar(1.0, -theta / 2), b = std::polar(1.0, theta / 2);
        const Complex diag[4] = {a, b, b, a};
        for (std::size_t k = 0; k < 4; ++k) {
            StateVector e = ref::from_vec(ref::basis(2, k));
            e.apply({GateKind::CNOT, {0, 1}, {}});
            e.apply({GateKind::RZ, {1}, {theta}});
            e.apply({GateKind::CNOT, {0, 1}, {}});
            for (std::size_t j = 0; j < 4; ++j)
                rzz = std::max(rzz, std::abs(e[j] - (j == k ? diag[k] : Complex{})));
        }
    }
    const bool pass = norm <= 1e-12 && invol <= 1e-12 && unit <= 1e-12 && rzz <= 1e-12;
    return {pass, fmt("norm drift %.1e, involution %.1e, ", norm, invol) +
                      fmt("unitarity %.1e, RZZ %.1e", unit, rzz)};
}

} // namespace suites
