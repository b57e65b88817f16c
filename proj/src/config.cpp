#include "qas/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "qas/errors.hpp"

namespace qas {

namespace {

using nlohmann::json;

std::size_t line_of(const YAML::Node &n) {
    const auto m = n.Mark();
    return m.line >= 0 ? static_cast<std::size_t>(m.line) + 1 : 0;
}

void check_keys(const YAML::Node &block, const std::string &name,
                const std::set<std::string> &known) {
    if (!block.IsMap()) throw ConfigError("'" + name + "' must be a mapping", line_of(block));
    for (const auto &kv : block) {
        const auto key = kv.first.as<std::string>();
        if (!known.contains(key)) {
            throw ConfigError("unknown key '" + key + "' in " + name, line_of(kv.first));
        }
    }
}

template <typename T>
T scalar(const YAML::Node &block, const char *key, T fallback) {
    const YAML::Node n = block[key];
    if (!n) return fallback;
    try {
        return n.as<T>();
    } catch (const YAML::Exception &) {
        throw ConfigError(std::string("bad value for '") + key + "'", line_of(n));
    }
}

std::size_t count(const YAML::Node &block, const char *key, std::size_t fallback) {
    const YAML::Node n = block[key];
    if (!n) return fallback;
    const auto v = scalar<long long>(block, key, 0);
    if (v < 0) throw ConfigError(std::string("'") + key + "' must be non-negative", line_of(n));
    return static_cast<std::size_t>(v);
}

YAML::Node required(const YAML::Node &block, const char *key, const std::string &name) {
    const YAML::Node n = block[key];
    if (!n) throw ConfigError(std::string("missing '") + key + "' in " + name, line_of(block));
    return n;
}

/// Runs f, attaching `line` to library errors raised without one.
template <typename F>
auto at_line(std::size_t line, F &&f) {
    try {
        return f();
    } catch (const ConfigError &e) {
        if (e.line() != 0) throw;
        throw ConfigError(e.what(), line);
    } catch (const Error &e) {
        throw ConfigError(e.what(), line);
    }
}

json to_json_value(const YAML::Node &n) {
    switch (n.Type()) {
    case YAML::NodeType::Sequence: {
        json arr = json::array();
        for (const auto &item : n) arr.push_back(to_json_value(item));
        return arr;
    }
    case YAML::NodeType::Map: {
        json obj = json::object();
        for (const auto &kv : n) obj[kv.first.as<std::string>()] = to_json_value(kv.second);
        return obj;
    }
    case YAML::NodeType::Scalar: {
        const auto &s = n.Scalar();
        if (n.Tag() == "!") return s;  // quoted
        long long i = 0;
        if (YAML::convert<long long>::decode(n, i)) return i;
        double d = 0.0;
        if (YAML::convert<double>::decode(n, d)) return d;
        bool b = false;
        if (YAML::convert<bool>::decode(n, b)) return b;
        return s;
    }
    default:
        return nullptr;
    }
}

/// A file path (resolved against base) or an inline mapping.
json json_source(const YAML::Node &n, const std::filesystem::path &base) {
    if (n.IsScalar()) {
        std::filesystem::path p = n.as<std::string>();
        if (p.is_relative()) p = base / p;
        std::ifstream in(p);
        if (!in) throw ConfigError("cannot open " + p.string(), line_of(n));
        try {
            return json::parse(in);
        } catch (const json::parse_error &e) {
            throw ConfigError(p.string() + ": " + e.what(), line_of(n));
        }
    }
    return to_json_value(n);
}

TaskSpec parse_task(const YAML::Node &t, const std::filesystem::path &base) {
    check_keys(t, "task",
               {"variant", "num_qubits", "initial_state", "penalty_beta", "reward_scaling",
                "early_stop_reward", "hamiltonian", "graph", "a_matrix", "vqls"});
    const YAML::Node vnode = required(t, "variant", "task");
    const TaskVariant variant =
        at_line(line_of(vnode), [&] { return task_variant_from_string(vnode.as<std::string>()); });

    auto payload_node = [&](const char *key) { return required(t, key, "task"); };
    TaskSpec task;
    switch (variant) {
    case TaskVariant::qec422:
        task = TaskSpec::qec422();
        break;
    case TaskVariant::vqls: {
        if (t["a_matrix"]) {
            const YAML::Node n = t["a_matrix"];
            task = at_line(line_of(n), [&] {
                const PauliSum a = pauli_sum_from_json(json_source(n, base));
                return TaskSpec::vqls(VqlsPayload{a.num_qubits(), a.terms()});
            });
        } else {
            const YAML::Node n = t["vqls"] ? t["vqls"] : YAML::Node(YAML::NodeType::Map);
            check_keys(n, "task.vqls", {"zeta", "j", "eta"});
            task = at_line(line_of(n), [&] {
                return TaskSpec::vqls(make_vqls_payload(scalar(n, "zeta", 1.0), scalar(n, "j", 0.1),
                                                        scalar(n, "eta", 0.2)));
            });
        }
        break;
    }
    case TaskVariant::vqe: {
        const YAML::Node n = payload_node("hamiltonian");
        task = at_line(line_of(n),
                       [&] { return TaskSpec::vqe(pauli_sum_from_json(json_source(n, base))); });
        break;
    }
    case TaskVariant::maxcut: {
        const YAML::Node n = payload_node("graph");
        task = at_line(line_of(n),
                       [&] { return TaskSpec::maxcut(graph_from_json(json_source(n, base))); });
        break;
    }
    }

    if (const YAML::Node n = t["num_qubits"]; n && count(t, "num_qubits", 0) != task.num_qubits) {
        throw ConfigError("num_qubits " + std::to_string(count(t, "num_qubits", 0)) +
                              " disagrees with the payload (" + std::to_string(task.num_qubits) + ")",
                          line_of(n));
    }
    if (const YAML::Node n = t["initial_state"]) {
        task.initial_state =
            at_line(line_of(n), [&] { return initial_state_from_string(n.as<std::string>()); });
    }
    task.penalty_beta = scalar(t, "penalty_beta", task.penalty_beta);
    if (const YAML::Node n = t["reward_scaling"]) {
        task.reward_scaling =
            at_line(line_of(n), [&] { return reward_scaling_from_string(n.as<std::string>()); });
    }
    if (const YAML::Node n = t["early_stop_reward"]) {
        task.early_stop_reward =
            n.IsNull() ? std::nullopt : std::optional(scalar(t, "early_stop_reward", 0.0));
    }
    at_line(line_of(t), [&] {
        validate_task(task);
        return 0;
    });
    return task;
}

PoolSpec parse_pool_spec(const YAML::Node &p) {
    PoolSpec spec;
    if (const YAML::Node n = p["single_qubit"]) {
        if (!n.IsSequence()) throw ConfigError("single_qubit must be a list", line_of(n));
        for (const auto &k : n) {
            spec.single_qubit_kinds.push_back(
                at_line(line_of(k), [&] { return gate_kind_from_string(k.as<std::string>()); }));
        }
    }
    const YAML::Node topo = p["topology"];
    const std::string kind = topo ? scalar<std::string>(p, "topology", "") : "none";
    if (kind != "none") {
        Topology t;
        t.kind = at_line(line_of(topo), [&] { return topology_kind_from_string(kind); });
        if (t.kind == TopologyKind::custom) {
            const YAML::Node edges = required(p, "edges", "pool");
            if (!edges.IsSequence()) throw ConfigError("edges must be a list", line_of(edges));
            for (const auto &e : edges) {
                if (!e.IsSequence() || e.size() != 2) {
                    throw ConfigError("edge must be [control, target]", line_of(e));
                }
                try {
                    t.edges.emplace_back(e[0].as<std::size_t>(), e[1].as<std::size_t>());
                } catch (const YAML::Exception &) {
                    throw ConfigError("edge entries must be qubit indices", line_of(e));
                }
            }
        } else if (p["edges"]) {
            throw ConfigError("edges are only used with topology: custom", line_of(p["edges"]));
        }
        spec.topology = std::move(t);
    }
    spec.placeholder = scalar(p, "placeholder", true);
    return spec;
}

OperationPool build_from_spec(std::size_t n, const PoolSpec &spec, std::size_t line) {
    return at_line(line, [&] {
        Topology topo = spec.topology.value_or(Topology{TopologyKind::custom, {}});
        return build_pool(n, spec.single_qubit_kinds, topo, spec.placeholder);
    });
}

HardLimits parse_limits(const YAML::Node &p) {
    HardLimits limits;
    const YAML::Node layers = required(p, "max_layers", "pool");
    limits.max_layers = count(p, "max_layers", 0);
    if (limits.max_layers < 1) throw ConfigError("max_layers must be >= 1", line_of(layers));
    if (const YAML::Node caps = p["max_count"]) {
        if (!caps.IsMap()) throw ConfigError("max_count must be a mapping", line_of(caps));
        for (const auto &kv : caps) {
            const GateKind k =
                at_line(line_of(kv.first), [&] { return gate_kind_from_string(kv.first.as<std::string>()); });
            const auto key = kv.first.as<std::string>();
            limits.max_count_per_kind[k] = count(caps, key.c_str(), 0);
        }
    }
    return limits;
}

SearchConfig parse_search(const YAML::Node &s) {
    SearchConfig c;
    if (!s) return c;
    check_keys(s, "search",
               {"alpha", "prune_ratio", "min_children", "rounds", "nesting_level", "iterations",
                "early_stop_reward"});
    c.alpha = scalar(s, "alpha", c.alpha);
    c.prune_ratio = scalar(s, "prune_ratio", c.prune_ratio);
    c.min_children = count(s, "min_children", c.min_children);
    c.rounds = count(s, "rounds", c.rounds);
    c.nesting_level = count(s, "nesting_level", c.nesting_level);
    c.iterations = count(s, "iterations", c.iterations);
    if (const YAML::Node n = s["early_stop_reward"]; n && !n.IsNull()) {
        c.early_stop_reward = scalar(s, "early_stop_reward", 0.0);
    }
    at_line(line_of(s), [&] {
        validate(c);
        return 0;
    });
    return c;
}

OptimizerConfig parse_optimizer(const YAML::Node &o, const std::string &name, OptimizerConfig c) {
    if (!o) return c;
    check_keys(o, name,
               {"method", "learning_rate", "steps", "gradient_noise_sigma", "batch_size", "beta1",
                "beta2", "epsilon"});
    if (const YAML::Node n = o["method"]) {
        c.method = at_line(line_of(n), [&] { return optimizer_method_from_string(n.as<std::string>()); });
    }
    c.learning_rate = scalar(o, "learning_rate", c.learning_rate);
    c.steps = count(o, "steps", c.steps);
    c.gradient_noise_sigma = scalar(o, "gradient_noise_sigma", c.gradient_noise_sigma);
    c.batch_size = count(o, "batch_size", c.batch_size);
    c.beta1 = scalar(o, "beta1", c.beta1);
    c.beta2 = scalar(o, "beta2", c.beta2);
    c.epsilon = scalar(o, "epsilon", c.epsilon);
    if (!(c.learning_rate > 0.0)) {
        throw ConfigError("learning_rate must be positive", line_of(o["learning_rate"] ? o["learning_rate"] : o));
    }
    at_line(line_of(o), [&] {
        validate(c);
        return 0;
    });
    return c;
}

InitSpec parse_init(const YAML::Node &n) {
    InitSpec spec;
    if (!n) return spec;
    check_keys(n, "init", {"scheme", "half_width"});
    const auto scheme = scalar<std::string>(n, "scheme", "uniform");
    if (scheme == "zeros") spec.scheme = InitScheme::zeros;
    else if (scheme == "uniform") spec.scheme = InitScheme::uniform;
    else throw ConfigError("unknown init scheme '" + scheme + "' (zeros|uniform)", line_of(n["scheme"]));
    spec.half_width = scalar(n, "half_width", spec.half_width);
    if (!(spec.half_width > 0.0) || !std::isfinite(spec.half_width)) {
        throw ConfigError("half_width must be positive", line_of(n));
    }
    return spec;
}

} // namespace

void apply_seed(RunConfig &cfg, std::uint64_t seed) {
    cfg.seed = seed;
    cfg.search.seed = seed;
    cfg.optimizer.seed = seed;
    cfg.finetune.seed = seed;
}

RunConfig parse_run_config(const std::string &text, const std::filesystem::path &base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException &e) {
        throw ConfigError(e.msg, static_cast<std::size_t>(e.mark.line) + 1);
    }
    if (!root.IsMap()) throw ConfigError("configuration must be a mapping", line_of(root));
    check_keys(root, "configuration",
               {"seed", "output", "task", "pool", "search", "optimizer", "init", "finetune", "shots"});

    RunConfig cfg;
    cfg.task = parse_task(required(root, "task", "configuration"), base_dir);

    const YAML::Node p = required(root, "pool", "configuration");
    check_keys(p, "pool", {"single_qubit", "topology", "edges", "placeholder", "max_layers", "max_count"});
    cfg.pool_spec = parse_pool_spec(p);
    cfg.pool = build_from_spec(cfg.task.num_qubits, cfg.pool_spec, line_of(p));
    cfg.limits = parse_limits(p);

    cfg.search = parse_search(root["search"]);
    cfg.optimizer = parse_optimizer(root["optimizer"], "optimizer", OptimizerConfig{});
    OptimizerConfig ft;
    ft.steps = 200;
    cfg.finetune = parse_optimizer(root["finetune"], "finetune", ft);
    cfg.init = parse_init(root["init"]);
    cfg.shots = count(root, "shots", cfg.shots);
    if (cfg.shots == 0) throw ConfigError("shots must be >= 1", line_of(root["shots"]));

    std::filesystem::path out = scalar<std::string>(root, "output", "out");
    cfg.output_dir = out.is_relative() ? base_dir / out : out;
    apply_seed(cfg, static_cast<std::uint64_t>(count(root, "seed", 0)));
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig cfg = parse_run_config(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
    cfg.source = path;
    return cfg;
}

} // namespace qas
