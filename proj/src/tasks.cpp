#include "qas/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "qas/errors.hpp"

namespace qas {

namespace {

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};

StateVector evolve(std::size_t n, InitialState init, std::span<const GateOp> gates) {
    StateVector s = init_state(n, init);
    apply_circuit(s, gates);
    return s;
}

template <class T> const T &payload_as(const TaskSpec &task) {
    const T *p = std::get_if<T>(&task.payload);
    if (!p) {
        throw ConfigError("task variant '" + std::string(to_string(task.variant)) +
                          "' carries a mismatched payload");
    }
    return *p;
}

// Single-qubit states used for the [[4,2,2]] inputs.
std::vector<std::array<Complex, 2>> qec_single_qubit_states() {
    const double r = std::numbers::sqrt2 / 2.0;
    const Complex i{0.0, 1.0};
    return {
        {1.0, 0.0},
        {0.0, 1.0},
        {r, r},
        {r, -r},
        {r, r * i},
        {r, -r * i},
        {r, r * std::exp(i * std::numbers::pi / 4.0)},
    };
}

} // namespace

std::string_view to_string(TaskVariant v) {
    switch (v) {
    case TaskVariant::qec422:
        return "qec422";
    case TaskVariant::vqls:
        return "vqls";
    case TaskVariant::vqe:
        return "vqe";
    case TaskVariant::maxcut:
        return "maxcut";
    }
    return "?";
}

TaskVariant task_variant_from_string(std::string_view name) {
    if (name == "qec422") return TaskVariant::qec422;
    if (name == "vqls") return TaskVariant::vqls;
    if (name == "vqe") return TaskVariant::vqe;
    if (name == "maxcut") return TaskVariant::maxcut;
    throw ConfigError("unknown task variant '" + std::string(name) +
                      "' (qec422|vqls|vqe|maxcut)");
}

std::string_view to_string(RewardScaling s) {
    switch (s) {
    case RewardScaling::identity:
        return "identity";
    case RewardScaling::complement:
        return "complement";
    case RewardScaling::exp_neg10:
        return "exp_neg10";
    }
    return "?";
}

RewardScaling reward_scaling_from_string(std::string_view name) {
    if (name == "identity") return RewardScaling::identity;
    if (name == "complement") return RewardScaling::complement;
    if (name == "exp_neg10") return RewardScaling::exp_neg10;
    throw ConfigError("unknown reward scaling '" + std::string(name) +
                      "' (identity|complement|exp_neg10)");
}

Qec422Payload make_qec422_payload() {
    Qec422Payload p;
    p.reference_encoder = {
        {GateKind::H, {3}, {}},       {GateKind::CNOT, {0, 2}, {}}, {GateKind::CNOT, {1, 2}, {}},
        {GateKind::CNOT, {3, 2}, {}}, {GateKind::CNOT, {3, 1}, {}}, {GateKind::CNOT, {3, 0}, {}},
    };
    const auto singles = qec_single_qubit_states();
    for (const auto &a : singles) {
        for (const auto &b : singles) {
            std::vector<Complex> amps(16, Complex{0.0, 0.0});
            // qubit 0 is bit 3 of the index, qubit 1 bit 2; qubits 2 and 3 stay |0>
            for (std::size_t x = 0; x < 2; ++x)
                for (std::size_t y = 0; y < 2; ++y) amps[(x << 3) | (y << 2)] = a[x] * b[y];
            StateVector in = StateVector::from_amplitudes(std::move(amps));
            StateVector out = in;
            apply_circuit(out, p.reference_encoder);
            p.inputs.push_back(std::move(in));
            p.targets.push_back(std::move(out));
        }
    }
    return p;
}

VqlsPayload make_vqls_payload(double zeta, double j, double eta) {
    return {4, {{zeta, "IIII"}, {j, "XIII"}, {j, "IXII"}, {eta, "IIZZ"}}};
}

Graph graph_from_json(const nlohmann::json &j) {
    try {
        Graph g;
        g.vertices = j.at("vertices").get<std::size_t>();
        for (const auto &e : j.at("edges")) {
            if (!e.is_array() || e.size() < 2 || e.size() > 3) {
                throw ConfigError("graph edge must be [u, v] or [u, v, w]");
            }
            g.edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(),
                               e.size() == 3 ? e[2].get<double>() : 1.0});
        }
        validate_graph(g);
        return g;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("malformed graph JSON: ") + e.what());
    }
}

nlohmann::json to_json(const Graph &g) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto &e : g.edges) edges.push_back({e.u, e.v, e.weight});
    return {{"vertices", g.vertices}, {"edges", std::move(edges)}};
}

Graph load_graph(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open graph file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return graph_from_json(j);
}

void validate_graph(const Graph &g) {
    if (g.vertices == 0) throw GraphError("graph has no vertices");
    for (const auto &e : g.edges) {
        if (e.u == e.v) throw GraphError("self-loop on vertex " + std::to_string(e.u));
        if (e.u >= g.vertices || e.v >= g.vertices) {
            throw GraphError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                             ") references a vertex >= " + std::to_string(g.vertices));
        }
        if (!std::isfinite(e.weight)) throw GraphError("non-finite edge weight");
    }
}

PauliSum maxcut_hamiltonian(const Graph &graph) {
    validate_graph(graph);
    PauliSum h(graph.vertices, {});
    for (const auto &e : graph.edges) {
        std::string zz(graph.vertices, 'I');
        zz[e.u] = 'Z';
        zz[e.v] = 'Z';
        h.add(-e.weight / 2.0, std::string(graph.vertices, 'I'));
        h.add(e.weight / 2.0, std::move(zz));
    }
    return h;
}

TaskSpec TaskSpec::qec422() {
    TaskSpec t;
    t.variant = TaskVariant::qec422;
    t.num_qubits = 4;
    t.initial_state = InitialState::zeros;
    t.reward_scaling = RewardScaling::complement;
    t.early_stop_reward = 0.99;
    t.payload = make_qec422_payload();
    return t;
}

TaskSpec TaskSpec::vqls(VqlsPayload payload) {
    TaskSpec t;
    t.variant = TaskVariant::vqls;
    t.num_qubits = payload.num_qubits;
    // the searched circuit always follows a Hadamard layer
    t.initial_state = InitialState::plus;
    t.penalty_beta = 0.01;
    t.reward_scaling = RewardScaling::exp_neg10;
    t.payload = std::move(payload);
    validate_task(t);
    return t;
}

TaskSpec TaskSpec::vqe(PauliSum hamiltonian) {
    TaskSpec t;
    t.variant = TaskVariant::vqe;
    t.num_qubits = hamiltonian.num_qubits();
    t.initial_state = InitialState::zeros;
    t.reward_scaling = RewardScaling::identity;
    t.payload = ChemistryPayload{std::move(hamiltonian)};
    return t;
}

TaskSpec TaskSpec::maxcut(Graph graph) {
    TaskSpec t;
    t.variant = TaskVariant::maxcut;
    t.num_qubits = graph.vertices;
    t.initial_state = InitialState::plus;
    t.penalty_beta = 0.01;
    t.reward_scaling = RewardScaling::identity;
    PauliSum cost = maxcut_hamiltonian(graph);
    t.payload = MaxCutPayload{std::move(graph), std::move(cost)};
    return t;
}

void validate_task(const TaskSpec &task) {
    if (!(task.penalty_beta >= 0.0) || !std::isfinite(task.penalty_beta)) {
        throw ConfigError("penalty_beta must be a finite non-negative number");
    }
    std::visit(overloaded{
                   [&](const Qec422Payload &p) {
                       if (task.variant != TaskVariant::qec422 || task.num_qubits != 4 ||
                           p.inputs.size() != 49 || p.targets.size() != 49) {
                           throw ConfigError("qec422 task requires 4 qubits and 49 inputs");
                       }
                   },
                   [&](const VqlsPayload &p) {
                       if (task.variant != TaskVariant::vqls) {
                           throw ConfigError("VQLS payload on a non-vqls task");
                       }
                       if (p.num_qubits != task.num_qubits || p.a_terms.empty()) {
                           throw ConfigError("VQLS payload needs terms on " +
                                             std::to_string(task.num_qubits) + " qubits");
                       }
                       for (const auto &t : p.a_terms) {
                           if (t.pauli.size() != p.num_qubits) {
                               throw ConfigError("VQLS term '" + t.pauli + "' has wrong length");
                           }
                       }
                   },
                   [&](const ChemistryPayload &p) {
                       if (task.variant != TaskVariant::vqe ||
                           p.hamiltonian.num_qubits() != task.num_qubits) {
                           throw ConfigError("Hamiltonian acts on " +
                                             std::to_string(p.hamiltonian.num_qubits()) +
                                             " qubits, task has " +
                                             std::to_string(task.num_qubits));
                       }
                   },
                   [&](const MaxCutPayload &p) {
                       if (task.variant != TaskVariant::maxcut ||
                           p.graph.vertices != task.num_qubits) {
                           throw ConfigError("MaxCut graph has " +
                                             std::to_string(p.graph.vertices) +
                                             " vertices, task has " +
                                             std::to_string(task.num_qubits) + " qubits");
                       }
                   },
               },
               task.payload);
}

double qec422_loss(const Qec422Payload &payload, std::span<const GateOp> gates) {
    double acc = 0.0;
    for (std::size_t i = 0; i < payload.inputs.size(); ++i) {
        StateVector s = payload.inputs[i];
        apply_circuit(s, gates);
        acc += fidelity(payload.targets[i], s);
    }
    return std::clamp(1.0 - acc / static_cast<double>(payload.inputs.size()), 0.0, 1.0);
}

namespace detail {

StateVector apply_vqls_matrix(const VqlsPayload &payload, const StateVector &psi) {
    std::vector<Complex> out(psi.dimension(), Complex{0.0, 0.0});
    for (const auto &term : payload.a_terms) {
        StateVector v = psi;
        v.apply_pauli(term.pauli);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += term.coeff * v[i];
    }
    return StateVector::from_amplitudes(std::move(out));
}

namespace {

// (numerator, denominator) of the local cost for w = A V|init>:
// numerator = <w| U P U^dag |w>, U P U^dag = 1/2 + 1/(2n) sum_j X_j
std::pair<double, double> vqls_parts(const VqlsPayload &payload, InitialState init,
                                     std::span<const GateOp> gates) {
    const StateVector psi = evolve(payload.num_qubits, init, gates);
    const StateVector w = apply_vqls_matrix(payload, psi);
    const double denom = w.norm_squared();
    const auto n = payload.num_qubits;
    double xsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        std::string word(n, 'I');
        word[j] = 'X';
        xsum += pauli_expectation(w, word).real();
    }
    const double numer = 0.5 * denom + xsum / (2.0 * static_cast<double>(n));
    return {numer, denom};
}

} // namespace

std::vector<double> loss_components(const TaskSpec &task, std::span<const GateOp> gates) {
    switch (task.variant) {
    case TaskVariant::vqls: {
        const auto [numer, denom] =
            vqls_parts(payload_as<VqlsPayload>(task), task.initial_state, gates);
        return {numer, denom};
    }
    default:
        return {task_loss(task, gates)};
    }
}

double combine_components(const TaskSpec &task, std::span<const double> c) {
    if (task.variant == TaskVariant::vqls) return 1.0 - c[0] / c[1];
    return c[0];
}

std::vector<double> combine_jacobian(const TaskSpec &task, std::span<const double> c) {
    if (task.variant == TaskVariant::vqls) return {-1.0 / c[1], c[0] / (c[1] * c[1])};
    return {1.0};
}

} // namespace detail

double vqls_cost(const VqlsPayload &payload, InitialState init, std::span<const GateOp> gates) {
    const auto [numer, denom] = detail::vqls_parts(payload, init, gates);
    if (denom < 1e-12) throw DegenerateError("VQLS normalisation <x|A^dag A|x> vanished");
    return std::clamp(1.0 - numer / denom, 0.0, 1.0 + 1e-9);
}

double chemistry_loss(const ChemistryPayload &payload, InitialState init,
                      std::span<const GateOp> gates) {
    return expectation(evolve(payload.hamiltonian.num_qubits(), init, gates), payload.hamiltonian);
}

double maxcut_loss(const MaxCutPayload &payload, InitialState init,
                   std::span<const GateOp> gates) {
    return expectation(evolve(payload.graph.vertices, init, gates), payload.cost);
}

double task_loss(const TaskSpec &task, std::span<const GateOp> gates) {
    double loss = 0.0;
    switch (task.variant) {
    case TaskVariant::qec422:
        loss = qec422_loss(payload_as<Qec422Payload>(task), gates);
        break;
    case TaskVariant::vqls:
        loss = vqls_cost(payload_as<VqlsPayload>(task), task.initial_state, gates);
        break;
    case TaskVariant::vqe:
        loss = chemistry_loss(payload_as<ChemistryPayload>(task), task.initial_state, gates);
        break;
    case TaskVariant::maxcut:
        loss = maxcut_loss(payload_as<MaxCutPayload>(task), task.initial_state, gates);
        break;
    }
    if (!std::isfinite(loss)) throw NumericError("task loss is not finite");
    return loss;
}

double scaled_reward(const TaskSpec &task, double loss, std::size_t placeholder_layers) {
    const double penalty = task.penalty_beta * static_cast<double>(placeholder_layers);
    switch (task.reward_scaling) {
    case RewardScaling::identity:
        return -loss - penalty;
    case RewardScaling::complement:
        return 1.0 - loss - penalty;
    case RewardScaling::exp_neg10:
        return std::exp(-10.0 * loss) - penalty;
    }
    return -loss - penalty;
}

Evaluation evaluate(const TaskSpec &task, const OperationPool &pool, const CircuitLayout &layout,
                    const SharedParameters &params) {
    if (pool.num_qubits() != task.num_qubits) {
        throw ConfigError("pool acts on " + std::to_string(pool.num_qubits()) +
                          " qubits, task on " + std::to_string(task.num_qubits));
    }
    const auto gates = bind_layout(pool, layout, params);
    const auto placeholders = static_cast<std::size_t>(std::ranges::count_if(
        gates, [](const GateOp &g) { return g.kind == GateKind::Placeholder; }));
    Evaluation e;
    e.loss = task_loss(task, gates);
    e.penalty = task.penalty_beta * static_cast<double>(placeholders);
    e.reward = scaled_reward(task, e.loss, placeholders);
    return e;
}

} // namespace qas
