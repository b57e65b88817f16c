#include "qas/circuit_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qas/errors.hpp"

namespace qas {

using nlohmann::json;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json read_json_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path &path, const std::string &text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

namespace {

json payload_to_json(const TaskSpec &task) {
    return std::visit(
        [](const auto &p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Qec422Payload>) {
                return json::object();
            } else if constexpr (std::is_same_v<T, VqlsPayload>) {
                return {{"a_matrix", to_json(PauliSum(p.num_qubits, p.a_terms))}};
            } else if constexpr (std::is_same_v<T, ChemistryPayload>) {
                return {{"hamiltonian", to_json(p.hamiltonian)}};
            } else {
                return {{"graph", to_json(p.graph)}};
            }
        },
        task.payload);
}

} // namespace

json to_json(const TaskSpec &task) {
    json j{{"variant", to_string(task.variant)},
           {"num_qubits", task.num_qubits},
           {"initial_state", to_string(task.initial_state)},
           {"penalty_beta", task.penalty_beta},
           {"reward_scaling", to_string(task.reward_scaling)},
           {"payload", payload_to_json(task)}};
    j["early_stop_reward"] =
        task.early_stop_reward ? json(*task.early_stop_reward) : json(nullptr);
    return j;
}

TaskSpec task_from_json(const json &j) {
    try {
        const TaskVariant variant = task_variant_from_string(j.at("variant").get<std::string>());
        const json &payload = j.at("payload");
        TaskSpec task;
        switch (variant) {
        case TaskVariant::qec422:
            task = TaskSpec::qec422();
            break;
        case TaskVariant::vqls: {
            const PauliSum a = pauli_sum_from_json(payload.at("a_matrix"));
            task = TaskSpec::vqls(VqlsPayload{a.num_qubits(), a.terms()});
            break;
        }
        case TaskVariant::vqe:
            task = TaskSpec::vqe(pauli_sum_from_json(payload.at("hamiltonian")));
            break;
        case TaskVariant::maxcut:
            task = TaskSpec::maxcut(graph_from_json(payload.at("graph")));
            break;
        }
        task.num_qubits = j.at("num_qubits").get<std::size_t>();
        task.initial_state = initial_state_from_string(j.at("initial_state").get<std::string>());
        task.penalty_beta = j.at("penalty_beta").get<double>();
        task.reward_scaling = reward_scaling_from_string(j.at("reward_scaling").get<std::string>());
        const json &es = j.at("early_stop_reward");
        task.early_stop_reward = es.is_null() ? std::nullopt : std::optional(es.get<double>());
        validate_task(task);
        return task;
    } catch (const json::exception &e) {
        throw ConfigError(std::string("malformed task block: ") + e.what());
    }
}

json to_json(const GateOp &gate) {
    return {{"kind", to_string(gate.kind)}, {"wires", gate.wires}, {"params", gate.params}};
}

GateOp gate_from_json(const json &j) {
    try {
        GateOp g;
        g.kind = gate_kind_from_string(j.at("kind").get<std::string>());
        g.wires = j.at("wires").get<std::vector<std::size_t>>();
        if (j.contains("params")) g.params = j.at("params").get<std::vector<double>>();
        return g;
    } catch (const json::exception &e) {
        throw ConfigError(std::string("malformed gate: ") + e.what());
    }
}

json to_json(const OperationPool &pool) {
    json entries = json::array();
    for (const auto &e : pool.entries()) {
        entries.push_back({{"kind", to_string(e.kind)}, {"wires", e.wires}});
    }
    return {{"num_qubits", pool.num_qubits()}, {"entries", std::move(entries)}};
}

OperationPool pool_from_json(const json &j) {
    try {
        std::vector<GateOp> entries;
        for (const auto &e : j.at("entries")) {
            GateOp g = gate_from_json(e);
            g.params.clear();
            entries.push_back(std::move(g));
        }
        return OperationPool(j.at("num_qubits").get<std::size_t>(), std::move(entries));
    } catch (const json::exception &e) {
        throw ConfigError(std::string("malformed pool block: ") + e.what());
    } catch (const WiringError &e) {
        throw ConfigError(std::string("invalid pool entry: ") + e.what());
    }
}

json to_json(const HardLimits &limits) {
    json caps = json::object();
    for (const auto &[kind, cap] : limits.max_count_per_kind) caps[std::string(to_string(kind))] = cap;
    return {{"max_layers", limits.max_layers}, {"max_count_per_kind", std::move(caps)}};
}

HardLimits limits_from_json(const json &j) {
    try {
        HardLimits limits;
        limits.max_layers = j.at("max_layers").get<std::size_t>();
        if (limits.max_layers < 1) throw ConfigError("max_layers must be >= 1");
        if (j.contains("max_count_per_kind")) {
            for (const auto &[kind, cap] : j.at("max_count_per_kind").items()) {
                limits.max_count_per_kind[gate_kind_from_string(kind)] = cap.get<std::size_t>();
            }
        }
        return limits;
    } catch (const json::exception &e) {
        throw ConfigError(std::string("malformed limits block: ") + e.what());
    }
}

json to_json(const CircuitFile &file) {
    json gates = json::array();
    for (const auto &g : file.gates()) gates.push_back(to_json(g));
    json j{{"task", to_json(file.task)},     {"pool", to_json(file.pool)},
           {"limits", to_json(file.limits)}, {"layout", file.layout},
           {"gates", std::move(gates)},      {"params", to_json(file.params)}};
    if (file.reward) j["reward"] = *file.reward;
    if (file.loss) j["loss"] = *file.loss;
    return j;
}

CircuitFile circuit_file_from_json(const json &j) {
    try {
        CircuitFile f;
        f.task = task_from_json(j.at("task"));
        f.pool = pool_from_json(j.at("pool"));
        f.limits = limits_from_json(j.at("limits"));
        f.layout = j.at("layout").get<CircuitLayout>();
        f.params = shared_parameters_from_json(j.at("params"));
        if (j.contains("reward")) f.reward = j.at("reward").get<double>();
        if (j.contains("loss")) f.loss = j.at("loss").get<double>();
        if (f.pool.num_qubits() != f.task.num_qubits) {
            throw ConfigError("pool and task disagree on the qubit count");
        }
        for (std::size_t k : f.layout) {
            if (k >= f.pool.size()) throw ConfigError("layout index " + std::to_string(k) + " outside the pool");
        }
        check_shape(f.params, f.pool);
        if (f.params.layers() < f.layout.size()) {
            throw ConfigError("parameter tensor has fewer layers than the layout");
        }
        return f;
    } catch (const json::exception &e) {
        throw ConfigError(std::string("malformed circuit file: ") + e.what());
    } catch (const ParameterError &e) {
        throw ConfigError(std::string("inconsistent circuit file: ") + e.what());
    }
}

void write_circuit_file(const std::filesystem::path &path, const CircuitFile &file) {
    write_text_file(path, to_json(file).dump(2) + "\n");
}

CircuitFile read_circuit_file(const std::filesystem::path &path) {
    return circuit_file_from_json(read_json_file(path));
}

std::string export_qasm2(std::size_t num_qubits, std::span<const GateOp> gates) {
    std::ostringstream out;
    out << "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[" << num_qubits << "];\n";
    auto q = [](std::size_t w) { return "q[" + std::to_string(w) + "]"; };
    for (const auto &g : gates) {
        switch (g.kind) {
        case GateKind::H:
            out << "h " << q(g.wires[0]) << ";\n";
            break;
        case GateKind::CNOT:
            out << "cx " << q(g.wires[0]) << "," << q(g.wires[1]) << ";\n";
            break;
        case GateKind::RZ:
            out << "rz(" << format_double(g.params[0]) << ") " << q(g.wires[0]) << ";\n";
            break;
        case GateKind::RY:
            out << "ry(" << format_double(g.params[0]) << ") " << q(g.wires[0]) << ";\n";
            break;
        case GateKind::Rot:
            out << "rz(" << format_double(g.params[0]) << ") " << q(g.wires[0]) << ";\n";
            out << "ry(" << format_double(g.params[1]) << ") " << q(g.wires[0]) << ";\n";
            out << "rz(" << format_double(g.params[2]) << ") " << q(g.wires[0]) << ";\n";
            break;
        case GateKind::U3:
            out << "u3(" << format_double(g.params[0]) << "," << format_double(g.params[1]) << ","
                << format_double(g.params[2]) << ") " << q(g.wires[0]) << ";\n";
            break;
        case GateKind::Placeholder:
            break;
        }
    }
    return out.str();
}

std::string export_text(std::span<const GateOp> gates) {
    std::ostringstream out;
    for (const auto &g : gates) {
        if (g.kind == GateKind::Placeholder) continue;
        out << to_string(g.kind);
        if (!g.params.empty()) {
            out << "(";
            for (std::size_t i = 0; i < g.params.size(); ++i) {
                out << (i ? ", " : "") << format_double(g.params[i]);
            }
            out << ")";
        }
        for (std::size_t w : g.wires) out << " q" << w;
        out << "\n";
    }
    return out.str();
}

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::size_t parse_qubit(const std::string &tok, std::size_t line) {
    const auto open = tok.find('[');
    const auto close = tok.find(']');
    if (open == std::string::npos || close == std::string::npos || close < open) {
        throw ConfigError("expected q[i], got '" + tok + "'", line);
    }
    try {
        return std::stoul(tok.substr(open + 1, close - open - 1));
    } catch (const std::exception &) {
        throw ConfigError("bad qubit index in '" + tok + "'", line);
    }
}

std::vector<double> parse_angles(const std::string &text, std::size_t line) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const std::string t = trim(item);
            out.push_back(std::stod(t, &used));
            if (used != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception &) {
            throw ConfigError("unsupported angle expression '" + trim(item) + "'", line);
        }
    }
    return out;
}

} // namespace

QasmProgram import_qasm2(const std::string &text) {
    QasmProgram prog;
    bool have_reg = false;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (const auto c = raw.find("//"); c != std::string::npos) raw.resize(c);
        std::string stmt = trim(raw);
        if (stmt.empty()) continue;
        if (stmt.back() != ';') throw ConfigError("statement must end with ';'", line);
        stmt = trim(stmt.substr(0, stmt.size() - 1));
        if (stmt == "OPENQASM 2.0" || stmt.starts_with("include ")) continue;
        if (stmt.starts_with("qreg ")) {
            if (have_reg) throw ConfigError("only one qreg is supported", line);
            prog.num_qubits = parse_qubit(stmt.substr(5), line);
            have_reg = true;
            continue;
        }
        if (!have_reg) throw ConfigError("gate before qreg declaration", line);

        std::string name;
        std::string angles;
        std::string args;
        if (const auto p = stmt.find('('); p != std::string::npos && p < stmt.find(' ')) {
            const auto close = stmt.find(')', p);
            if (close == std::string::npos) throw ConfigError("unbalanced parenthesis", line);
            name = stmt.substr(0, p);
            angles = stmt.substr(p + 1, close - p - 1);
            args = trim(stmt.substr(close + 1));
        } else {
            const auto sp = stmt.find(' ');
            if (sp == std::string::npos) throw ConfigError("missing gate operands", line);
            name = stmt.substr(0, sp);
            args = trim(stmt.substr(sp + 1));
        }
        std::vector<std::size_t> wires;
        std::stringstream as(args);
        std::string tok;
        while (std::getline(as, tok, ',')) wires.push_back(parse_qubit(trim(tok), line));
        const std::vector<double> params = angles.empty() ? std::vector<double>{} : parse_angles(angles, line);

        GateOp g;
        if (name == "h") g.kind = GateKind::H;
        else if (name == "cx") g.kind = GateKind::CNOT;
        else if (name == "rz") g.kind = GateKind::RZ;
        else if (name == "ry") g.kind = GateKind::RY;
        else if (name == "u3") g.kind = GateKind::U3;
        else throw ConfigError("unsupported gate '" + name + "'", line);
        g.wires = std::move(wires);
        g.params = params;
        if (g.params.size() != param_count(g.kind) || g.wires.size() != wire_count(g.kind)) {
            throw ConfigError("wrong operand count for '" + name + "'", line);
        }
        try {
            validate_gate(g, prog.num_qubits);
        } catch (const WiringError &e) {
            throw ConfigError(e.what(), line);
        }
        prog.gates.push_back(std::move(g));
    }
    if (!have_reg) throw ConfigError("no qreg declaration");
    return prog;
}

void write_reward_trace_csv(const std::filesystem::path &path, const SearchReport &report) {
    std::string out = "iteration,reward,best_reward,loss,stopped_early\n";
    for (std::size_t i = 0; i < report.reward_trace.size(); ++i) {
        const auto &t = report.reward_trace[i];
        const bool last = i + 1 == report.reward_trace.size();
        out += std::to_string(t.iteration) + "," + format_double(t.reward) + "," +
               format_double(t.best_reward) + "," + format_double(t.loss) + "," +
               (last && report.stopped_early ? "1" : "0") + "\n";
    }
    write_text_file(path, out);
}

void write_loss_trace_csv(const std::filesystem::path &path, std::span<const double> trace) {
    std::string out = "step,loss\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out += std::to_string(i) + "," + format_double(trace[i]) + "\n";
    }
    write_text_file(path, out);
}

json to_json(const TreeStats &stats) {
    return {{"node_count", stats.node_count},
            {"prune_count", stats.prune_count},
            {"max_depth", stats.max_depth},
            {"simulations", stats.simulations}};
}

json search_report_json(const SearchReport &report) {
    json trace = json::array();
    for (const auto &t : report.reward_trace) {
        trace.push_back({{"iteration", t.iteration},
                         {"reward", t.reward},
                         {"best_reward", t.best_reward},
                         {"loss", t.loss}});
    }
    return {{"best_layout", report.best_layout},
            {"best_reward", report.best_reward},
            {"best_loss", report.best_loss},
            {"stopped_early", report.stopped_early},
            {"iterations_run", report.reward_trace.size()},
            {"tree_stats", to_json(report.tree_stats)},
            {"trace", std::move(trace)}};
}

} // namespace qas
