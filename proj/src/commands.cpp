#include "qas/commands.hpp"

#include <typeinfo>

#include "qas/errors.hpp"
#include "qas/oracles.hpp"

namespace qas {

namespace {

using nlohmann::json;

RunConfig load_config(const CommandOptions &opts) {
    if (opts.config.empty()) throw ConfigError("--config is required");
    RunConfig cfg = load_run_config(opts.config);
    if (opts.seed) apply_seed(cfg, *opts.seed);
    if (opts.out) cfg.output_dir = *opts.out;
    return cfg;
}

CircuitFile load_circuit(const CommandOptions &opts) {
    if (opts.circuit.empty()) throw ConfigError("a circuit file is required");
    return read_circuit_file(opts.circuit);
}

std::filesystem::path out_dir_for_circuit(const CommandOptions &opts) {
    if (opts.out) return *opts.out;
    return opts.circuit.has_parent_path() ? opts.circuit.parent_path() : ".";
}

std::string layout_text(const CircuitLayout &layout) {
    std::string s = "[";
    for (std::size_t i = 0; i < layout.size(); ++i) s += (i ? "," : "") + std::to_string(layout[i]);
    return s + "]";
}

} // namespace

StateVector simulate(const CircuitFile &file) {
    return run_circuit(file.pool, file.layout, file.params,
                       init_state(file.task.num_qubits, file.task.initial_state));
}

SearchOutcome cmd_search(const CommandOptions &opts, std::ostream &log) {
    const RunConfig cfg = load_config(opts);
    SearchSetup setup;
    setup.init = cfg.init;
    SearchOutcome outcome;
    outcome.report = run_search(cfg.task, cfg.pool, cfg.limits, cfg.search, cfg.optimizer, setup);
    const SearchReport &r = outcome.report;

    CircuitFile file{cfg.task, cfg.pool, cfg.limits, r.best_layout, r.best_params, r.best_reward,
                     r.best_loss};
    outcome.circuit_path = cfg.output_dir / "best_circuit.json";
    write_circuit_file(outcome.circuit_path, file);
    write_reward_trace_csv(cfg.output_dir / "reward_trace.csv", r);
    json report = search_report_json(r);
    report["seed"] = cfg.seed;
    report["config"] = cfg.source.string();
    write_text_file(cfg.output_dir / "search_report.json", report.dump(2) + "\n");

    log << "iterations " << r.reward_trace.size() << (r.stopped_early ? " (stopped early)" : "")
        << "\nbest reward " << format_double(r.best_reward) << "\nbest loss "
        << format_double(r.best_loss) << "\nlayout " << layout_text(r.best_layout) << "\n"
        << export_text(file.gates()) << "wrote " << outcome.circuit_path.string() << "\n";
    return outcome;
}

double cmd_finetune(const CommandOptions &opts, std::ostream &log) {
    CircuitFile file = load_circuit(opts);
    OptimizerConfig ft;
    ft.steps = 200;
    if (!opts.config.empty()) ft = load_run_config(opts.config).finetune;
    if (opts.steps) ft.steps = *opts.steps;
    if (opts.seed) ft.seed = *opts.seed;

    FinetuneResult res = finetune(file.task, file.pool, file.layout, file.params, ft);
    file.params = std::move(res.params);
    const Evaluation ev = evaluate(file.task, file.pool, file.layout, file.params);
    file.reward = ev.reward;
    file.loss = ev.loss;

    const auto dir = out_dir_for_circuit(opts);
    write_loss_trace_csv(dir / "loss_trace.csv", res.loss_trace);
    write_circuit_file(dir / "finetuned_circuit.json", file);
    log << "steps " << ft.steps << "\ninitial loss " << format_double(res.loss_trace.front())
        << "\nfinal loss " << format_double(res.loss_trace.back()) << "\nwrote "
        << (dir / "finetuned_circuit.json").string() << "\n";
    return res.loss_trace.back();
}

json cmd_sample(const CommandOptions &opts, std::ostream &log) {
    const CircuitFile file = load_circuit(opts);
    const std::size_t shots = opts.shots.value_or(1000000);
    if (shots == 0) throw ConfigError("--shots must be >= 1");
    const std::uint64_t seed = opts.seed.value_or(0);
    const SampleHistogram hist = sample(simulate(file), shots, seed);

    json top = json::array();
    for (const auto &[bits, n] : hist.top(10)) top.push_back({{"bitstring", bits}, {"count", n}});
    json out{{"shots", hist.shots}, {"seed", seed}, {"counts", hist.counts}, {"top", top}};
    write_text_file(out_dir_for_circuit(opts) / "histogram.json", out.dump(2) + "\n");
    const auto best = hist.top(1);
    log << "top-1 " << best.front().first << " (" << best.front().second << "/" << shots << ")\n";
    return out;
}

json cmd_oracle(const CommandOptions &opts, std::ostream &log) {
    const RunConfig cfg = load_config(opts);
    json out{{"variant", to_string(cfg.task.variant)}};
    std::visit(
        [&](const auto &p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, MaxCutPayload>) {
                const MaxCutSolution s = oracle_maxcut(p.graph);
                out["max_cut"] = s.value;
                out["argmax"] = s.argmax;
                log << "max cut " << format_double(s.value) << "\n";
            } else if constexpr (std::is_same_v<T, ChemistryPayload>) {
                const double e = oracle_ground_energy(p.hamiltonian);
                out["ground_energy"] = e;
                log << "ground energy " << format_double(e) << "\n";
            } else if constexpr (std::is_same_v<T, VqlsPayload>) {
                const auto probs = oracle_linear_solve(p);
                out["probabilities"] = probs;
                json bits = json::object();
                for (std::size_t i = 0; i < probs.size(); ++i) bits[bitstring(i, p.num_qubits)] = probs[i];
                out["distribution"] = bits;
                log << "solution distribution over " << probs.size() << " basis states\n";
            } else {
                json gates = json::array();
                for (const auto &g : p.reference_encoder) gates.push_back(to_json(g));
                out["reference_encoder"] = gates;
                out["reference_loss"] = qec422_loss(p, p.reference_encoder);
                log << export_text(p.reference_encoder);
            }
        },
        cfg.task.payload);
    write_text_file(cfg.output_dir / "oracle.json", out.dump(2) + "\n");
    return out;
}

std::string cmd_export(const CommandOptions &opts, std::ostream &log) {
    const CircuitFile file = load_circuit(opts);
    const auto gates = file.gates();
    std::string text;
    std::string name;
    if (opts.format == "qasm2") {
        text = export_qasm2(file.task.num_qubits, gates);
        name = "circuit.qasm";
    } else if (opts.format == "text") {
        text = export_text(gates);
        name = "circuit.txt";
    } else {
        throw ConfigError("unknown export format '" + opts.format + "' (qasm2|text)");
    }
    if (opts.out) write_text_file(*opts.out / name, text);
    log << text;
    return text;
}

int exit_code(const std::exception &e, const std::string &command) {
    if (dynamic_cast<const SizeError *>(&e) && command == "oracle") return kExitSizeCap;
    if (dynamic_cast<const NumericError *>(&e) || dynamic_cast<const DegenerateError *>(&e)) {
        return kExitNumeric;
    }
    if (dynamic_cast<const Error *>(&e) || dynamic_cast<const nlohmann::json::exception *>(&e) ||
        dynamic_cast<const std::filesystem::filesystem_error *>(&e)) {
        return kExitInput;
    }
    return kExitInternal;
}

} // namespace qas
