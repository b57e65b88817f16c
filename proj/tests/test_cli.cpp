#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "qas/circuit_io.hpp"
#include "qas/commands.hpp"
#include "qas/config.hpp"
#include "qas/errors.hpp"
#include "reference.hpp"

using namespace qas;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    const fs::path dir = fs::path(QAS_TEST_TMP) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write(const fs::path &p, const std::string &text) {
    std::ofstream(p) << text;
    return p;
}

const char *kSmallMaxCut = R"(seed: 3
output: out
task:
  variant: maxcut
  graph: {vertices: 3, edges: [[0, 1, 1.0], [1, 2, 2.0]]}
pool:
  single_qubit: [Rot]
  topology: line
  max_layers: 4
  max_count: {CNOT: 2}
search: {rounds: 4, iterations: 3}
optimizer: {learning_rate: 0.1, steps: 2, batch_size: 2}
finetune: {steps: 5}
)";

int run_tool(const std::string &args) {
    const int status = std::system((std::string(QAS_TOOL) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("config errors carry line numbers") {
    auto line_of = [](const std::string &text) {
        try {
            (void)parse_run_config(text, ".");
        } catch (const ConfigError &e) {
            return e.line();
        }
        return std::size_t{0};
    };
    CHECK(line_of("task:\n  variant: qec422\n  colour: red\npool: {max_layers: 6}\n") == 3);
    CHECK(line_of("task:\n  variant: nope\npool: {max_layers: 6}\n") == 2);
    CHECK(line_of("task: {variant: qec422}\npool:\n  single_qubit: [H]\n  max_layers: 0\n") == 4);
    CHECK(line_of("task: {variant: qec422}\npool:\n  single_qubit: [H]\n  max_layers: 6\n"
                  "optimizer:\n  learning_rate: -1\n") == 6);
    CHECK(line_of("task: {variant: maxcut, graph: missing.json}\npool: {max_layers: 2}\n") == 1);
    CHECK(line_of("task:\n  variant: qec422\npool:\n  single_qubit: [H]\n  topology: ring\n"
                  "  max_layers: 6\n  max_count: {Toffoli: 1}\n") == 7);
}

TEST_CASE("shipped configs load") {
    for (const char *name : {"qec422", "vqls", "h2", "maxcut5", "maxcut7"}) {
        const RunConfig cfg = load_run_config(fs::path(QAS_SOURCE_DIR) / "configs" / (std::string(name) + ".yaml"));
        CHECK(cfg.pool.num_qubits() == cfg.task.num_qubits);
    }
    const RunConfig qec = load_run_config(fs::path(QAS_SOURCE_DIR) / "configs/qec422.yaml");
    CHECK(qec.pool.size() == 16);
    CHECK(qec.limits.max_layers == 6);
}

TEST_CASE("qasm round trip") {
    std::mt19937_64 rng(51);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + ref::pick(rng, 5);
        const auto gates = ref::random_circuit(rng, n, 15);
        const QasmProgram prog = import_qasm2(export_qasm2(n, gates));
        CHECK(prog.num_qubits == n);
        StateVector a(n), b(n);
        apply_circuit(a, gates);
        apply_circuit(b, prog.gates);
        CHECK(ref::max_abs_diff(ref::to_vec(a), ref::to_vec(b)) <= 1e-9);
    }
    const std::string header = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\n";
    const GateOp ph{GateKind::Placeholder, {}, {}};
    CHECK(export_qasm2(2, std::vector<GateOp>{ph, ph}) == header);
    CHECK_THROWS_AS((void)import_qasm2("OPENQASM 2.0;\nqreg q[1];\nccx q[0];\n"), ConfigError);
}

TEST_CASE("text export of the reference encoder") {
    const auto enc = std::get<Qec422Payload>(TaskSpec::qec422().payload).reference_encoder;
    CHECK(export_text(enc) ==
          "H q3\nCNOT q0 q2\nCNOT q1 q2\nCNOT q3 q2\nCNOT q3 q1\nCNOT q3 q0\n");
}

TEST_CASE("search, finetune, sample and export through the commands") {
    const fs::path dir = scratch("pipeline");
    CommandOptions o;
    o.config = write(dir / "run.yaml", kSmallMaxCut);
    std::ostringstream log;
    const SearchOutcome s1 = cmd_search(o, log);
    const std::string trace1 = slurp(dir / "out/reward_trace.csv");
    CHECK(trace1.rfind("iteration,reward,best_reward,loss,stopped_early\n", 0) == 0);
    CHECK(fs::exists(dir / "out/search_report.json"));
    (void)cmd_search(o, log);
    CHECK(slurp(dir / "out/reward_trace.csv") == trace1);

    const CircuitFile file = read_circuit_file(s1.circuit_path);
    const auto ev = evaluate(file.task, file.pool, file.layout, file.params);
    REQUIRE(file.reward);
    CHECK(std::abs(ev.reward - *file.reward) <= 1e-9);
    CHECK(std::abs(ev.reward - s1.report.best_reward) <= 1e-9);

    CommandOptions f;
    f.circuit = s1.circuit_path;
    f.steps = 0;
    (void)cmd_finetune(f, log);
    CHECK(slurp(dir / "out/loss_trace.csv") ==
          "step,loss\n0," + format_double(evaluate(file.task, file.pool, file.layout, file.params).loss) + "\n");
    f.steps = 25;
    const double final_loss = cmd_finetune(f, log);
    CHECK(final_loss <= ev.loss + 1e-12);

    CommandOptions sm;
    sm.circuit = dir / "out/finetuned_circuit.json";
    sm.shots = 5000;
    sm.seed = 2;
    const auto h1 = cmd_sample(sm, log);
    const auto h2 = cmd_sample(sm, log);
    CHECK(h1 == h2);
    std::uint64_t total = 0;
    for (const auto &[k, v] : h1["counts"].items()) total += v.get<std::uint64_t>();
    CHECK(total == 5000);

    CommandOptions ex;
    ex.circuit = s1.circuit_path;
    ex.format = "qasm2";
    ex.out = dir / "export";
    const std::string qasm = cmd_export(ex, log);
    CHECK(qasm.rfind("OPENQASM 2.0;", 0) == 0);
    CHECK(fs::exists(dir / "export/circuit.qasm"));
    ex.format = "svg";
    CHECK_THROWS_AS((void)cmd_export(ex, log), ConfigError);
}

TEST_CASE("zero iterations") {
    const fs::path dir = scratch("empty");
    std::string text = kSmallMaxCut;
    text.replace(text.find("iterations: 3"), 13, "iterations: 0");
    CommandOptions o;
    o.config = write(dir / "run.yaml", text);
    std::ostringstream log;
    const auto out = cmd_search(o, log);
    CHECK(out.report.reward_trace.empty());
    CHECK(slurp(dir / "out/reward_trace.csv") == "iteration,reward,best_reward,loss,stopped_early\n");
}

TEST_CASE("deterministic state samples to one bin") {
    const fs::path dir = scratch("sample");
    const TaskSpec task = TaskSpec::vqe(PauliSum(2, {{1.0, "ZZ"}}));
    const OperationPool pool(2, {GateOp{GateKind::RY, {1}, {}}});
    SharedParameters params(1, 1, 1);
    params.at(0, 0, 0) = std::numbers::pi;
    write_circuit_file(dir / "c.json", CircuitFile{task, pool, HardLimits{{}, 1}, {0}, params, {}, {}});
    CommandOptions sm;
    sm.circuit = dir / "c.json";
    sm.shots = 100;
    std::ostringstream log;
    const auto h = cmd_sample(sm, log);
    CHECK(h["counts"].size() == 1);
    CHECK(h["counts"]["01"] == 100);
    CHECK(log.str() == "top-1 01 (100/100)\n");
}

TEST_CASE("oracle command") {
    const fs::path dir = scratch("oracle");
    std::ostringstream log;
    CommandOptions o;
    o.config = fs::path(QAS_SOURCE_DIR) / "configs/maxcut5.yaml";
    o.out = dir;
    const auto mc = cmd_oracle(o, log);
    CHECK(mc["max_cut"] == 18.0);
    CHECK(mc["argmax"] == nlohmann::json::array({"00011", "11100"}));

    o.config = write(dir / "ident.yaml", "output: .\ntask:\n  variant: vqls\n  a_matrix: "
                                         "{num_qubits: 2, terms: [{coeff: 1.0, pauli: II}]}\n"
                                         "pool: {single_qubit: [Rot], max_layers: 2}\n");
    const auto v = cmd_oracle(o, log);
    for (const auto &p : v["probabilities"]) CHECK(p.get<double>() == doctest::Approx(0.25));
}

TEST_CASE("exit codes") {
    const fs::path dir = scratch("exit");
    CHECK(exit_code(ConfigError("x", 3), "search") == kExitInput);
    CHECK(exit_code(NumericError("x"), "finetune") == kExitNumeric);
    CHECK(exit_code(SizeError("x"), "oracle") == kExitSizeCap);
    CHECK(exit_code(std::logic_error("x"), "search") == kExitInternal);

    write(dir / "bad.yaml", "task:\n  variant: maxcut\n  wat: 1\n");
    CHECK(run_tool("search --config " + (dir / "bad.yaml").string()) == kExitInput);
    write(dir / "bad.json", "{\"layout\": [0]}");
    CHECK(run_tool("finetune " + (dir / "bad.json").string()) == kExitInput);

    std::string terms = "{\"num_qubits\": 13, \"terms\": [{\"coeff\": 1.0, \"pauli\": \"" +
                        std::string(13, 'Z') + "\"}]}";
    write(dir / "big.json", terms);
    write(dir / "big.yaml", "output: .\ntask:\n  variant: vqe\n  hamiltonian: big.json\n"
                            "pool: {single_qubit: [Rot], max_layers: 2}\n");
    CHECK(run_tool("oracle --config " + (dir / "big.yaml").string()) == kExitSizeCap);

    write(dir / "ok.yaml", kSmallMaxCut);
    CHECK(run_tool("search --config " + (dir / "ok.yaml").string()) == kExitOk);
}
