#pragma once

// Serialisation of tasks, pools and searched circuits, plus circuit export.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qas/params.hpp"
#include "qas/pool.hpp"
#include "qas/search.hpp"
#include "qas/simulator.hpp"
#include "qas/tasks.hpp"

namespace qas {

[[nodiscard]] nlohmann::json to_json(const TaskSpec &task);
[[nodiscard]] TaskSpec task_from_json(const nlohmann::json &j);

/// Explicit entry list; independent of how the pool was specified.
[[nodiscard]] nlohmann::json to_json(const OperationPool &pool);
[[nodiscard]] OperationPool pool_from_json(const nlohmann::json &j);

[[nodiscard]] nlohmann::json to_json(const HardLimits &limits);
[[nodiscard]] HardLimits limits_from_json(const nlohmann::json &j);

[[nodiscard]] nlohmann::json to_json(const GateOp &gate);
[[nodiscard]] GateOp gate_from_json(const nlohmann::json &j);

/// Everything needed to re-evaluate a searched circuit: best_circuit.json.
struct CircuitFile {
    TaskSpec task;
    OperationPool pool;
    HardLimits limits;
    CircuitLayout layout;
    SharedParameters params;
    /// As recorded when the file was written.
    std::optional<double> reward;
    std::optional<double> loss;

    [[nodiscard]] std::vector<GateOp> gates() const { return bind_layout(pool, layout, params); }
};

[[nodiscard]] nlohmann::json to_json(const CircuitFile &file);
/// Throws ConfigError on missing fields or inconsistent shapes.
[[nodiscard]] CircuitFile circuit_file_from_json(const nlohmann::json &j);
void write_circuit_file(const std::filesystem::path &path, const CircuitFile &file);
[[nodiscard]] CircuitFile read_circuit_file(const std::filesystem::path &path);

/// OpenQASM 2.0 program. Rot becomes rz, ry, rz; Placeholders are dropped.
[[nodiscard]] std::string export_qasm2(std::size_t num_qubits, std::span<const GateOp> gates);
/// One gate per line, e.g. "CNOT q3 q2" or "Rot(0.1, 0.2, 0.3) q0". Placeholders are dropped.
[[nodiscard]] std::string export_text(std::span<const GateOp> gates);

struct QasmProgram {
    std::size_t num_qubits = 0;
    std::vector<GateOp> gates;
};

/// Reads the subset written by export_qasm2 (h, cx, rz, ry, u3 on one qreg).
/// Throws ConfigError on anything else.
[[nodiscard]] QasmProgram import_qasm2(const std::string &text);

/// iteration,reward,best_reward,loss,stopped_early
void write_reward_trace_csv(const std::filesystem::path &path, const SearchReport &report);
/// step,loss
void write_loss_trace_csv(const std::filesystem::path &path, std::span<const double> trace);

[[nodiscard]] nlohmann::json to_json(const TreeStats &stats);
[[nodiscard]] nlohmann::json search_report_json(const SearchReport &report);

[[nodiscard]] std::string format_double(double v);

/// Reads and parses a JSON file; ConfigError on I/O or syntax failure.
[[nodiscard]] nlohmann::json read_json_file(const std::filesystem::path &path);
void write_text_file(const std::filesystem::path &path, const std::string &text);

} // namespace qas
