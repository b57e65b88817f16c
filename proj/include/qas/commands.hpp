#pragma once

// Subcommands behind the `qas` executable. Each writes its artifacts into an
// output directory and a short summary to `log`; failures surface as
// exceptions that exit_code() maps to the process status.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "qas/circuit_io.hpp"
#include "qas/config.hpp"

namespace qas {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitSizeCap = 4;

struct CommandOptions {
    std::filesystem::path config;
    std::filesystem::path circuit;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    std::optional<std::size_t> shots;
    std::optional<std::size_t> steps;
    std::string format = "text";
};

/// search_report.json contents plus the paths written.
struct SearchOutcome {
    SearchReport report;
    std::filesystem::path circuit_path;
};

SearchOutcome cmd_search(const CommandOptions &opts, std::ostream &log);

/// Writes loss_trace.csv and finetuned_circuit.json; returns the final loss.
double cmd_finetune(const CommandOptions &opts, std::ostream &log);

/// Writes histogram.json; returns it.
nlohmann::json cmd_sample(const CommandOptions &opts, std::ostream &log);

/// Writes oracle.json; returns it.
nlohmann::json cmd_oracle(const CommandOptions &opts, std::ostream &log);

/// Prints the circuit in opts.format to `log`; also writes circuit.qasm or
/// circuit.txt when opts.out is set.
std::string cmd_export(const CommandOptions &opts, std::ostream &log);

/// Process status for an exception escaping `command`.
[[nodiscard]] int exit_code(const std::exception &e, const std::string &command);

/// Basis-state amplitudes of a stored circuit applied to its task's initial state.
[[nodiscard]] StateVector simulate(const CircuitFile &file);

} // namespace qas
