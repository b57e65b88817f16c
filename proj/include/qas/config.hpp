#pragma once

// YAML run configuration: one file describes one experiment.
//
//   seed: 3
//   output: runs/qec422            # relative to the config file
//   task:
//     variant: maxcut              # qec422 | vqls | vqe | maxcut
//     graph: ../data/maxcut5_weighted.json
//   pool:
//     single_qubit: [Rot]
//     topology: ring               # line | ring | all_to_all | custom | none
//     placeholder: true
//     max_layers: 10
//     max_count: {CNOT: 7}
//   search: {alpha: 0.4, rounds: 10, iterations: 50}
//   optimizer: {learning_rate: 0.01, steps: 20, batch_size: 8}
//   finetune: {steps: 200}
//
// Every error is reported as a ConfigError carrying the offending line.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qas/params.hpp"
#include "qas/pool.hpp"
#include "qas/search.hpp"
#include "qas/supernet.hpp"
#include "qas/tasks.hpp"

namespace qas {

struct PoolSpec {
    std::vector<GateKind> single_qubit_kinds;
    /// nullopt: no two-qubit gates.
    std::optional<Topology> topology;
    bool placeholder = true;
};

struct RunConfig {
    std::filesystem::path source;
    TaskSpec task;
    PoolSpec pool_spec;
    OperationPool pool;
    HardLimits limits;
    SearchConfig search;
    /// Warm-up and per-iteration supernet updates.
    OptimizerConfig optimizer;
    InitSpec init;
    OptimizerConfig finetune;
    std::size_t shots = 1000000;
    std::filesystem::path output_dir;
    std::uint64_t seed = 0;
};

/// Sets the seed of every stochastic component.
void apply_seed(RunConfig &cfg, std::uint64_t seed);

/// Parses YAML text; relative paths resolve against base_dir.
[[nodiscard]] RunConfig parse_run_config(const std::string &text,
                                         const std::filesystem::path &base_dir);
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path &path);

} // namespace qas
