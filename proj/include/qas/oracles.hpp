#pragma once

// Brute-force reference solutions used to check the variational results.

#include <string>
#include <vector>

#include "qas/simulator.hpp"
#include "qas/tasks.hpp"

namespace qas {

inline constexpr std::size_t kMaxCutOracleVertices = 24;
inline constexpr std::size_t kDenseOracleQubits = 12;

struct MaxCutSolution {
    double value = 0.0;
    /// All optimal partitions, vertex 0 leftmost, sorted.
    std::vector<std::string> argmax;
};

/// Exhaustive enumeration of all 2^V partitions. Throws SizeError above 24 vertices.
[[nodiscard]] MaxCutSolution oracle_maxcut(const Graph &graph);

/// Cut value of one partition.
[[nodiscard]] double cut_value(const Graph &graph, const std::string &partition);

/// Minimum eigenvalue of the dense Hermitian matrix of `obs`. Throws SizeError
/// above 12 qubits.
[[nodiscard]] double oracle_ground_energy(const PauliSum &obs);

/// |x_i|^2 / ||x||^2 for x = A^{-1} H^n|0>. Throws DegenerateError for singular A.
[[nodiscard]] std::vector<double> oracle_linear_solve(const VqlsPayload &payload);

/// Normalised solution state A^{-1}|b> / ||A^{-1}|b>||.
[[nodiscard]] StateVector oracle_linear_solution_state(const VqlsPayload &payload);

} // namespace qas
