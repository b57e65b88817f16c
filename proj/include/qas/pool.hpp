#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "qas/simulator.hpp"

namespace qas {

/// Ordered list of pool indices, one per circuit layer.
using CircuitLayout = std::vector<std::size_t>;

enum class TopologyKind { line, ring, all_to_all, custom };

[[nodiscard]] std::string_view to_string(TopologyKind kind);
[[nodiscard]] TopologyKind topology_kind_from_string(std::string_view name);

/// Two-qubit connectivity. line/ring/all_to_all describe undirected
/// adjacencies, each of which yields CNOTs in both directions. custom edges
/// are taken as directed (control, target) pairs exactly as listed.
struct Topology {
    TopologyKind kind = TopologyKind::line;
    std::vector<std::pair<std::size_t, std::size_t>> edges;

    /// Directed (control, target) pairs on num_qubits qubits, sorted.
    [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>>
    directed_edges(std::size_t num_qubits) const;
};

/// Indexed gate prototypes (parameters unbound). Entry order: single-qubit
/// gates by (kind, qubit), then CNOTs by (control, target), then the
/// placeholder.
class OperationPool {
  public:
    OperationPool() = default;
    OperationPool(std::size_t num_qubits, std::vector<GateOp> entries);

    [[nodiscard]] std::size_t num_qubits() const noexcept { return num_qubits_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] std::size_t max_params() const noexcept { return max_params_; }
    [[nodiscard]] std::optional<std::size_t> placeholder_index() const noexcept {
        return placeholder_;
    }
    [[nodiscard]] const GateOp &operator[](std::size_t i) const { return entries_.at(i); }
    [[nodiscard]] const std::vector<GateOp> &entries() const noexcept { return entries_; }
    /// Index of the entry equal to (kind, wires), if any.
    [[nodiscard]] std::optional<std::size_t> find(GateKind kind,
                                                  const std::vector<std::size_t> &wires) const;

  private:
    std::size_t num_qubits_ = 0;
    std::vector<GateOp> entries_;
    std::size_t max_params_ = 0;
    std::optional<std::size_t> placeholder_;
};

struct HardLimits {
    std::map<GateKind, std::size_t> max_count_per_kind;
    std::size_t max_layers = 1;
};

/// Throws ConfigError when no gate would be produced.
[[nodiscard]] OperationPool build_pool(std::size_t num_qubits,
                                       const std::vector<GateKind> &single_qubit_kinds,
                                       const Topology &two_qubit_topology,
                                       bool include_placeholder);

/// Pool indices admissible after prefix: every entry whose kind count is still
/// below its cap, plus the placeholder unconditionally. Throws StateError if
/// the prefix already has max_layers entries.
[[nodiscard]] std::vector<std::size_t> allowed_actions(const CircuitLayout &prefix,
                                                       const OperationPool &pool,
                                                       const HardLimits &limits);

/// True if every index is valid and every kind cap holds.
[[nodiscard]] bool satisfies_limits(const CircuitLayout &layout, const OperationPool &pool,
                                    const HardLimits &limits);

} // namespace qas
