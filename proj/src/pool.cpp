#include "qas/pool.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "qas/errors.hpp"

namespace qas {

std::string_view to_string(TopologyKind kind) {
    switch (kind) {
    case TopologyKind::line:
        return "line";
    case TopologyKind::ring:
        return "ring";
    case TopologyKind::all_to_all:
        return "all_to_all";
    case TopologyKind::custom:
        return "custom";
    }
    return "?";
}

TopologyKind topology_kind_from_string(std::string_view name) {
    if (name == "line") return TopologyKind::line;
    if (name == "ring") return TopologyKind::ring;
    if (name == "all_to_all") return TopologyKind::all_to_all;
    if (name == "custom") return TopologyKind::custom;
    throw ConfigError("unknown topology '" + std::string(name) +
                      "' (line|ring|all_to_all|custom)");
}

std::vector<std::pair<std::size_t, std::size_t>>
Topology::directed_edges(std::size_t n) const {
    std::set<std::pair<std::size_t, std::size_t>> out;
    auto both = [&](std::size_t a, std::size_t b) {
        out.emplace(a, b);
        out.emplace(b, a);
    };
    switch (kind) {
    case TopologyKind::line:
        for (std::size_t q = 0; q + 1 < n; ++q) both(q, q + 1);
        break;
    case TopologyKind::ring:
        for (std::size_t q = 0; q + 1 < n; ++q) both(q, q + 1);
        if (n > 2) both(n - 1, 0);
        break;
    case TopologyKind::all_to_all:
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) both(a, b);
        break;
    case TopologyKind::custom:
        for (const auto &[c, t] : edges) {
            if (c >= n || t >= n || c == t) {
                throw ConfigError("custom edge (" + std::to_string(c) + ", " +
                                  std::to_string(t) + ") invalid on " + std::to_string(n) +
                                  " qubits");
            }
            out.emplace(c, t);
        }
        break;
    }
    return {out.begin(), out.end()};
}

OperationPool::OperationPool(std::size_t num_qubits, std::vector<GateOp> entries)
    : num_qubits_(num_qubits), entries_(std::move(entries)) {
    if (entries_.empty()) throw ConfigError("operation pool is empty");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        auto &e = entries_[i];
        e.params.assign(param_count(e.kind), 0.0);
        validate_gate(e, num_qubits_);
        e.params.clear();
        max_params_ = std::max(max_params_, param_count(e.kind));
        if (e.kind == GateKind::Placeholder) {
            if (placeholder_) throw ConfigError("operation pool has more than one placeholder");
            placeholder_ = i;
        }
    }
}

std::optional<std::size_t> OperationPool::find(GateKind kind,
                                               const std::vector<std::size_t> &wires) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].kind == kind && entries_[i].wires == wires) return i;
    }
    return std::nullopt;
}

OperationPool build_pool(std::size_t num_qubits, const std::vector<GateKind> &single_qubit_kinds,
                         const Topology &topology, bool include_placeholder) {
    if (num_qubits == 0 || num_qubits > kMaxQubits) {
        throw SizeError("pool qubit count " + std::to_string(num_qubits) + " out of range");
    }
    std::vector<GateKind> kinds = single_qubit_kinds;
    std::ranges::sort(kinds);
    kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
    for (GateKind k : kinds) {
        if (wire_count(k) != 1) {
            throw ConfigError(std::string(to_string(k)) + " is not a single-qubit gate kind");
        }
    }

    std::vector<GateOp> entries;
    for (GateKind k : kinds)
        for (std::size_t q = 0; q < num_qubits; ++q) entries.push_back({k, {q}, {}});
    for (const auto &[c, t] : topology.directed_edges(num_qubits))
        entries.push_back({GateKind::CNOT, {c, t}, {}});
    if (entries.empty()) throw ConfigError("gate set produces an empty operation pool");
    if (include_placeholder) entries.push_back({GateKind::Placeholder, {}, {}});
    return OperationPool(num_qubits, std::move(entries));
}

std::vector<std::size_t> allowed_actions(const CircuitLayout &prefix, const OperationPool &pool,
                                         const HardLimits &limits) {
    if (prefix.size() >= limits.max_layers) {
        throw StateError("prefix of length " + std::to_string(prefix.size()) +
                         " already has the maximum " + std::to_string(limits.max_layers) +
                         " layers");
    }
    std::map<GateKind, std::size_t> used;
    for (std::size_t idx : prefix) ++used[pool[idx].kind];

    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const GateKind k = pool[i].kind;
        if (k != GateKind::Placeholder) {
            auto cap = limits.max_count_per_kind.find(k);
            if (cap != limits.max_count_per_kind.end() && used[k] >= cap->second) continue;
        }
        out.push_back(i);
    }
    return out;
}

bool satisfies_limits(const CircuitLayout &layout, const OperationPool &pool,
                      const HardLimits &limits) {
    if (layout.size() > limits.max_layers) return false;
    std::map<GateKind, std::size_t> used;
    for (std::size_t idx : layout) {
        if (idx >= pool.size()) return false;
        ++used[pool[idx].kind];
    }
    for (const auto &[kind, count] : used) {
        if (kind == GateKind::Placeholder) continue;
        auto cap = limits.max_count_per_kind.find(kind);
        if (cap != limits.max_count_per_kind.end() && count > cap->second) return false;
    }
    return true;
}

} // namespace qas
