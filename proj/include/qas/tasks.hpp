#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qas/params.hpp"
#include "qas/pool.hpp"
#include "qas/simulator.hpp"

namespace qas {

enum class TaskVariant { qec422, vqls, vqe, maxcut };

[[nodiscard]] std::string_view to_string(TaskVariant v);
[[nodiscard]] TaskVariant task_variant_from_string(std::string_view name);

/// How the raw loss L maps to a reward before the placeholder penalty:
/// identity: -L, complement: 1 - L, exp_neg10: exp(-10 L).
enum class RewardScaling { identity, complement, exp_neg10 };

[[nodiscard]] std::string_view to_string(RewardScaling s);
[[nodiscard]] RewardScaling reward_scaling_from_string(std::string_view name);

/// [[4,2,2]] encoder target: the reference encoder and the 49 product inputs
/// |a>|b>|00> with a, b drawn from {0, 1, +, -, +i, -i, T}.
struct Qec422Payload {
    std::vector<GateOp> reference_encoder;
    std::vector<StateVector> inputs;
    /// reference_encoder applied to each input
    std::vector<StateVector> targets;
};

[[nodiscard]] Qec422Payload make_qec422_payload();

/// A = sum_l c_l A_l with each A_l a single Pauli word; |b> = H^n |0>.
struct VqlsPayload {
    std::size_t num_qubits = 0;
    std::vector<PauliTerm> a_terms;
};

/// zeta I + J X_0 + J X_1 + eta Z_2 Z_3 on four qubits.
[[nodiscard]] VqlsPayload make_vqls_payload(double zeta = 1.0, double j = 0.1, double eta = 0.2);

struct ChemistryPayload {
    PauliSum hamiltonian;
};

struct Edge {
    std::size_t u = 0;
    std::size_t v = 0;
    double weight = 1.0;
};

struct Graph {
    std::size_t vertices = 0;
    std::vector<Edge> edges;
};

/// {"vertices": n, "edges": [[u, v, w], ...]}; w defaults to 1.
[[nodiscard]] Graph graph_from_json(const nlohmann::json &j);
[[nodiscard]] nlohmann::json to_json(const Graph &g);
[[nodiscard]] Graph load_graph(const std::filesystem::path &path);
/// Throws GraphError on self-loops or out-of-range vertices.
void validate_graph(const Graph &g);

struct MaxCutPayload {
    Graph graph;
    PauliSum cost;
};

/// H_C = -sum_(i,j) w_ij (I - Z_i Z_j) / 2, one identity and one ZZ term per edge.
[[nodiscard]] PauliSum maxcut_hamiltonian(const Graph &graph);

using TaskPayload = std::variant<Qec422Payload, VqlsPayload, ChemistryPayload, MaxCutPayload>;

struct TaskSpec {
    TaskVariant variant = TaskVariant::vqe;
    std::size_t num_qubits = 0;
    InitialState initial_state = InitialState::zeros;
    /// Reward penalty per Placeholder layer.
    double penalty_beta = 0.0;
    RewardScaling reward_scaling = RewardScaling::identity;
    std::optional<double> early_stop_reward;
    TaskPayload payload;

    /// Tasks without parametric gates in the pool never need gradients.
    [[nodiscard]] bool has_parameters(const OperationPool &pool) const {
        return pool.max_params() > 0;
    }

    [[nodiscard]] static TaskSpec qec422();
    [[nodiscard]] static TaskSpec vqls(VqlsPayload payload);
    [[nodiscard]] static TaskSpec vqe(PauliSum hamiltonian);
    [[nodiscard]] static TaskSpec maxcut(Graph graph);
};

/// Throws ConfigError if the payload does not match the variant or sizes.
void validate_task(const TaskSpec &task);

struct Evaluation {
    /// Raw task loss L (no penalty).
    double loss = 0.0;
    /// lambda = penalty_beta * #placeholders
    double penalty = 0.0;
    double reward = 0.0;
};

[[nodiscard]] Evaluation evaluate(const TaskSpec &task, const OperationPool &pool,
                                  const CircuitLayout &layout, const SharedParameters &params);

/// Raw loss of a bound gate list.
[[nodiscard]] double task_loss(const TaskSpec &task, std::span<const GateOp> gates);

/// Reward from a raw loss and placeholder count.
[[nodiscard]] double scaled_reward(const TaskSpec &task, double loss,
                                   std::size_t placeholder_layers);

/// 1 - mean fidelity between the searched and reference outputs over the 49 inputs.
[[nodiscard]] double qec422_loss(const Qec422Payload &payload, std::span<const GateOp> gates);

/// Local VQLS cost C_L of the state V|init>, clamped to [0, 1 + 1e-9].
/// Throws DegenerateError when <x|A^dag A|x> < 1e-12.
[[nodiscard]] double vqls_cost(const VqlsPayload &payload, InitialState init,
                               std::span<const GateOp> gates);

[[nodiscard]] double chemistry_loss(const ChemistryPayload &payload, InitialState init,
                                    std::span<const GateOp> gates);

[[nodiscard]] double maxcut_loss(const MaxCutPayload &payload, InitialState init,
                                 std::span<const GateOp> gates);

namespace detail {

/// Expectation-valued pieces of a task loss. Each is <psi|M|psi> for some
/// Hermitian M and psi the circuit output, so the parameter-shift rule holds
/// for every component separately. The loss is combine_components(...).
[[nodiscard]] std::vector<double> loss_components(const TaskSpec &task,
                                                  std::span<const GateOp> gates);
[[nodiscard]] double combine_components(const TaskSpec &task, std::span<const double> c);
/// d loss / d component_k at c.
[[nodiscard]] std::vector<double> combine_jacobian(const TaskSpec &task,
                                                   std::span<const double> c);

/// A|psi> for A = sum_l c_l A_l.
[[nodiscard]] StateVector apply_vqls_matrix(const VqlsPayload &payload, const StateVector &psi);

} // namespace detail

} // namespace qas
