#pragma once

// Dense statevector simulation.
//
// Qubit 0 is the most significant bit of an amplitude index and the leftmost
// character of every bitstring and Pauli word.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qas {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 16;

enum class GateKind { H, CNOT, Rot, RZ, RY, U3, Placeholder };

[[nodiscard]] std::string_view to_string(GateKind kind);
/// Case-sensitive; throws ConfigError on unknown names.
[[nodiscard]] GateKind gate_kind_from_string(std::string_view name);
[[nodiscard]] std::size_t param_count(GateKind kind);
[[nodiscard]] std::size_t wire_count(GateKind kind);

/// A gate bound to wires. For CNOT the control comes first. Angles are in
/// radians: Rot(phi, theta, omega), U3(theta, phi, lambda), RZ/RY(theta).
struct GateOp {
    GateKind kind = GateKind::Placeholder;
    std::vector<std::size_t> wires;
    std::vector<double> params;

    friend bool operator==(const GateOp &, const GateOp &) = default;
};

/// Row-major 2x2 unitary.
using Matrix2 = std::array<Complex, 4>;

/// Matrix of a single-qubit gate kind evaluated at the given angles.
[[nodiscard]] Matrix2 single_qubit_matrix(GateKind kind, std::span<const double> params);

enum class InitialState { zeros, plus };

[[nodiscard]] std::string_view to_string(InitialState s);
[[nodiscard]] InitialState initial_state_from_string(std::string_view name);

class StateVector {
  public:
    /// |0...0> on num_qubits qubits.
    explicit StateVector(std::size_t num_qubits);
    /// Takes ownership of the amplitudes; size must be a power of two.
    static StateVector from_amplitudes(std::vector<Complex> amplitudes);

    [[nodiscard]] std::size_t num_qubits() const noexcept { return num_qubits_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return amps_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const noexcept { return amps_; }
    [[nodiscard]] std::span<Complex> amplitudes() noexcept { return amps_; }
    [[nodiscard]] const Complex &operator[](std::size_t i) const { return amps_[i]; }
    [[nodiscard]] double norm_squared() const noexcept;

    /// Index bit that carries qubit q.
    [[nodiscard]] std::size_t mask(std::size_t q) const noexcept {
        return std::size_t{1} << (num_qubits_ - 1 - q);
    }

    void apply(const GateOp &gate);
    void apply_single(std::size_t wire, const Matrix2 &m);
    void apply_cnot(std::size_t control, std::size_t target);
    /// Multiplies the state by the Pauli word (one char per qubit, IXYZ).
    void apply_pauli(std::string_view word);

  private:
    std::size_t num_qubits_;
    std::vector<Complex> amps_;
};

/// Throws SizeError unless 1 <= num_qubits <= kMaxQubits.
[[nodiscard]] StateVector init_state(std::size_t num_qubits, InitialState kind);

/// Throws WiringError for bad wires and ParameterError for a wrong angle count.
void validate_gate(const GateOp &gate, std::size_t num_qubits);

[[nodiscard]] StateVector apply_gate(StateVector state, const GateOp &gate);
void apply_circuit(StateVector &state, std::span<const GateOp> gates);

/// <a|b>
[[nodiscard]] Complex inner_product(const StateVector &a, const StateVector &b);
/// |<a|b>|^2
[[nodiscard]] double fidelity(const StateVector &a, const StateVector &b);

struct PauliTerm {
    double coeff = 0.0;
    std::string pauli;

    friend bool operator==(const PauliTerm &, const PauliTerm &) = default;
};

/// Real linear combination of Pauli words on a fixed number of qubits.
class PauliSum {
  public:
    PauliSum() = default;
    PauliSum(std::size_t num_qubits, std::vector<PauliTerm> terms);

    [[nodiscard]] std::size_t num_qubits() const noexcept { return num_qubits_; }
    [[nodiscard]] const std::vector<PauliTerm> &terms() const noexcept { return terms_; }
    [[nodiscard]] bool is_diagonal() const noexcept;
    void add(double coeff, std::string pauli);

  private:
    std::size_t num_qubits_ = 0;
    std::vector<PauliTerm> terms_;
};

/// <state|P|state> for a single Pauli word (complex; real up to rounding).
[[nodiscard]] Complex pauli_expectation(const StateVector &state, std::string_view word);

/// Sum_k c_k <state|P_k|state>. Throws NumericError if the imaginary residue
/// exceeds 1e-10 relative to the coefficient mass.
[[nodiscard]] double expectation(const StateVector &state, const PauliSum &obs);

/// {"num_qubits": n, "terms": [{"coeff": c, "pauli": "XIZ.."}]}
[[nodiscard]] PauliSum pauli_sum_from_json(const nlohmann::json &j);
[[nodiscard]] nlohmann::json to_json(const PauliSum &obs);
[[nodiscard]] PauliSum load_pauli_sum(const std::filesystem::path &path);

/// Bitstring of a basis index, qubit 0 first.
[[nodiscard]] std::string bitstring(std::size_t index, std::size_t num_qubits);

struct SampleHistogram {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t shots = 0;

    /// Most frequent outcomes, ties broken lexicographically.
    [[nodiscard]] std::vector<std::pair<std::string, std::uint64_t>> top(std::size_t k) const;
};

/// Draws shots i.i.d. basis outcomes from |amplitude|^2.
[[nodiscard]] SampleHistogram sample(const StateVector &state, std::uint64_t shots,
                                     std::uint64_t seed);

} // namespace qas
