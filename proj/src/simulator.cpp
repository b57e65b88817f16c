#include "qas/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "qas/errors.hpp"

namespace qas {

namespace {

constexpr std::array<std::pair<GateKind, std::string_view>, 7> kGateNames{{
    {GateKind::H, "H"},
    {GateKind::CNOT, "CNOT"},
    {GateKind::Rot, "Rot"},
    {GateKind::RZ, "RZ"},
    {GateKind::RY, "RY"},
    {GateKind::U3, "U3"},
    {GateKind::Placeholder, "Placeholder"},
}};

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

Matrix2 multiply(const Matrix2 &a, const Matrix2 &b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Matrix2 rz(double theta) {
    const Complex i{0.0, 1.0};
    return {std::exp(-i * theta / 2.0), 0.0, 0.0, std::exp(i * theta / 2.0)};
}

Matrix2 ry(double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    return {c, -s, s, c};
}

void check_word(std::string_view word, std::size_t num_qubits) {
    if (word.size() != num_qubits) {
        throw SizeError("Pauli word '" + std::string(word) + "' has length " +
                        std::to_string(word.size()) + ", expected " +
                        std::to_string(num_qubits));
    }
    for (char c : word) {
        if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
            throw ConfigError("invalid Pauli letter '" + std::string(1, c) + "' in '" +
                              std::string(word) + "'");
        }
    }
}

} // namespace

std::string_view to_string(GateKind kind) {
    for (const auto &[k, name] : kGateNames) {
        if (k == kind) return name;
    }
    return "?";
}

GateKind gate_kind_from_string(std::string_view name) {
    for (const auto &[k, n] : kGateNames) {
        if (n == name) return k;
    }
    throw ConfigError("unknown gate kind '" + std::string(name) + "'");
}

std::size_t param_count(GateKind kind) {
    switch (kind) {
    case GateKind::Rot:
    case GateKind::U3:
        return 3;
    case GateKind::RZ:
    case GateKind::RY:
        return 1;
    default:
        return 0;
    }
}

std::size_t wire_count(GateKind kind) {
    switch (kind) {
    case GateKind::CNOT:
        return 2;
    case GateKind::Placeholder:
        return 0;
    default:
        return 1;
    }
}

std::string_view to_string(InitialState s) { return s == InitialState::zeros ? "zeros" : "plus"; }

InitialState initial_state_from_string(std::string_view name) {
    if (name == "zeros") return InitialState::zeros;
    if (name == "plus") return InitialState::plus;
    throw ConfigError("unknown initial state '" + std::string(name) + "' (zeros|plus)");
}

Matrix2 single_qubit_matrix(GateKind kind, std::span<const double> p) {
    if (p.size() != param_count(kind)) {
        throw ParameterError(std::string(to_string(kind)) + " takes " +
                             std::to_string(param_count(kind)) + " parameters, got " +
                             std::to_string(p.size()));
    }
    const double r = std::numbers::sqrt2 / 2.0;
    switch (kind) {
    case GateKind::H:
        return {r, r, r, -r};
    case GateKind::RZ:
        return rz(p[0]);
    case GateKind::RY:
        return ry(p[0]);
    case GateKind::Rot:
        // RZ(omega) RY(theta) RZ(phi)
        return multiply(rz(p[2]), multiply(ry(p[1]), rz(p[0])));
    case GateKind::U3: {
        const Complex i{0.0, 1.0};
        const double c = std::cos(p[0] / 2.0);
        const double s = std::sin(p[0] / 2.0);
        return {c, -std::exp(i * p[2]) * s, std::exp(i * p[1]) * s,
                std::exp(i * (p[1] + p[2])) * c};
    }
    case GateKind::Placeholder:
        return {1.0, 0.0, 0.0, 1.0};
    case GateKind::CNOT:
        break;
    }
    throw WiringError("CNOT is not a single-qubit gate");
}

StateVector::StateVector(std::size_t num_qubits)
    : num_qubits_(num_qubits), amps_(std::size_t{1} << num_qubits, Complex{0.0, 0.0}) {
    if (num_qubits == 0 || num_qubits > kMaxQubits) {
        throw SizeError("qubit count " + std::to_string(num_qubits) + " outside [1, " +
                        std::to_string(kMaxQubits) + "]");
    }
    amps_[0] = 1.0;
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
    if (!is_power_of_two(amplitudes.size()) || amplitudes.size() < 2) {
        throw SizeError("amplitude count " + std::to_string(amplitudes.size()) +
                        " is not a power of two >= 2");
    }
    StateVector s(static_cast<std::size_t>(std::countr_zero(amplitudes.size())));
    s.amps_ = std::move(amplitudes);
    return s;
}

double StateVector::norm_squared() const noexcept {
    double acc = 0.0;
    for (const auto &a : amps_) acc += std::norm(a);
    return acc;
}

void StateVector::apply_single(std::size_t wire, const Matrix2 &m) {
    const std::size_t bit = mask(wire);
    const std::size_t dim = amps_.size();
    for (std::size_t base = 0; base < dim; base += 2 * bit) {
        for (std::size_t off = 0; off < bit; ++off) {
            const std::size_t i0 = base + off;
            const std::size_t i1 = i0 | bit;
            const Complex a0 = amps_[i0];
            const Complex a1 = amps_[i1];
            amps_[i0] = m[0] * a0 + m[1] * a1;
            amps_[i1] = m[2] * a0 + m[3] * a1;
        }
    }
}

void StateVector::apply_cnot(std::size_t control, std::size_t target) {
    const std::size_t cbit = mask(control);
    const std::size_t tbit = mask(target);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if ((i & cbit) && !(i & tbit)) std::swap(amps_[i], amps_[i | tbit]);
    }
}

void StateVector::apply_pauli(std::string_view word) {
    check_word(word, num_qubits_);
    for (std::size_t q = 0; q < num_qubits_; ++q) {
        switch (word[q]) {
        case 'X':
            apply_single(q, {0.0, 1.0, 1.0, 0.0});
            break;
        case 'Y':
            apply_single(q, {0.0, Complex{0.0, -1.0}, Complex{0.0, 1.0}, 0.0});
            break;
        case 'Z':
            apply_single(q, {1.0, 0.0, 0.0, -1.0});
            break;
        default:
            break;
        }
    }
}

void validate_gate(const GateOp &gate, std::size_t num_qubits) {
    if (gate.wires.size() != wire_count(gate.kind)) {
        throw WiringError(std::string(to_string(gate.kind)) + " expects " +
                          std::to_string(wire_count(gate.kind)) + " wires, got " +
                          std::to_string(gate.wires.size()));
    }
    for (std::size_t w : gate.wires) {
        if (w >= num_qubits) {
            throw WiringError("wire " + std::to_string(w) + " out of range for " +
                              std::to_string(num_qubits) + " qubits");
        }
    }
    if (gate.wires.size() == 2 && gate.wires[0] == gate.wires[1]) {
        throw WiringError("CNOT control and target coincide on wire " +
                          std::to_string(gate.wires[0]));
    }
    if (gate.params.size() != param_count(gate.kind)) {
        throw ParameterError(std::string(to_string(gate.kind)) + " takes " +
                             std::to_string(param_count(gate.kind)) + " parameters, got " +
                             std::to_string(gate.params.size()));
    }
}

void StateVector::apply(const GateOp &gate) {
    validate_gate(gate, num_qubits_);
    switch (gate.kind) {
    case GateKind::Placeholder:
        return;
    case GateKind::CNOT:
        apply_cnot(gate.wires[0], gate.wires[1]);
        return;
    default:
        apply_single(gate.wires[0], single_qubit_matrix(gate.kind, gate.params));
    }
}

StateVector init_state(std::size_t num_qubits, InitialState kind) {
    StateVector s(num_qubits);
    if (kind == InitialState::plus) {
        const double a = 1.0 / std::sqrt(static_cast<double>(s.dimension()));
        std::ranges::fill(s.amplitudes(), Complex{a, 0.0});
    }
    return s;
}

StateVector apply_gate(StateVector state, const GateOp &gate) {
    state.apply(gate);
    return state;
}

void apply_circuit(StateVector &state, std::span<const GateOp> gates) {
    for (const auto &g : gates) state.apply(g);
}

Complex inner_product(const StateVector &a, const StateVector &b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw SizeError("inner product of " + std::to_string(a.num_qubits()) + "- and " +
                        std::to_string(b.num_qubits()) + "-qubit states");
    }
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.dimension(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double fidelity(const StateVector &a, const StateVector &b) {
    return std::norm(inner_product(a, b));
}

PauliSum::PauliSum(std::size_t num_qubits, std::vector<PauliTerm> terms)
    : num_qubits_(num_qubits) {
    if (num_qubits == 0 || num_qubits > kMaxQubits) {
        throw SizeError("observable qubit count " + std::to_string(num_qubits) +
                        " outside [1, " + std::to_string(kMaxQubits) + "]");
    }
    terms_.reserve(terms.size());
    for (auto &t : terms) add(t.coeff, std::move(t.pauli));
}

void PauliSum::add(double coeff, std::string pauli) {
    if (!std::isfinite(coeff)) throw NumericError("non-finite Pauli coefficient");
    check_word(pauli, num_qubits_);
    terms_.push_back({coeff, std::move(pauli)});
}

bool PauliSum::is_diagonal() const noexcept {
    return std::ranges::all_of(terms_, [](const PauliTerm &t) {
        return t.pauli.find_first_of("XY") == std::string::npos;
    });
}

Complex pauli_expectation(const StateVector &state, std::string_view word) {
    check_word(word, state.num_qubits());
    std::size_t flip = 0;
    std::size_t sign = 0;
    int num_y = 0;
    for (std::size_t q = 0; q < word.size(); ++q) {
        const std::size_t b = state.mask(q);
        if (word[q] == 'X' || word[q] == 'Y') flip |= b;
        if (word[q] == 'Y' || word[q] == 'Z') sign |= b;
        if (word[q] == 'Y') ++num_y;
    }
    // P|j> = i^{#Y} (-1)^{popcount(j & sign)} |j ^ flip>
    Complex acc{0.0, 0.0};
    const auto amps = state.amplitudes();
    for (std::size_t j = 0; j < amps.size(); ++j) {
        const Complex term = std::conj(amps[j ^ flip]) * amps[j];
        acc += (std::popcount(j & sign) & 1) ? -term : term;
    }
    static constexpr std::array<Complex, 4> kIPow{Complex{1, 0}, Complex{0, 1}, Complex{-1, 0},
                                                 Complex{0, -1}};
    return acc * kIPow[num_y % 4];
}

double expectation(const StateVector &state, const PauliSum &obs) {
    if (obs.num_qubits() != state.num_qubits()) {
        throw SizeError("observable on " + std::to_string(obs.num_qubits()) +
                        " qubits applied to a " + std::to_string(state.num_qubits()) +
                        "-qubit state");
    }
    Complex acc{0.0, 0.0};
    double mass = 0.0;
    for (const auto &t : obs.terms()) {
        acc += t.coeff * pauli_expectation(state, t.pauli);
        mass += std::abs(t.coeff);
    }
    if (std::abs(acc.imag()) > 1e-10 * std::max(1.0, mass)) {
        throw NumericError("expectation has imaginary residue " + std::to_string(acc.imag()));
    }
    return acc.real();
}

PauliSum pauli_sum_from_json(const nlohmann::json &j) {
    try {
        const auto n = j.at("num_qubits").get<std::size_t>();
        std::vector<PauliTerm> terms;
        for (const auto &t : j.at("terms")) {
            terms.push_back({t.at("coeff").get<double>(), t.at("pauli").get<std::string>()});
        }
        return PauliSum(n, std::move(terms));
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("malformed Pauli-sum JSON: ") + e.what());
    }
}

nlohmann::json to_json(const PauliSum &obs) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &t : obs.terms()) terms.push_back({{"coeff", t.coeff}, {"pauli", t.pauli}});
    return {{"num_qubits", obs.num_qubits()}, {"terms", std::move(terms)}};
}

PauliSum load_pauli_sum(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open Hamiltonian file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return pauli_sum_from_json(j);
}

std::string bitstring(std::size_t index, std::size_t num_qubits) {
    std::string s(num_qubits, '0');
    for (std::size_t q = 0; q < num_qubits; ++q) {
        if (index & (std::size_t{1} << (num_qubits - 1 - q))) s[q] = '1';
    }
    return s;
}

std::vector<std::pair<std::string, std::uint64_t>> SampleHistogram::top(std::size_t k) const {
    std::vector<std::pair<std::string, std::uint64_t>> v(counts.begin(), counts.end());
    std::ranges::stable_sort(v, [](const auto &a, const auto &b) { return a.second > b.second; });
    if (v.size() > k) v.resize(k);
    return v;
}

SampleHistogram sample(const StateVector &state, std::uint64_t shots, std::uint64_t seed) {
    if (shots == 0) throw SizeError("shots must be >= 1");
    const auto amps = state.amplitudes();
    std::vector<double> cdf(amps.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        acc += std::norm(amps[i]);
        cdf[i] = acc;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, acc);
    std::vector<std::uint64_t> bins(amps.size(), 0);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = uni(rng);
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        // upper_bound never lands on a zero-probability bin
        if (it == cdf.end()) --it;
        ++bins[static_cast<std::size_t>(it - cdf.begin())];
    }
    SampleHistogram h;
    h.shots = shots;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (bins[i]) h.counts.emplace(bitstring(i, state.num_qubits()), bins[i]);
    }
    return h;
}

} // namespace qas
