#include "qas/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "qas/errors.hpp"

namespace qas {

namespace {

using DenseMatrix = Eigen::MatrixXcd;

struct WordMasks {
    std::size_t flip = 0;
    std::size_t sign = 0;
    Complex phase{1.0, 0.0};
};

WordMasks masks_of(const std::string &word) {
    const std::size_t n = word.size();
    WordMasks m;
    int num_y = 0;
    for (std::size_t q = 0; q < n; ++q) {
        const std::size_t b = std::size_t{1} << (n - 1 - q);
        if (word[q] == 'X' || word[q] == 'Y') m.flip |= b;
        if (word[q] == 'Y' || word[q] == 'Z') m.sign |= b;
        if (word[q] == 'Y') ++num_y;
    }
    const Complex i{0.0, 1.0};
    m.phase = std::pow(i, num_y);
    return m;
}

void add_word(DenseMatrix &m, double coeff, const std::string &word) {
    const auto w = masks_of(word);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const double s = (std::popcount(ju & w.sign) & 1) ? -1.0 : 1.0;
        m(static_cast<Eigen::Index>(ju ^ w.flip), j) += coeff * s * w.phase;
    }
}

DenseMatrix dense_matrix(std::size_t n, const std::vector<PauliTerm> &terms) {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
    DenseMatrix m = DenseMatrix::Zero(dim, dim);
    for (const auto &t : terms) add_word(m, t.coeff, t.pauli);
    return m;
}

Eigen::VectorXcd solve_vqls(const VqlsPayload &payload) {
    if (payload.num_qubits == 0 || payload.num_qubits > kDenseOracleQubits) {
        throw SizeError("linear-solve oracle limited to " + std::to_string(kDenseOracleQubits) +
                        " qubits");
    }
    const DenseMatrix a = dense_matrix(payload.num_qubits, payload.a_terms);
    const Eigen::Index dim = a.rows();
    const Eigen::VectorXcd b =
        Eigen::VectorXcd::Constant(dim, Complex{1.0 / std::sqrt(static_cast<double>(dim)), 0.0});
    Eigen::FullPivLU<DenseMatrix> lu(a);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw DegenerateError("VQLS matrix A is singular");
    Eigen::VectorXcd x = lu.solve(b);
    const double norm = x.norm();
    if (!(norm > 0.0)) throw DegenerateError("VQLS solution vanished");
    return x / norm;
}

} // namespace

double cut_value(const Graph &graph, const std::string &partition) {
    if (partition.size() != graph.vertices) throw SizeError("partition length mismatch");
    double v = 0.0;
    for (const auto &e : graph.edges) {
        if (partition[e.u] != partition[e.v]) v += e.weight;
    }
    return v;
}

MaxCutSolution oracle_maxcut(const Graph &graph) {
    validate_graph(graph);
    if (graph.vertices > kMaxCutOracleVertices) {
        throw SizeError("max-cut oracle limited to " + std::to_string(kMaxCutOracleVertices) +
                        " vertices");
    }
    const std::size_t n = graph.vertices;
    MaxCutSolution best;
    best.value = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> winners;
    for (std::size_t z = 0; z < (std::size_t{1} << n); ++z) {
        double v = 0.0;
        for (const auto &e : graph.edges) {
            const bool su = (z >> (n - 1 - e.u)) & 1U;
            const bool sv = (z >> (n - 1 - e.v)) & 1U;
            if (su != sv) v += e.weight;
        }
        if (v > best.value + 1e-12) {
            best.value = v;
            winners.clear();
        }
        if (std::abs(v - best.value) <= 1e-12) winners.push_back(z);
    }
    for (std::size_t z : winners) best.argmax.push_back(bitstring(z, n));
    std::ranges::sort(best.argmax);
    return best;
}

double oracle_ground_energy(const PauliSum &obs) {
    const std::size_t n = obs.num_qubits();
    if (n == 0 || n > kDenseOracleQubits) {
        throw SizeError("ground-energy oracle limited to " + std::to_string(kDenseOracleQubits) +
                        " qubits");
    }
    if (obs.is_diagonal()) {
        const std::size_t dim = std::size_t{1} << n;
        std::vector<double> diag(dim, 0.0);
        for (const auto &t : obs.terms()) {
            const auto w = masks_of(t.pauli);
            for (std::size_t j = 0; j < dim; ++j)
                diag[j] += (std::popcount(j & w.sign) & 1) ? -t.coeff : t.coeff;
        }
        return *std::ranges::min_element(diag);
    }
    const DenseMatrix h = dense_matrix(n, obs.terms());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("eigen-solver did not converge");
    return solver.eigenvalues().minCoeff();
}

std::vector<double> oracle_linear_solve(const VqlsPayload &payload) {
    const Eigen::VectorXcd x = solve_vqls(payload);
    std::vector<double> probs(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) probs[static_cast<std::size_t>(i)] = std::norm(x(i));
    return probs;
}

StateVector oracle_linear_solution_state(const VqlsPayload &payload) {
    const Eigen::VectorXcd x = solve_vqls(payload);
    return StateVector::from_amplitudes(std::vector<Complex>(x.data(), x.data() + x.size()));
}

} // namespace qas
