#include "qas/params.hpp"

#include <cmath>
#include <random>
#include <string>

#include "qas/errors.hpp"

namespace qas {

SharedParameters::SharedParameters(std::size_t layers, std::size_t pool_size,
                                   std::size_t max_params)
    : layers_(layers), pool_size_(pool_size), max_params_(max_params),
      values_(layers * pool_size * max_params, 0.0) {}

double &SharedParameters::at(std::size_t layer, std::size_t op, std::size_t j) {
    if (layer >= layers_ || op >= pool_size_ || j >= max_params_) {
        throw BoundsError("parameter index (" + std::to_string(layer) + ", " +
                          std::to_string(op) + ", " + std::to_string(j) + ") out of range");
    }
    return values_[(layer * pool_size_ + op) * max_params_ + j];
}

double SharedParameters::at(std::size_t layer, std::size_t op, std::size_t j) const {
    return const_cast<SharedParameters *>(this)->at(layer, op, j);
}

std::span<double> SharedParameters::slot(std::size_t layer, std::size_t op) {
    if (layer >= layers_ || op >= pool_size_) {
        throw BoundsError("parameter slot (" + std::to_string(layer) + ", " +
                          std::to_string(op) + ") out of range");
    }
    return std::span<double>(values_).subspan((layer * pool_size_ + op) * max_params_,
                                              max_params_);
}

std::span<const double> SharedParameters::slot(std::size_t layer, std::size_t op) const {
    return const_cast<SharedParameters *>(this)->slot(layer, op);
}

SharedParameters init_params(std::size_t layers, std::size_t pool_size, std::size_t max_params,
                             const InitSpec &spec, std::uint64_t seed) {
    if (layers == 0 || pool_size == 0) {
        throw SizeError("parameter tensor needs at least one layer and one pool entry");
    }
    SharedParameters p(layers, pool_size, max_params);
    if (spec.scheme == InitScheme::uniform) {
        if (!(spec.half_width > 0.0) || !std::isfinite(spec.half_width)) {
            throw ConfigError("uniform init half-width must be positive");
        }
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-spec.half_width, spec.half_width);
        for (double &v : p.values()) {
            do {
                v = dist(rng);
            } while (v == -spec.half_width);
        }
    }
    return p;
}

void check_shape(const SharedParameters &params, const OperationPool &pool) {
    if (params.pool_size() != pool.size() || params.max_params() < pool.max_params()) {
        throw ParameterError("parameter tensor shape (" + std::to_string(params.layers()) + ", " +
                             std::to_string(params.pool_size()) + ", " +
                             std::to_string(params.max_params()) + ") does not fit a pool of " +
                             std::to_string(pool.size()) + " entries with up to " +
                             std::to_string(pool.max_params()) + " parameters");
    }
}

std::vector<double> param_slice(const SharedParameters &params, const OperationPool &pool,
                                const CircuitLayout &layout, std::size_t layer) {
    if (layer >= layout.size()) {
        throw BoundsError("layer " + std::to_string(layer) + " beyond layout of length " +
                          std::to_string(layout.size()));
    }
    const std::size_t op = layout[layer];
    if (op >= pool.size()) throw BoundsError("pool index " + std::to_string(op) + " out of range");
    const auto slot = params.slot(layer, op);
    const std::size_t n = param_count(pool[op].kind);
    return {slot.begin(), slot.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<GateOp> bind_layout(const OperationPool &pool, const CircuitLayout &layout,
                                const SharedParameters &params) {
    if (!layout.empty()) check_shape(params, pool);
    if (layout.size() > params.layers() && !layout.empty()) {
        throw ParameterError("layout has " + std::to_string(layout.size()) +
                             " layers but the parameter tensor only " +
                             std::to_string(params.layers()));
    }
    std::vector<GateOp> gates;
    gates.reserve(layout.size());
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (layout[i] >= pool.size()) {
            throw ParameterError("layout entry " + std::to_string(layout[i]) +
                                 " outside pool of size " + std::to_string(pool.size()));
        }
        GateOp g = pool[layout[i]];
        g.params = param_slice(params, pool, layout, i);
        gates.push_back(std::move(g));
    }
    return gates;
}

StateVector run_circuit(const OperationPool &pool, const CircuitLayout &layout,
                        const SharedParameters &params, StateVector init) {
    if (init.num_qubits() != pool.num_qubits()) {
        throw SizeError("initial state has " + std::to_string(init.num_qubits()) +
                        " qubits, pool acts on " + std::to_string(pool.num_qubits()));
    }
    const auto gates = bind_layout(pool, layout, params);
    apply_circuit(init, gates);
    return init;
}

nlohmann::json to_json(const SharedParameters &params) {
    return {{"shape", {params.layers(), params.pool_size(), params.max_params()}},
            {"values", std::vector<double>(params.values().begin(), params.values().end())}};
}

SharedParameters shared_parameters_from_json(const nlohmann::json &j) {
    try {
        const auto shape = j.at("shape").get<std::vector<std::size_t>>();
        if (shape.size() != 3) throw ConfigError("parameter shape must have three entries");
        SharedParameters p(shape[0], shape[1], shape[2]);
        const auto values = j.at("values").get<std::vector<double>>();
        if (values.size() != p.size()) {
            throw ConfigError("parameter dump has " + std::to_string(values.size()) +
                              " values, shape requires " + std::to_string(p.size()));
        }
        std::ranges::copy(values, p.values().begin());
        return p;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("malformed parameter tensor: ") + e.what());
    }
}

} // namespace qas
