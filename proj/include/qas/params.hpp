#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "qas/pool.hpp"
#include "qas/simulator.hpp"

namespace qas {

/// Weight-shared parameter tensor of shape (layers, pool size, max params).
/// Slot (i, k, .) holds the angles used whenever pool entry k sits at layer i,
/// regardless of the rest of the layout. Also used for gradients.
class SharedParameters {
  public:
    SharedParameters() = default;
    /// All-zero tensor. max_params may be 0 for parameter-free pools.
    SharedParameters(std::size_t layers, std::size_t pool_size, std::size_t max_params);

    [[nodiscard]] std::size_t layers() const noexcept { return layers_; }
    [[nodiscard]] std::size_t pool_size() const noexcept { return pool_size_; }
    [[nodiscard]] std::size_t max_params() const noexcept { return max_params_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    [[nodiscard]] double &at(std::size_t layer, std::size_t op, std::size_t j);
    [[nodiscard]] double at(std::size_t layer, std::size_t op, std::size_t j) const;
    [[nodiscard]] std::span<double> slot(std::size_t layer, std::size_t op);
    [[nodiscard]] std::span<const double> slot(std::size_t layer, std::size_t op) const;

    [[nodiscard]] std::span<double> values() noexcept { return values_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    [[nodiscard]] bool same_shape(const SharedParameters &o) const noexcept {
        return layers_ == o.layers_ && pool_size_ == o.pool_size_ && max_params_ == o.max_params_;
    }

    friend bool operator==(const SharedParameters &, const SharedParameters &) = default;

  private:
    std::size_t layers_ = 0;
    std::size_t pool_size_ = 0;
    std::size_t max_params_ = 0;
    std::vector<double> values_;
};

enum class InitScheme { zeros, uniform };

struct InitSpec {
    InitScheme scheme = InitScheme::uniform;
    /// Entries drawn from (-half_width, half_width) for the uniform scheme.
    double half_width = 0.1;
};

/// Throws SizeError unless layers, pool_size >= 1. max_params may be 0.
[[nodiscard]] SharedParameters init_params(std::size_t layers, std::size_t pool_size,
                                           std::size_t max_params, const InitSpec &spec,
                                           std::uint64_t seed);

/// Angles for the gate at `layer` of `layout`: values[layer, layout[layer], 0..n)
/// with n the parameter count of that pool entry.
[[nodiscard]] std::vector<double> param_slice(const SharedParameters &params,
                                              const OperationPool &pool,
                                              const CircuitLayout &layout, std::size_t layer);

/// Throws ParameterError if params cannot serve layouts of this pool.
void check_shape(const SharedParameters &params, const OperationPool &pool);

/// Concrete gate list for a layout with its shared parameters bound.
[[nodiscard]] std::vector<GateOp> bind_layout(const OperationPool &pool,
                                              const CircuitLayout &layout,
                                              const SharedParameters &params);

/// Applies the layout's gates to `init` in layer order.
[[nodiscard]] StateVector run_circuit(const OperationPool &pool, const CircuitLayout &layout,
                                      const SharedParameters &params, StateVector init);

/// {"shape": [p, c, l], "values": [...]} in row-major order.
[[nodiscard]] nlohmann::json to_json(const SharedParameters &params);
[[nodiscard]] SharedParameters shared_parameters_from_json(const nlohmann::json &j);

} // namespace qas
