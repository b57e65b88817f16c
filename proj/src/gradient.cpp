#include "qas/gradient.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qas/errors.hpp"

namespace qas {

SharedParameters loss_gradient(const TaskSpec &task, const OperationPool &pool,
                               const CircuitLayout &layout, const SharedParameters &params) {
    auto gates = bind_layout(pool, layout, params);
    SharedParameters grad(params.layers(), params.pool_size(), params.max_params());

    bool any_param = false;
    for (const auto &g : gates) any_param = any_param || !g.params.empty();
    if (!any_param) return grad;

    const auto base = detail::loss_components(task, gates);
    for (double c : base) {
        if (!std::isfinite(c)) throw NumericError("non-finite loss while differentiating");
    }
    const auto jac = detail::combine_jacobian(task, base);

    constexpr double kShift = std::numbers::pi / 2.0;
    for (std::size_t layer = 0; layer < gates.size(); ++layer) {
        auto &angles = gates[layer].params;
        for (std::size_t j = 0; j < angles.size(); ++j) {
            const double saved = angles[j];
            angles[j] = saved + kShift;
            const auto plus = detail::loss_components(task, gates);
            angles[j] = saved - kShift;
            const auto minus = detail::loss_components(task, gates);
            angles[j] = saved;

            double d = 0.0;
            for (std::size_t k = 0; k < base.size(); ++k) d += jac[k] * (plus[k] - minus[k]) / 2.0;
            if (!std::isfinite(d)) {
                throw NumericError("non-finite derivative at layer " + std::to_string(layer));
            }
            grad.at(layer, layout[layer], j) = d;
        }
    }
    return grad;
}

} // namespace qas
