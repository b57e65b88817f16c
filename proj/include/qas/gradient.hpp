#pragma once

#include "qas/params.hpp"
#include "qas/pool.hpp"
#include "qas/tasks.hpp"

namespace qas {

/// Gradient of the raw task loss with respect to the shared parameters, by the
/// two-term parameter-shift rule (shift pi/2 on every angle independently).
/// The result has the shape of `params` and is zero outside the slots
/// (i, layout[i], .) of parametric layers. Throws NumericError on a
/// non-finite loss or derivative.
[[nodiscard]] SharedParameters loss_gradient(const TaskSpec &task, const OperationPool &pool,
                                             const CircuitLayout &layout,
                                             const SharedParameters &params);

} // namespace qas
