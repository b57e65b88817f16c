#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "qas/params.hpp"
#include "qas/pool.hpp"
#include "qas/tasks.hpp"

namespace qas {

enum class OptimizerMethod { adam, sgd };

[[nodiscard]] std::string_view to_string(OptimizerMethod m);
[[nodiscard]] OptimizerMethod optimizer_method_from_string(std::string_view name);

struct OptimizerConfig {
    OptimizerMethod method = OptimizerMethod::adam;
    double learning_rate = 0.01;
    /// Warm-up steps for search runs, optimisation steps for fine-tuning.
    std::size_t steps = 20;
    double gradient_noise_sigma = 0.0;
    std::size_t batch_size = 8;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Throws ConfigError on non-positive learning rate or batch size.
void validate(const OptimizerConfig &cfg);

/// First-order update rule over a SharedParameters tensor. Adam keeps its
/// moment estimates across calls.
class Optimizer {
  public:
    Optimizer(const OptimizerConfig &cfg, const SharedParameters &shape);

    /// Applies one update. With a mask, entries where mask is false are left
    /// untouched (their moments are not advanced either).
    void step(SharedParameters &params, const SharedParameters &grad,
              std::span<const std::uint8_t> mask = {});

    [[nodiscard]] std::size_t steps_taken() const noexcept { return t_; }

  private:
    OptimizerConfig cfg_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::size_t t_ = 0;
};

using LayoutSampler = std::function<CircuitLayout(std::mt19937_64 &)>;

/// Layer-by-layer uniform choice among allowed_actions; length limits.max_layers.
[[nodiscard]] CircuitLayout random_layout(const OperationPool &pool, const HardLimits &limits,
                                          std::mt19937_64 &rng);

/// Flags the slots (i, layout[i], .) of every layout.
[[nodiscard]] std::vector<std::uint8_t> touched_mask(const SharedParameters &shape,
                                             const OperationPool &pool,
                                             std::span<const CircuitLayout> layouts);

/// Elementwise mean of the per-layout gradients. Layouts are evaluated on up
/// to worker_count() threads and reduced in input order.
[[nodiscard]] SharedParameters averaged_gradient(const TaskSpec &task, const OperationPool &pool,
                                                 std::span<const CircuitLayout> layouts,
                                                 const SharedParameters &params);

/// Threads used for batch gradients: QAS_THREADS if set, else hardware concurrency.
[[nodiscard]] std::size_t worker_count();

/// One update from a batch: averaged gradient plus optional Gaussian noise on
/// the touched slots, then an optimizer step.
void batch_update(const TaskSpec &task, const OperationPool &pool,
                  std::span<const CircuitLayout> batch, SharedParameters &params,
                  Optimizer &optimizer, double noise_sigma, std::mt19937_64 &rng);

/// cfg.steps rounds of: draw cfg.batch_size layouts from `sampler`, average
/// their gradients, add noise, step. Returns the updated tensor.
[[nodiscard]] SharedParameters warmup(const TaskSpec &task, const OperationPool &pool,
                                      const LayoutSampler &sampler, SharedParameters params,
                                      const OptimizerConfig &cfg);

struct FinetuneResult {
    SharedParameters params;
    /// Raw task loss before the first step and after every step.
    std::vector<double> loss_trace;
};

/// Gradient descent on one fixed layout. Only the layout's slots change.
[[nodiscard]] FinetuneResult finetune(const TaskSpec &task, const OperationPool &pool,
                                      const CircuitLayout &layout, SharedParameters params,
                                      const OptimizerConfig &cfg);

} // namespace qas
