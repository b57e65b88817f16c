#include "qas/supernet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#include "qas/errors.hpp"
#include "qas/gradient.hpp"

namespace qas {

std::string_view to_string(OptimizerMethod m) { return m == OptimizerMethod::adam ? "adam" : "sgd"; }

OptimizerMethod optimizer_method_from_string(std::string_view name) {
    if (name == "adam") return OptimizerMethod::adam;
    if (name == "sgd") return OptimizerMethod::sgd;
    throw ConfigError("unknown optimizer '" + std::string(name) + "' (adam|sgd)");
}

void validate(const OptimizerConfig &cfg) {
    if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
        throw ConfigError("learning_rate must be a finite positive number");
    }
    if (cfg.batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (!(cfg.gradient_noise_sigma >= 0.0)) {
        throw ConfigError("gradient_noise_sigma must be non-negative");
    }
}

Optimizer::Optimizer(const OptimizerConfig &cfg, const SharedParameters &shape)
    : cfg_(cfg), m_(shape.size(), 0.0), v_(shape.size(), 0.0) {
    validate(cfg_);
}

void Optimizer::step(SharedParameters &params, const SharedParameters &grad,
                     std::span<const std::uint8_t> mask) {
    if (!params.same_shape(grad) || params.size() != m_.size()) {
        throw ParameterError("gradient shape does not match the parameter tensor");
    }
    if (!mask.empty() && mask.size() != params.size()) {
        throw ParameterError("update mask has the wrong size");
    }
    ++t_;
    auto p = params.values();
    const auto g = grad.values();
    const double lr = cfg_.learning_rate;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        if (cfg_.method == OptimizerMethod::sgd) {
            p[i] -= lr * g[i];
            continue;
        }
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g[i];
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        p[i] -= lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + cfg_.epsilon);
    }
}

CircuitLayout random_layout(const OperationPool &pool, const HardLimits &limits,
                            std::mt19937_64 &rng) {
    CircuitLayout layout;
    layout.reserve(limits.max_layers);
    while (layout.size() < limits.max_layers) {
        const auto allowed = allowed_actions(layout, pool, limits);
        if (allowed.empty()) throw DeadEndError("no allowed action while sampling a layout");
        std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
        layout.push_back(allowed[pick(rng)]);
    }
    return layout;
}

std::vector<std::uint8_t> touched_mask(const SharedParameters &shape, const OperationPool &pool,
                                       std::span<const CircuitLayout> layouts) {
    std::vector<std::uint8_t> mask(shape.size(), 0);
    const std::size_t l = shape.max_params();
    for (const auto &layout : layouts) {
        for (std::size_t i = 0; i < layout.size(); ++i) {
            const std::size_t base = (i * shape.pool_size() + layout[i]) * l;
            for (std::size_t j = 0; j < param_count(pool[layout[i]].kind); ++j) mask[base + j] = 1;
        }
    }
    return mask;
}

std::size_t worker_count() {
    if (const char *env = std::getenv("QAS_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

SharedParameters averaged_gradient(const TaskSpec &task, const OperationPool &pool,
                                   std::span<const CircuitLayout> layouts,
                                   const SharedParameters &params) {
    SharedParameters mean(params.layers(), params.pool_size(), params.max_params());
    if (layouts.empty()) return mean;

    std::vector<SharedParameters> grads(layouts.size());
    std::vector<std::exception_ptr> errors(layouts.size());
    auto work = [&](std::size_t i) {
        try {
            grads[i] = loss_gradient(task, pool, layouts[i], params);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const std::size_t workers = std::min(worker_count(), layouts.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < layouts.size(); ++i) work(i);
    } else {
        std::vector<std::jthread> pool_threads;
        for (std::size_t w = 0; w < workers; ++w) {
            pool_threads.emplace_back([&, w] {
                for (std::size_t i = w; i < layouts.size(); i += workers) work(i);
            });
        }
    }
    for (std::size_t i = 0; i < layouts.size(); ++i) {
        if (errors[i]) {
            try {
                std::rethrow_exception(errors[i]);
            } catch (const NumericError &e) {
                std::string where;
                for (std::size_t k : layouts[i]) where += std::to_string(k) + " ";
                throw NumericError(std::string(e.what()) + " (layout: " + where + ")");
            }
        }
    }
    auto acc = mean.values();
    for (const auto &g : grads) {
        const auto gv = g.values();
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += gv[k];
    }
    const double inv = 1.0 / static_cast<double>(layouts.size());
    for (double &v : acc) v *= inv;
    return mean;
}

void batch_update(const TaskSpec &task, const OperationPool &pool,
                  std::span<const CircuitLayout> batch, SharedParameters &params,
                  Optimizer &optimizer, double noise_sigma, std::mt19937_64 &rng) {
    SharedParameters grad = averaged_gradient(task, pool, batch, params);
    if (noise_sigma > 0.0) {
        const auto mask = touched_mask(params, pool, batch);
        std::normal_distribution<double> noise(0.0, noise_sigma);
        auto g = grad.values();
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (mask[k]) g[k] += noise(rng);
        }
    }
    optimizer.step(params, grad);
}

SharedParameters warmup(const TaskSpec &task, const OperationPool &pool,
                        const LayoutSampler &sampler, SharedParameters params,
                        const OptimizerConfig &cfg) {
    validate(cfg);
    check_shape(params, pool);
    Optimizer opt(cfg, params);
    std::mt19937_64 rng(cfg.seed);
    std::vector<CircuitLayout> batch(cfg.batch_size);
    for (std::size_t s = 0; s < cfg.steps; ++s) {
        for (auto &layout : batch) layout = sampler(rng);
        batch_update(task, pool, batch, params, opt, cfg.gradient_noise_sigma, rng);
    }
    return params;
}

FinetuneResult finetune(const TaskSpec &task, const OperationPool &pool,
                        const CircuitLayout &layout, SharedParameters params,
                        const OptimizerConfig &cfg) {
    validate(cfg);
    FinetuneResult out;
    out.loss_trace.reserve(cfg.steps + 1);
    out.loss_trace.push_back(evaluate(task, pool, layout, params).loss);

    if (cfg.steps > 0 && !layout.empty()) {
        check_shape(params, pool);
        Optimizer opt(cfg, params);
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> noise(0.0, cfg.gradient_noise_sigma > 0.0
                                                        ? cfg.gradient_noise_sigma
                                                        : 1.0);
        const std::vector<CircuitLayout> one{layout};
        const auto mask = touched_mask(params, pool, one);

        for (std::size_t s = 0; s < cfg.steps; ++s) {
            SharedParameters grad = loss_gradient(task, pool, layout, params);
            if (cfg.gradient_noise_sigma > 0.0) {
                auto g = grad.values();
                for (std::size_t k = 0; k < g.size(); ++k) {
                    if (mask[k]) g[k] += noise(rng);
                }
            }
            opt.step(params, grad, mask);
            const double loss = evaluate(task, pool, layout, params).loss;
            if (!std::isfinite(loss)) {
                throw NumericError("fine-tune diverged at step " + std::to_string(s + 1));
            }
            out.loss_trace.push_back(loss);
        }
    } else {
        for (std::size_t s = 0; s < cfg.steps; ++s) out.loss_trace.push_back(out.loss_trace.front());
    }
    out.params = std::move(params);
    return out;
}

} // namespace qas
