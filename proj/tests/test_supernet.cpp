#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qas/errors.hpp"
#include "qas/gradient.hpp"
#include "qas/oracles.hpp"
#include "qas/supernet.hpp"
#include "reference.hpp"
#include "suites.hpp"

using namespace qas;

namespace {

OperationPool rot_line(std::size_t n) {
    return build_pool(n, {GateKind::Rot}, {TopologyKind::line, {}}, true);
}

TaskSpec z_task() { return TaskSpec::vqe(PauliSum(1, {{1.0, "Z"}})); }

OptimizerConfig sgd(double lr, std::size_t steps) {
    OptimizerConfig c;
    c.method = OptimizerMethod::sgd;
    c.learning_rate = lr;
    c.steps = steps;
    return c;
}

} // namespace

TEST_CASE("init_params") {
    const auto z = init_params(4, 16, 3, {InitScheme::zeros, 0.1}, 1);
    CHECK(z.size() == 192);
    for (double v : z.values()) CHECK(v == 0.0);

    const InitSpec wide{InitScheme::uniform, std::numbers::pi};
    CHECK(init_params(3, 5, 3, wide, 7) == init_params(3, 5, 3, wide, 7));
    CHECK_FALSE(init_params(3, 5, 3, wide, 7) == init_params(3, 5, 3, wide, 8));
    for (double v : init_params(6, 11, 3, wide, 2).values()) {
        CHECK(v > -std::numbers::pi);
        CHECK(v < std::numbers::pi);
    }
    CHECK_THROWS_AS((void)init_params(0, 4, 3, {}, 0), SizeError);
    CHECK_THROWS_AS((void)init_params(4, 0, 3, {}, 0), SizeError);
}

TEST_CASE("parameter slices are shared by layer and entry") {
    const auto pool = rot_line(3);
    const auto params = init_params(4, pool.size(), 3, {InitScheme::uniform, 1.0}, 3);
    const CircuitLayout a{0, 1, 2, 1};
    const CircuitLayout b{0, 1, 1, 0};
    CHECK(param_slice(params, pool, a, 0) == param_slice(params, pool, b, 0));
    CHECK(param_slice(params, pool, a, 1) == param_slice(params, pool, b, 1));
    CHECK(param_slice(params, pool, a, 3) != param_slice(params, pool, a, 1));
    const auto s3 = param_slice(params, pool, a, 3);
    CHECK(s3 == std::vector<double>{params.at(3, 1, 0), params.at(3, 1, 1), params.at(3, 1, 2)});
    const CircuitLayout ph{*pool.placeholder_index()};
    CHECK(param_slice(params, pool, ph, 0).empty());
    CHECK_THROWS((void)param_slice(params, pool, a, 4));
}

TEST_CASE("run_circuit identities") {
    const auto pool = rot_line(2);
    const auto params = init_params(3, pool.size(), 3, {InitScheme::uniform, 1.0}, 3);
    std::mt19937_64 rng(1);
    const auto init = ref::from_vec(ref::random_state(rng, 2));
    const std::size_t ph = *pool.placeholder_index();
    const auto out = run_circuit(pool, {ph, ph, ph}, params, init);
    CHECK(ref::max_abs_diff(ref::to_vec(out), ref::to_vec(init)) == 0.0);
    const auto empty = run_circuit(pool, {}, params, init);
    CHECK(ref::max_abs_diff(ref::to_vec(empty), ref::to_vec(init)) == 0.0);

    CHECK_THROWS_AS((void)run_circuit(pool, {0}, SharedParameters(3, pool.size() + 1, 3), init),
                    ParameterError);
}

TEST_CASE("gradient examples") {
    const OperationPool pool(1, {GateOp{GateKind::Rot, {0}, {}}, GateOp{GateKind::Placeholder, {}, {}}});
    SharedParameters params(2, 2, 3);
    params.at(0, 0, 1) = std::numbers::pi / 2;
    const auto g = loss_gradient(z_task(), pool, {0, 1}, params);
    CHECK(g.at(0, 0, 1) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(g.at(0, 0, 0)) < 1e-12);

    const auto zero = loss_gradient(z_task(), pool, {1, 1}, params);
    for (double v : zero.values()) CHECK(v == 0.0);
}

TEST_CASE("parameter-shift matches finite differences") {
    const auto r = suites::gradient_vs_finite_differences(31, 100);
    INFO(r.detail);
    CHECK(r.pass);
}

TEST_CASE("averaged gradient is the elementwise mean") {
    const TaskSpec task = TaskSpec::maxcut(ref::weighted_five());
    const auto pool = build_pool(5, {GateKind::Rot}, {TopologyKind::all_to_all, {}}, true);
    const HardLimits limits{{{GateKind::CNOT, 5}}, 6};
    const auto params = init_params(6, pool.size(), 3, {InitScheme::uniform, 1.0}, 5);
    std::mt19937_64 rng(2);
    std::vector<CircuitLayout> batch;
    for (int i = 0; i < 5; ++i) batch.push_back(random_layout(pool, limits, rng));
    const auto avg = averaged_gradient(task, pool, batch, params);
    SharedParameters sum(6, pool.size(), 3);
    for (const auto &l : batch) {
        const auto g = loss_gradient(task, pool, l, params);
        for (std::size_t i = 0; i < sum.size(); ++i) sum.values()[i] += g.values()[i];
    }
    for (std::size_t i = 0; i < sum.size(); ++i)
        CHECK(avg.values()[i] == doctest::Approx(sum.values()[i] / 5).epsilon(1e-13));
}

TEST_CASE("warmup") {
    const TaskSpec task = TaskSpec::maxcut(ref::weighted_five());
    const auto pool = build_pool(5, {GateKind::Rot}, {TopologyKind::ring, {}}, true);
    const HardLimits limits{{{GateKind::CNOT, 3}}, 5};
    const auto start = init_params(5, pool.size(), 3, {InitScheme::uniform, 1.0}, 8);
    const LayoutSampler sampler = [&](std::mt19937_64 &g) { return random_layout(pool, limits, g); };

    // lr must be positive; 1e-300 is below the spacing of every entry
    CHECK(warmup(task, pool, sampler, start, sgd(1e-300, 5)) == start);
    CHECK_THROWS_AS(validate(sgd(0.0, 1)), ConfigError);

    // one noiseless sgd step: params - lr * mean gradient of the drawn batch
    std::vector<CircuitLayout> drawn;
    const LayoutSampler recording = [&](std::mt19937_64 &g) {
        drawn.push_back(random_layout(pool, limits, g));
        return drawn.back();
    };
    OptimizerConfig one = sgd(0.1, 1);
    one.batch_size = 4;
    const auto stepped = warmup(task, pool, recording, start, one);
    REQUIRE(drawn.size() == 4);
    const auto avg = averaged_gradient(task, pool, drawn, start);
    for (std::size_t i = 0; i < start.size(); ++i)
        CHECK(stepped.values()[i] == doctest::Approx(start.values()[i] - 0.1 * avg.values()[i]).epsilon(1e-15));

    OptimizerConfig noisy = one;
    noisy.gradient_noise_sigma = 0.05;
    noisy.steps = 3;
    CHECK(warmup(task, pool, sampler, start, noisy) == warmup(task, pool, sampler, start, noisy));
}

TEST_CASE("finetune") {
    const TaskSpec task = TaskSpec::maxcut(ref::weighted_five());
    const auto pool = build_pool(5, {GateKind::Rot}, {TopologyKind::all_to_all, {}}, true);
    const auto start = init_params(6, pool.size(), 3, {InitScheme::uniform, 1.0}, 4);
    const CircuitLayout layout{0, 1, 2, 3, 4, *pool.find(GateKind::CNOT, {0, 1})};

    OptimizerConfig none;
    none.steps = 0;
    const auto r0 = finetune(task, pool, layout, start, none);
    CHECK(r0.loss_trace.size() == 1);
    CHECK(r0.loss_trace[0] == evaluate(task, pool, layout, start).loss);
    CHECK(r0.params == start);

    OptimizerConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.steps = 150;
    const auto r = finetune(task, pool, layout, start, cfg);
    CHECK(r.loss_trace.size() == 151);
    for (std::size_t i = 0; i < start.layers(); ++i)
        for (std::size_t k = 0; k < pool.size(); ++k)
            if (k != layout[i])
                for (std::size_t j = 0; j < 3; ++j) CHECK(r.params.at(i, k, j) == start.at(i, k, j));
    CHECK(r.loss_trace.back() <= -17.5);
    CHECK(finetune(task, pool, layout, start, cfg).params == r.params);
}

TEST_CASE("finetune on the one-parameter toy") {
    const OperationPool pool(1, {GateOp{GateKind::RY, {0}, {}}});
    SharedParameters start(1, 1, 1);
    start.at(0, 0, 0) = 0.3;
    for (double lr : {0.1, 0.05, 0.01}) {
        INFO("lr " << lr);
        const auto trace = finetune(z_task(), pool, {0}, start, sgd(lr, 300)).loss_trace;
        bool monotone = true;
        for (std::size_t i = 5; i + 1 < trace.size(); ++i) monotone &= trace[i + 1] <= trace[i] + 1e-15;
        CHECK(monotone);

        // Adam overshoots through momentum, so only convergence is asserted
        OptimizerConfig adam;
        adam.learning_rate = lr;
        adam.steps = 1000;
        CHECK(finetune(z_task(), pool, {0}, start, adam).loss_trace.back() <= -0.999);
    }
}

TEST_CASE("H2 fixture with a double-excitation layout reaches the ground energy") {
    const PauliSum h = load_pauli_sum(QAS_SOURCE_DIR "/data/h2_sto3g.json");
    const double e0 = ref::min_eigenvalue(ref::observable(h));
    const TaskSpec task = TaskSpec::vqe(h);
    const auto pool = rot_line(4);
    const CircuitLayout layout{*pool.find(GateKind::Rot, {0}), *pool.find(GateKind::CNOT, {0, 1}),
                               *pool.find(GateKind::Rot, {2}), *pool.find(GateKind::CNOT, {1, 2}),
                               *pool.find(GateKind::CNOT, {2, 3})};
    OptimizerConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.steps = 300;
    const auto start = init_params(5, pool.size(), 3, {InitScheme::uniform, 0.1}, 0);
    const auto r = finetune(task, pool, layout, start, cfg);
    CHECK(std::abs(r.loss_trace.back() - e0) <= 2e-3);
    CHECK(r.loss_trace.back() >= e0 - 1e-9);
}
