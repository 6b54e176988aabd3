#include <random>

#include <gtest/gtest.h>

#include "psls/sim.hpp"
#include "test_util.hpp"

using namespace psls;
using namespace psls::testing;

namespace {

PrefixController random_controller(std::mt19937_64& rng, const SwitchedModel& model, const SwitchingLanguage& lang,
                                   int delay, double scale) {
    auto tree = build_prefix_tree(lang, delay);
    std::vector<Matrix> rows;
    for (const auto& nd : tree.nodes()) rows.push_back(random_matrix(rng, model.p(), model.m() * (nd.depth + 1), scale));
    return PrefixController(std::move(tree), model.p(), model.m(), std::move(rows));
}

NoiseSample random_noise(std::mt19937_64& rng, const SwitchedModel& model) {
    const int T = model.horizon();
    return {random_matrix(rng, model.n() * (T + 1), 1), random_matrix(rng, model.m() * (T + 1), 1)};
}

SwitchingLanguage admire_sensor_language() { return uniform(fault_language(10)); }

}  // namespace

TEST(Rng, DeterministicAndStreamSeparated) {
    Rng a(7), b(7), c(7, 1, 0), d(7, 0, 1);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        EXPECT_EQ(x, b.next());
        EXPECT_NE(x, c.next());
        EXPECT_NE(x, d.next());
    }
    Rng u(3);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
}

TEST(Simulate, ZeroNoiseGivesZeroTrace) {
    std::mt19937_64 rng(1);
    const auto model = random_model(rng, 2, 4, 3, 2, 2);
    const auto lang = random_language(rng, 2, 4, 3);
    const auto ctrl = random_controller(rng, model, lang, 0, 0.5);
    const NoiseSample zero{Vector::Zero(15), Vector::Zero(10)};
    const auto tr = simulate(model, lang.signal(0), ctrl, zero);
    EXPECT_EQ(tr.stacked_x().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(tr.stacked_u().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Simulate, ZeroControllerMatchesOpenLoop) {
    std::mt19937_64 rng(2);
    const auto model = random_model(rng, 2, 5, 3, 2, 2);
    const auto lang = random_language(rng, 2, 5, 2);
    const auto ctrl = random_controller(rng, model, lang, 0, 0.0);
    const auto noise = random_noise(rng, model);
    const auto& sigma = lang.signal(1);
    const auto phi = closed_loop_response(model, sigma, BlockLTMatrix(BlockGrid::uniform(5, 2, 2)));
    const auto tr = simulate(model, sigma, ctrl, noise);
    EXPECT_LT((tr.stacked_x() - phi.xx.dense() * noise.w).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Simulate, MatchesResponseMapProduct) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const int T = uniform_int(rng, 1, 5), n = uniform_int(rng, 1, 3), p = uniform_int(rng, 1, 2),
                  m = uniform_int(rng, 1, 2), modes = uniform_int(rng, 1, 3);
        const auto model = random_model(rng, modes, T, n, p, m);
        const auto lang = random_language(rng, modes, T, 4);
        const int delay = uniform_int(rng, 0, 2);
        const auto ctrl = random_controller(rng, model, lang, delay, 0.7);
        for (int s = 0; s < lang.size(); ++s) {
            const auto noise = random_noise(rng, model);
            const auto tr = simulate(model, lang.signal(s), ctrl, noise);
            const auto phi = closed_loop_response(model, lang.signal(s), ctrl.for_signal(s));
            Vector z(noise.w.size() + noise.v.size());
            z << noise.w, noise.v;
            const Vector expect = phi.dense() * z;
            Vector got(expect.size());
            got << tr.stacked_x(), tr.stacked_u();
            EXPECT_LT((got - expect).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, expect.cwiseAbs().maxCoeff()));
        }
    }
}

TEST(Simulate, UnknownPrefixThrows) {
    std::mt19937_64 rng(4);
    const auto model = random_model(rng, 2, 3, 2, 1, 1);
    const SwitchingLanguage lang({SwitchingSignal({1, 1, 1, 1})});
    const auto ctrl = random_controller(rng, model, lang, 0, 0.5);
    const NoiseSample zero{Vector::Zero(8), Vector::Zero(4)};
    EXPECT_THROW(simulate(model, SwitchingSignal({1, 2, 1, 1}), ctrl, zero), UnknownSignalError);
}

TEST(Simulate, StepCostAndNorm) {
    const SwitchedModel model({Mode{Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0)}},
                              2);
    const SwitchingLanguage lang({SwitchingSignal({1, 1, 1})});
    const PrefixController ctrl(build_prefix_tree(lang), 1, 1,
                                {Matrix::Constant(1, 1, -1.0), Matrix::Zero(1, 2), Matrix::Zero(1, 3)});
    const NoiseSample noise{Vector::Constant(3, 1.0), Vector::Zero(3)};
    const auto cost = CostSpec::time_invariant(2, Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 3.0));
    const auto tr = simulate(model, lang.signal(0), ctrl, noise, cost);
    // x0 = 1, u0 = -1, x1 = 2 - 1 + 1 = 2, u1 = 0, x2 = 4 + 1 = 5
    EXPECT_DOUBLE_EQ(tr.x[1](0), 2.0);
    EXPECT_DOUBLE_EQ(tr.x[2](0), 5.0);
    EXPECT_DOUBLE_EQ(tr.cost[0], 1.0 + 3.0);
    EXPECT_DOUBLE_EQ(tr.cost[2], 25.0);
    EXPECT_DOUBLE_EQ(tr.total_cost(), 4.0 + 4.0 + 25.0);
    EXPECT_DOUBLE_EQ(tr.max_state_norm(), 5.0);
}

TEST(Simulate, FaultAtHorizonMatchesNominalBeforeIt) {
    const int T = 6;
    const auto model = admire_model(AdmireFault::Drift, T);
    const auto lang = uniform(fault_language(T, true));
    std::mt19937_64 rng(5);
    const auto ctrl = random_controller(rng, model, lang, 0, 0.3);
    const auto noise = random_noise(rng, model);
    std::vector<int> late(T + 1, 1);
    late[T] = 2;
    const auto a = simulate(model, SwitchingSignal(late), ctrl, noise);
    const auto b = simulate(model, SwitchingSignal(std::vector<int>(T + 1, 1)), ctrl, noise);
    for (int t = 0; t < T; ++t) {
        EXPECT_EQ(a.x[t], b.x[t]);
        EXPECT_EQ(a.u[t], b.u[t]);
    }
}

TEST(SampleNoise, ZeroCovarianceGivesZero) {
    const auto model = admire_model(AdmireFault::Sensor, 4);
    const auto s = sample_noise(NoiseSpec::isotropic(model, 0.0), model, SwitchingSignal({1, 1, 2, 2, 2}), 9);
    EXPECT_EQ(s.w.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(s.v.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SampleNoise, BoundedInteriorAndVertex) {
    const auto model = admire_model(AdmireFault::Sensor, 4);
    const SwitchingSignal sigma({1, 1, 2, 2, 2});
    const auto spec = NoiseSpec::bounded(0.5, 0.25);
    Rng rng(11);
    for (int k = 0; k < 50; ++k) {
        const auto in = sample_noise(spec, model, sigma, rng);
        EXPECT_LE(in.w.cwiseAbs().maxCoeff(), 0.5);
        EXPECT_LE(in.v.cwiseAbs().maxCoeff(), 0.25);
        const auto vx = sample_noise(spec, model, sigma, rng, BoundedSampling::Vertex);
        for (Eigen::Index i = 0; i < vx.w.size(); ++i) EXPECT_EQ(std::abs(vx.w(i)), 0.5);
        for (Eigen::Index i = 0; i < vx.v.size(); ++i) EXPECT_EQ(std::abs(vx.v(i)), 0.25);
    }
}

TEST(SampleNoise, GaussianCovarianceWithinThreeSigma) {
    // Scalar blocks: variances 4 for x0, 0.25 for w, 9 for v.
    const SwitchedModel model({Mode{Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0)}},
                              1);
    const auto spec = NoiseSpec::make_gaussian(
        {ModeCovariance{Matrix::Constant(1, 1, 4.0), Matrix::Constant(1, 1, 0.25), Matrix::Constant(1, 1, 9.0)}});
    const SwitchingSignal sigma({1, 1});
    const int N = 100000;
    Rng rng(12);
    Eigen::Vector4d sum = Eigen::Vector4d::Zero();
    for (int k = 0; k < N; ++k) {
        const auto s = sample_noise(spec, model, sigma, rng);
        sum += Eigen::Vector4d(s.w(0) * s.w(0), s.w(1) * s.w(1), s.v(0) * s.v(0), s.v(1) * s.v(1));
    }
    const Eigen::Vector4d expect(4.0, 0.25, 9.0, 9.0);
    for (int i = 0; i < 4; ++i) {
        // Var(z^2) = 2 s^4 for zero-mean Gaussian z.
        const double se = std::sqrt(2.0 / N) * expect(i);
        EXPECT_NEAR(sum(i) / N, expect(i), 3.0 * se) << i;
    }
}

TEST(SampleNoise, CorrelatedBlocksUseSquareRoot) {
    const SwitchedModel model({Mode{Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2)}}, 0);
    Matrix p(2, 2);
    p << 2.0, 1.2, 1.2, 1.0;
    const auto spec = NoiseSpec::make_gaussian({ModeCovariance{p, p, Matrix::Zero(2, 2)}});
    const int N = 100000;
    Rng rng(13);
    Matrix acc = Matrix::Zero(2, 2);
    for (int k = 0; k < N; ++k) {
        const Vector w = sample_noise(spec, model, SwitchingSignal({1}), rng).w;
        acc += w * w.transpose();
    }
    acc /= N;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double se = std::sqrt((p(i, i) * p(j, j) + p(i, j) * p(i, j)) / N);
            EXPECT_NEAR(acc(i, j), p(i, j), 3.0 * se);
        }
}

TEST(WorstCase, ZeroBoundsGiveZero) {
    std::mt19937_64 rng(14);
    const auto model = random_model(rng, 1, 3, 2, 1, 1);
    const auto phi = closed_loop_response(model, SwitchingSignal({1, 1, 1, 1}), random_lower(rng, 3, 1, 1));
    EXPECT_EQ(worst_case_state_norm(phi, 0.0, 0.0).value, 0.0);
}

TEST(WorstCase, WitnessReplayAndDomination) {
    const auto model = admire_model(AdmireFault::Sensor, 10);
    const auto lang = admire_sensor_language();
    std::mt19937_64 rng(15);
    const auto ctrl = random_controller(rng, model, lang, 0, 0.05);
    const double w_bar = 1.0, v_bar = 0.5;
    const auto spec = NoiseSpec::bounded(w_bar, v_bar);
    for (int s = 0; s < lang.size(); ++s) {
        const auto phi = closed_loop_response(model, lang.signal(s), ctrl.for_signal(s));
        const auto wc = worst_case_state_norm(phi, w_bar, v_bar);
        EXPECT_NEAR(wc.value, induced_inf_norm(scaled_state_map(phi, w_bar, v_bar)), 1e-12);
        const auto tr = simulate(model, lang.signal(s), ctrl, wc.witness);
        const Vector x = tr.stacked_x();
        EXPECT_NEAR(std::abs(x(wc.row)), wc.value, 1e-9 * std::max(1.0, wc.value));
        EXPECT_NEAR(tr.max_state_norm(), wc.value, 1e-9 * std::max(1.0, wc.value));
        if (s == 0) {
            Rng nr(16);
            for (int k = 0; k < 1000; ++k) {
                const auto run = simulate(model, lang.signal(s), ctrl,
                                          sample_noise(spec, model, lang.signal(s), nr,
                                                       k % 2 ? BoundedSampling::Vertex : BoundedSampling::Interior));
                EXPECT_LE(run.max_state_norm(), wc.value + 1e-9);
            }
        }
    }
}

TEST(WorstCase, TiesGoToLowestRow) {
    SystemResponse phi;
    const auto g = BlockGrid::uniform(0, 2, 2);
    phi.xx = BlockLTMatrix(g, Matrix::Identity(2, 2));
    phi.xy = BlockLTMatrix(BlockGrid::uniform(0, 2, 1), Matrix::Zero(2, 1));
    phi.ux = BlockLTMatrix(BlockGrid::uniform(0, 1, 2), Matrix::Zero(1, 2));
    phi.uy = BlockLTMatrix(BlockGrid::uniform(0, 1, 1), Matrix::Zero(1, 1));
    const auto wc = worst_case_state_norm(phi, 1.0, 1.0);
    EXPECT_EQ(wc.row, 0);
    EXPECT_EQ(wc.value, 1.0);
}

TEST(MonteCarlo, SingleRunHasZeroStd) {
    std::mt19937_64 rng(17);
    const auto model = random_model(rng, 2, 3, 2, 1, 1);
    const auto lang = random_language(rng, 2, 3, 3);
    const auto ctrl = random_controller(rng, model, lang, 0, 0.3);
    const auto cost = CostSpec::time_invariant(3, Matrix::Identity(2, 2), Matrix::Identity(1, 1));
    const auto mc = monte_carlo(model, lang, ctrl, NoiseSpec::isotropic(model), cost, 1, 5);
    for (const auto& s : mc.per_signal) {
        for (double v : s.cost.std) EXPECT_EQ(v, 0.0);
        for (double v : s.state_norm.std) EXPECT_EQ(v, 0.0);
        for (std::size_t t = 0; t < s.cost.mean.size(); ++t) EXPECT_EQ(s.cost.mean[t], s.cost.max[t]);
    }
    EXPECT_THROW(monte_carlo(model, lang, ctrl, NoiseSpec::isotropic(model), cost, 0, 5), ConfigError);
}

TEST(MonteCarlo, Deterministic) {
    std::mt19937_64 rng(18);
    const auto model = random_model(rng, 2, 3, 2, 1, 1);
    const auto lang = random_language(rng, 2, 3, 3);
    const auto ctrl = random_controller(rng, model, lang, 0, 0.3);
    const auto cost = CostSpec::time_invariant(3, Matrix::Identity(2, 2), Matrix::Identity(1, 1));
    const auto a = monte_carlo(model, lang, ctrl, NoiseSpec::isotropic(model), cost, 50, 99);
    const auto b = monte_carlo(model, lang, ctrl, NoiseSpec::isotropic(model), cost, 50, 99);
    const auto c = monte_carlo(model, lang, ctrl, NoiseSpec::isotropic(model), cost, 50, 100);
    EXPECT_EQ(a.mean_total_cost, b.mean_total_cost);
    for (int s = 0; s < lang.size(); ++s) {
        EXPECT_EQ(a.per_signal[s].cost.mean, b.per_signal[s].cost.mean);
        EXPECT_EQ(a.per_signal[s].state_norm.std, b.per_signal[s].state_norm.std);
    }
    EXPECT_NE(a.mean_total_cost, c.mean_total_cost);
}

TEST(MonteCarlo, UnbiasedStatistics) {
    std::mt19937_64 rng(19);
    const auto model = random_model(rng, 1, 2, 1, 1, 1);
    const auto lang = random_language(rng, 1, 2, 1);
    const auto ctrl = random_controller(rng, model, lang, 0, 0.3);
    const auto cost = CostSpec::time_invariant(2, Matrix::Identity(1, 1), Matrix::Identity(1, 1));
    const auto noise = NoiseSpec::isotropic(model);
    const int runs = 7;
    const auto mc = monte_carlo(model, lang, ctrl, noise, cost, runs, 3, BoundedSampling::Interior, true);
    ASSERT_EQ(static_cast<int>(mc.traces.size()), runs);
    for (int t = 0; t <= 2; ++t) {
        double mean = 0.0, var = 0.0, mx = -1.0;
        for (const auto& tr : mc.traces) mean += tr.cost[t] / runs;
        for (const auto& tr : mc.traces) {
            var += (tr.cost[t] - mean) * (tr.cost[t] - mean) / (runs - 1);
            mx = std::max(mx, tr.cost[t]);
        }
        EXPECT_NEAR(mc.per_signal[0].cost.mean[t], mean, 1e-12);
        EXPECT_NEAR(mc.per_signal[0].cost.std[t], std::sqrt(var), 1e-12);
        EXPECT_EQ(mc.per_signal[0].cost.max[t], mx);
        EXPECT_NEAR(mc.per_signal[0].cost.max_minus_std[t], mx - std::sqrt(var), 1e-12);
    }
}

TEST(MonteCarlo, MarginalIsProbabilityWeighted) {
    std::mt19937_64 rng(20);
    const auto model = random_model(rng, 2, 2, 1, 1, 1);
    const auto base = random_language(rng, 2, 2, 2);
    const SwitchingLanguage lang(base.signals(), std::vector<double>{0.25, 0.75});
    const auto ctrl = random_controller(rng, model, lang, 0, 0.3);
    const auto cost = CostSpec::time_invariant(2, Matrix::Identity(1, 1), Matrix::Identity(1, 1));
    const auto mc = monte_carlo(model, lang, ctrl, NoiseSpec::isotropic(model), cost, 20, 1);
    for (int t = 0; t <= 2; ++t)
        EXPECT_NEAR(mc.marginal_cost.mean[t],
                    0.25 * mc.per_signal[0].cost.mean[t] + 0.75 * mc.per_signal[1].cost.mean[t], 1e-12);
    EXPECT_NEAR(mc.mean_total_cost, 0.25 * mc.per_signal[0].mean_total_cost + 0.75 * mc.per_signal[1].mean_total_cost,
                1e-12);
}

TEST(MonteCarlo, MeanTotalCostMatchesObjective) {
    // Scalar closed loop with a fixed gain: expected cost equals the Frobenius objective.
    const SwitchedModel model({Mode{Matrix::Constant(1, 1, 1.2), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0)},
                               Mode{Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.7)}},
                              3);
    const auto lang = uniform(fault_language(3));
    const auto spec = NoiseSpec::make_gaussian(
        {ModeCovariance{Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 0.2)},
         ModeCovariance{Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 0.1)}});
    const auto cost = CostSpec::time_invariant(3, Matrix::Identity(1, 1), Matrix::Constant(1, 1, 0.5));
    std::mt19937_64 rng(21);
    const auto ctrl = random_controller(rng, model, lang, 0, 0.6);
    std::vector<SystemResponse> phis;
    for (int s = 0; s < lang.size(); ++s) phis.push_back(closed_loop_response(model, lang.signal(s), ctrl.for_signal(s)));
    const double objective = evaluate_h2_objective(phis, lang, spec, cost);
    const auto mc = monte_carlo(model, lang, ctrl, spec, cost, 100000, 2024);
    EXPECT_NEAR(mc.mean_total_cost, objective, 3.0 * mc.total_cost_std_error);
}
