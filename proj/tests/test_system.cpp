#include <random>

#include <gtest/gtest.h>

#include "psls/system.hpp"
#include "test_util.hpp"

using namespace psls;

TEST(Admire, DriftFaultEntry) {
    const auto model = admire_model(AdmireFault::Drift);
    EXPECT_NEAR(model.mode(2).A(0, 0), -1.1450, 1e-12);
    EXPECT_EQ(model.mode(2).B, model.mode(1).B);
    EXPECT_EQ(model.mode(2).C, Matrix::Identity(3, 3));
    EXPECT_EQ(model.n(), 3);
    EXPECT_EQ(model.p(), 4);
    EXPECT_EQ(model.m(), 3);
    EXPECT_EQ(model.horizon(), 10);
}

TEST(Admire, SensorFaultOutputMatrix) {
    const auto model = admire_model(AdmireFault::Sensor);
    const Vector sums = model.mode(2).C.rowwise().sum();
    EXPECT_EQ(sums, Vector((Vector(3) << 1, 0, 0).finished()));
    EXPECT_EQ(model.mode(2).A, model.mode(1).A);
}

TEST(Admire, NominalInputMatrixEntry) { EXPECT_DOUBLE_EQ(admire_model(AdmireFault::Drift).mode(1).B(1, 0), 1.298); }

TEST(StackDynamics, ConstantSignalIsTimeInvariant) {
    const auto model = admire_model(AdmireFault::Drift, 3);
    const auto st = stack_dynamics(model, SwitchingSignal({1, 1, 1, 1}));
    for (int t = 0; t < 3; ++t) {
        EXPECT_EQ(st.A.block(t), model.mode(1).A);
        EXPECT_EQ(st.B.block(t), model.mode(1).B);
    }
    EXPECT_EQ(st.A.block(3), Matrix::Zero(3, 3));
    EXPECT_EQ(st.B.block(3), Matrix::Zero(3, 4));
    EXPECT_EQ(st.C.block(3), Matrix::Identity(3, 3));
}

TEST(StackDynamics, DriftSignal) {
    const auto model = admire_model(AdmireFault::Drift, 2);
    const auto st = stack_dynamics(model, SwitchingSignal({1, 2, 2}));
    EXPECT_EQ(st.A.block(0), admire_A());
    EXPECT_LT((st.A.block(1) - (admire_A() - 1.5 * Matrix::Identity(3, 3))).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(st.A.block(2), Matrix::Zero(3, 3));
}

TEST(StackDynamics, SharedPrefixGivesEqualTruncations) {
    std::mt19937_64 rng(8);
    std::vector<Mode> modes;
    for (int i = 0; i < 3; ++i)
        modes.push_back({psls::testing::random_matrix(rng, 2, 2), psls::testing::random_matrix(rng, 2, 3),
                         psls::testing::random_matrix(rng, 2, 2)});
    const SwitchedModel model(modes, 4);
    const SwitchingSignal a({1, 3, 2, 2, 1}), b({1, 3, 2, 1, 3});
    const auto sa = stack_dynamics(model, a), sb = stack_dynamics(model, b);
    for (int t = 0; t <= 2; ++t) {
        EXPECT_EQ(truncate(sa.A.as_lower(), t).dense(), truncate(sb.A.as_lower(), t).dense());
        EXPECT_EQ(truncate(sa.B.as_lower(), t).dense(), truncate(sb.B.as_lower(), t).dense());
        EXPECT_EQ(truncate(sa.C.as_lower(), t).dense(), truncate(sb.C.as_lower(), t).dense());
    }
    EXPECT_NE(truncate(sa.C.as_lower(), 3).dense(), truncate(sb.C.as_lower(), 3).dense());
}

TEST(StackNoise, IdentityCovariances) {
    const auto model = admire_model(AdmireFault::Drift, 4);
    const auto cov = stack_noise_covariance(NoiseSpec::isotropic(model), SwitchingSignal({1, 1, 2, 2, 2}));
    EXPECT_EQ(cov.P_w.dense(), Matrix::Identity(15, 15));
    EXPECT_EQ(cov.P_v.dense(), Matrix::Identity(15, 15));
}

TEST(StackNoise, ZeroCovariances) {
    const auto model = admire_model(AdmireFault::Drift, 2);
    const auto cov = stack_noise_covariance(NoiseSpec::isotropic(model, 0.0), SwitchingSignal({2, 2, 2}));
    EXPECT_EQ(cov.P_w.dense(), Matrix::Zero(9, 9));
    EXPECT_EQ(cov.P_v.dense(), Matrix::Zero(9, 9));
}

TEST(StackNoise, ModeDependentBlocks) {
    std::vector<ModeCovariance> per_mode;
    for (int i = 1; i <= 2; ++i)
        per_mode.push_back({i * 1.0 * Matrix::Identity(1, 1), i * 10.0 * Matrix::Identity(1, 1),
                            i * 100.0 * Matrix::Identity(1, 1)});
    const auto spec = NoiseSpec::make_gaussian(per_mode);
    const SwitchingSignal s({2, 1, 2, 1});
    const auto cov = stack_noise_covariance(spec, s);
    EXPECT_EQ(cov.P_w.block(0)(0, 0), 2.0);   // x0 of sigma_0 = 2
    EXPECT_EQ(cov.P_w.block(1)(0, 0), 20.0);  // w_0 of sigma_0 = 2
    EXPECT_EQ(cov.P_w.block(2)(0, 0), 10.0);  // w_1 of sigma_1 = 1
    for (int t = 0; t <= 3; ++t) EXPECT_EQ(cov.P_v.block(t)(0, 0), 100.0 * s[t]);
}

TEST(StackNoise, BoundedSpecRejected) {
    EXPECT_THROW(stack_noise_covariance(NoiseSpec::bounded(1, 1), SwitchingSignal({1})), ConfigError);
}

TEST(Validation, RejectsNonPsdAndBadDims) {
    std::vector<ModeCovariance> bad{{-Matrix::Identity(1, 1), Matrix::Identity(1, 1), Matrix::Identity(1, 1)}};
    EXPECT_THROW(NoiseSpec::make_gaussian(bad), ConfigError);
    EXPECT_THROW(CostSpec::time_invariant(2, Matrix::Identity(2, 2), -Matrix::Identity(1, 1)), ConfigError);
    EXPECT_THROW(SwitchedModel({Mode{Matrix::Identity(2, 2), Matrix::Ones(3, 1), Matrix::Identity(2, 2)}}, 2),
                 ConfigError);
    EXPECT_THROW(NoiseSpec::bounded(-1.0, 0.0), ConfigError);
}
