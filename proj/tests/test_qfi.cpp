// Copyright 2026 The qdec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "qdec/qfi.hpp"
#include "test_util.hpp"

namespace qdec {
namespace {

TimeGrid grid(double T, double dt = 1e-3) { return TimeGrid::make(0.0, T, dt); }

TEST(Fidelity, EqualParametersGiveOne) {
    SensorModel m = two_level_model(1.0, 0.0, 1.0);
    EXPECT_NEAR(env_fidelity(m, 0.3, 0.3, grid(10)), 1.0, 1e-8);
    EXPECT_NEAR(global_fidelity(m, 0.3, 0.3, grid(10)), 1.0, 1e-8);
}

TEST(Fidelity, ZeroDurationGivesOne) {
    SensorModel m = two_level_model(1.0, 0.0, 1.0);
    EXPECT_NEAR(env_fidelity(m, 0.0, 2.0, grid(0)), 1.0, 1e-14);
}

TEST(Fidelity, SymmetricBoundedAndOrdered) {
    SensorModel m = two_level_model(1.0, 0.0, 1.0);
    for (double d : {0.05, 0.3, 1.0, -0.7}) {
        FidelityPair a = fidelities(m, 0.0, d, grid(5));
        FidelityPair b = fidelities(m, d, 0.0, grid(5));
        EXPECT_NEAR(a.env, b.env, 1e-10);
        EXPECT_GE(a.env, 0.0);
        EXPECT_LE(a.env, 1.0 + 1e-9);
        EXPECT_LE(a.global, a.env + 1e-9);
        EXPECT_LE(a.eigen_gap, 1e-10);
        EXPECT_LT(a.env, 1.0);
    }
}

TEST(Qfi, NoCouplingCarriesNoEnvironmentInformation) {
    CMatrix h0 = 0.5 * testing::sigma_x(), h1 = testing::diag({1.0, 0.0});
    CMatrix z = CMatrix::Zero(2, 2);
    CVector psi = CVector::Zero(2);
    psi(1) = 1.0;
    SensorModel m = linear_model(h0, h1, z, z, psi, 0.0);
    EXPECT_NEAR(env_qfi(m, 0.0, grid(5)).value, 0.0, 1e-6);
}

TEST(Qfi, ZeroDuration) {
    SensorModel m = two_level_model(1.0, 0.0, 1.0);
    EXPECT_NEAR(env_qfi(m, 0.0, grid(0)).value, 0.0, 1e-12);
    EXPECT_NEAR(global_qfi(m, 0.0, grid(0)).value, 0.0, 1e-12);
}

TEST(Qfi, UnitaryGlobalMatchesStateDerivative) {
    // No coupling: the global state is the system state, so the global QFI is
    // 4 (<d psi|d psi> - |<psi|d psi>|^2) with psi(theta) = exp(-i H T) psi0.
    CMatrix h0 = 0.5 * testing::sigma_x(), h1 = testing::diag({-1.0, 0.0});
    CMatrix z = CMatrix::Zero(2, 2);
    CVector psi0 = CVector::Zero(2);
    psi0(1) = 1.0;
    SensorModel m = linear_model(h0, h1, z, z, psi0, 0.0);
    const double T = 1.5, th = 0.2, h = 1e-5;
    auto state = [&](double x) -> CVector {
        CMatrix gen = (-kI * T) * (h0 + x * h1);
        return gen.exp() * psi0;
    };
    CVector psi = state(th);
    CVector dpsi = (state(th + h) - state(th - h)) / (2 * h);
    double ref = 4.0 * (dpsi.squaredNorm() - std::norm(psi.dot(dpsi)));
    QfiResult q = global_qfi(m, th, grid(T, 1e-4));
    EXPECT_NEAR(q.value, ref, 2e-3 * ref);
}

TEST(Qfi, LinearGrowthForStationaryEmitter) {
    SensorModel m = two_level_model(1.0, 0.0, 1.0);
    std::vector<double> ts, vs;
    for (double T : {10.0, 20.0, 40.0, 70.0, 100.0}) {
        ts.push_back(T);
        vs.push_back(env_qfi(m, 0.0, grid(T)).value);
    }
    EXPECT_GT(testing::r_squared(ts, vs), 0.99);
    for (std::size_t k = 1; k < vs.size(); ++k) {
        EXPECT_GE(vs[k], vs[k - 1] - 1e-6);
    }
}

TEST(Qfi, GlobalBoundsEnvironment) {
    for (double delta : {0.0, 1.0}) {
        SensorModel m = two_level_model(1.0, delta, 1.0);
        for (double T : {1.0, 5.0, 20.0}) {
            double ie = env_qfi(m, delta, grid(T)).value;
            double ig = global_qfi(m, delta, grid(T)).value;
            EXPECT_GE(ig, ie - 1e-4 * ie) << "T=" << T;
        }
    }
}

TEST(Qfi, StepRefinementInvariance) {
    SensorModel m = two_level_model(1.0, 0.0, 1.0);
    double a = env_qfi(m, 0.0, grid(20, 1e-3)).value;
    double b = env_qfi(m, 0.0, grid(20, 5e-4)).value;
    EXPECT_NEAR(a, b, 0.02 * b);
    double ga = global_qfi(m, 0.0, grid(20, 1e-3)).value;
    double gb = global_qfi(m, 0.0, grid(20, 5e-4)).value;
    EXPECT_NEAR(ga, gb, 0.02 * gb);
}

TEST(Qfi, RichardsonAgreesWithCentral) {
    SensorModel m = two_level_model(1.0, 0.0, 1.0);
    QfiOptions o;
    o.method = FdMethod::richardson;
    double r = env_qfi(m, 0.0, grid(10), o).value;
    double c = env_qfi(m, 0.0, grid(10)).value;
    EXPECT_NEAR(r, c, 1e-3 * c);
}

TEST(Qfi, SamplesRespectFidelityBound) {
    SensorModel m = two_level_model(1.0, 0.0, 1.0);
    QfiResult q = env_qfi(m, 0.0, grid(10));
    ASSERT_FALSE(q.fidelity_samples.empty());
    for (auto [d, f] : q.fidelity_samples) {
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0 + 1e-9);
    }
    EXPECT_GE(q.value, 0.0);
    EXPECT_LE(q.eigen_gap, 1e-10);
    // The auto window keeps 1 - F inside [1e-6, 1e-2] when reachable.
    double gap = 1.0 - q.fidelity_samples.back().second;
    EXPECT_TRUE(q.window_reached);
    EXPECT_GE(gap, 1e-6);
}

TEST(Qfi, WindowSearchAdjustsLargeStep) {
    SensorModel m = two_level_model(1.0, 0.0, 1.0);
    QfiOptions o;
    o.delta = 0.1;
    QfiResult q = env_qfi(m, 0.0, grid(40), o);
    EXPECT_GT(q.delta_adjustments, 0);
    EXPECT_LT(q.delta, 0.1);
    double ref = env_qfi(m, 0.0, grid(40)).value;
    EXPECT_NEAR(q.value, ref, 0.01 * ref);
}

}  // namespace
}  // namespace qdec
