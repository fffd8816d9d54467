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

#include <cmath>
#include <random>

#include "qdec/errors.hpp"
#include "qdec/propagate.hpp"
#include "test_util.hpp"

namespace qdec {
namespace {

using basis::e;
using basis::g;

TEST(TimeGrid, MultipleOfStep) {
    TimeGrid gr = TimeGrid::make(0.0, 20.0, 1e-3);
    EXPECT_EQ(gr.n_steps, 20000);
    EXPECT_NEAR(gr.n_steps * gr.dt, 20.0, 1e-12);
    EXPECT_THROW(TimeGrid::make(0.0, 1.0, 0.3), Error);
    EXPECT_THROW(TimeGrid::make(0.0, 1.0, -0.1), Error);
}

TEST(KrausPair, PureDecayTranscription) {
    KrausPair k = kraus_pair(two_level_model(0.0, 0.0, 1.0), 0.0, 0.0, 1e-3);
    EXPECT_LT((k.a0 - testing::diag({1.0 - 0.0005, 1.0})).norm(), 1e-15);
    EXPECT_LT((k.a1 - std::sqrt(1e-3) * ketbra(2, g, e)).norm(), 1e-15);
}

TEST(KrausPair, NoDynamicsIsIdentity) {
    CMatrix z = CMatrix::Zero(2, 2);
    CVector psi = CVector::Zero(2);
    psi(0) = 1.0;
    KrausPair k = kraus_pair(linear_model(z, z, z, z, psi, 0.0), 0.0, 0.0, 1e-3);
    EXPECT_LT((k.a0 - CMatrix::Identity(2, 2)).norm(), 1e-15);
    EXPECT_LT(k.a1.norm(), 1e-15);
}

TEST(KrausPair, CompletenessDefectIsSecondOrder) {
    std::mt19937_64 rng(21);
    const double dt = 1e-3;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + trial % 3;
        CMatrix h = testing::random_hermitian(rng, d);
        CMatrix j = testing::random_matrix(rng, d, d);
        CVector psi = testing::random_matrix(rng, d, 1).col(0);
        SensorModel m = linear_model(h, CMatrix::Zero(d, d), j, CMatrix::Zero(d, d), psi, 0.0);
        KrausPair k = kraus_pair(m, 0.0, 0.0, dt, StepGuard{false});
        double scale = std::max(op_norm(h), op_norm(j.adjoint() * j));
        EXPECT_LE(completeness_defect(k), 10 * dt * dt * scale * scale) << trial;
        EXPECT_LE(completeness_defect(complete(k)), 1e-13) << trial;
    }
}

TEST(KrausPair, StepGuard) {
    SensorModel m = two_level_model(5.0, 0.0, 1.0);
    try {
        kraus_pair(m, 0.0, 0.0, 1.0);
        FAIL();
    } catch (const Error &err) {
        EXPECT_EQ(err.code(), ErrorCode::StepTooLarge);
    }
    EXPECT_NO_THROW(kraus_pair(m, 0.0, 0.0, 1.0, StepGuard{false}));
}

TEST(EvolveDensity, SteadyExcitedPopulation) {
    SensorModel m = two_level_model(1.0, 0.0, 1.0);
    auto rho = evolve_density(m, 0.0, TimeGrid::make(0.0, 40.0, 1e-3));
    EXPECT_NEAR(rho.back()(e, e).real(), 1.0 / 3.0, 1e-4);
}

TEST(EvolveDensity, ExponentialDecay) {
    SensorModel m = two_level_model(0.0, 0.0, 1.0);
    m.initial_state = CVector::Zero(2);
    m.initial_state(e) = 1.0;
    // The completed map errs by t dt exp(-t) / 2, which stays below 1e-4 for dt <= 5e-4.
    TimeGrid gr = TimeGrid::make(0.0, 5.0, 5e-4);
    auto rho = evolve_density(m, 0.0, gr);
    for (int n = 0; n <= gr.n_steps; n += 500) {
        EXPECT_NEAR(rho[n](e, e).real(), std::exp(-gr.t(n)), 1e-4);
    }
}

TEST(EvolveDensity, ThreeLevelConservesTrace) {
    ThreeLevelSchedule sched;
    sched.plateau_T = 20.0;
    SensorModel m = three_level_model(0.0, 5.0, 1.0, sched.p1(5.0), sched.p2());
    TimeGrid gr = TimeGrid::make(0.0, sched.t_final(), 1e-3);
    auto rho = evolve_density(m, 0.0, gr);
    for (const auto &r : rho) {
        ASSERT_NEAR(r.trace().real(), 1.0, 1e-6);
        ASSERT_TRUE(is_hermitian(r, 1e-10));
        Eigen::SelfAdjointEigenSolver<CMatrix> es(r, Eigen::EigenvaluesOnly);
        ASSERT_GE(es.eigenvalues()(0), -1e-8);
    }
}

TEST(Generalized, EqualParametersReproduceDensity) {
    SensorModel m = two_level_model(1.0, 0.3, 1.0);
    TimeGrid gr = TimeGrid::make(0.0, 5.0, 1e-3);
    auto rho = evolve_density(m, 0.3, gr);
    GeneralizedState mu = evolve_generalized(m, 0.3, 0.3, gr);
    EXPECT_LE(max_abs(mu.mu - rho.back()), 1e-12);
}

TEST(Generalized, TraceOneAtEqualParameters) {
    SensorModel m = two_level_model(1.0, 0.0, 1.0);
    GeneralizedState mu = evolve_generalized(m, 0.0, 0.0, TimeGrid::make(0.0, 20.0, 1e-3));
    EXPECT_NEAR(mu.mu.trace().real(), 1.0, 1e-8);
    EXPECT_TRUE(is_hermitian(mu.mu, 1e-10));
}

TEST(Generalized, ZeroDurationIsInitialProjector) {
    SensorModel m = two_level_model(1.0, 0.0, 1.0);
    GeneralizedState mu = evolve_generalized(m, 0.0, 0.7, TimeGrid::make(0.0, 0.0, 1e-3));
    const CVector &psi = m.initial_state;
    EXPECT_LE(max_abs(mu.mu - psi * psi.adjoint()), 1e-15);
}

TEST(Generalized, ContractiveInTime) {
    SensorModel m = two_level_model(1.0, 0.0, 1.0);
    for (auto [t1, t2] : {std::pair{0.0, 0.1}, std::pair{0.0, -0.4}, std::pair{0.2, 0.5}}) {
        double prev_tr = 1.0 + 1e-12, prev_nuc = 1.0 + 1e-12;
        int checked = 0;
        evolve_generalized(m, t1, t2, TimeGrid::make(0.0, 10.0, 1e-3), {}, [&](int step, const CMatrix &mu) {
            if (step % 100 != 0) {
                return;
            }
            double tr = std::abs(mu.trace());
            double nuc = nuclear_norm(mu);
            EXPECT_LE(tr, prev_tr + 1e-12);
            EXPECT_LE(nuc, prev_nuc + 1e-12);
            EXPECT_LE(tr, 1.0 + 1e-8);
            prev_tr = tr;
            prev_nuc = nuc;
            ++checked;
        });
        EXPECT_GT(checked, 50);
    }
}

TEST(Generalized, FirstOrderConvergence) {
    SensorModel m = two_level_model(1.0, 0.0, 1.0);
    auto mu_at = [&](double dt) { return evolve_generalized(m, 0.0, 0.2, TimeGrid::make(0.0, 4.0, dt)).mu; };
    CMatrix a = mu_at(4e-3), b = mu_at(2e-3), c = mu_at(1e-3);
    double order = std::log2((a - b).norm() / (b - c).norm());
    EXPECT_GE(order, 0.8);
    EXPECT_LE(order, 1.2);
}

}  // namespace
}  // namespace qdec
