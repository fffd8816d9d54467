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

#include "qdec/cascade.hpp"
#include "qdec/errors.hpp"
#include "qdec/oracle.hpp"
#include "qdec/parallel.hpp"
#include "qdec/qfi.hpp"
#include "test_util.hpp"

namespace qdec {
namespace {

const StepGuard kOff{false};

std::vector<std::pair<double, double>> theta_pairs() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::vector<std::pair<double, double>> out{{0.0, 0.0}, {0.0, 0.1}, {0.0, -1.0}};
    while (out.size() < 10) {
        out.emplace_back(u(rng), u(rng));
    }
    return out;
}

TEST(Oracle, FidelitiesMatchBruteForceStates) {
    SensorModel s = two_level_model(1.0, 0.0, 1.0);
    const int n = 6;
    const double dt = 0.5;
    TimeGrid gr = TimeGrid::bins(n, dt);
    for (auto [a, b] : theta_pairs()) {
        oracle::BinnedState s1 = oracle::brute_env_state(s, a, n, dt);
        oracle::BinnedState s2 = oracle::brute_env_state(s, b, n, dt);
        double fe = oracle::uhlmann_fidelity(s1.env, s2.env);
        double fg = std::abs(s1.global.dot(s2.global));
        FidelityPair f = fidelities(s, a, b, gr, kOff);
        EXPECT_NEAR(f.env, fe, 1e-8) << a << " " << b;
        EXPECT_NEAR(f.global, fg, 1e-8) << a << " " << b;
        EXPECT_LE(f.eigen_gap, 1e-10);
    }
}

TEST(Oracle, DetunedAndTimeDependentModelsAgree) {
    ThreeLevelSchedule sched;
    sched.plateau_T = 1.0;
    sched.pulse_delay = 0.5;
    sched.sigma = 0.2;
    SensorModel s3 = three_level_model(0.0, 2.0, 1.0, sched.p1(2.0), sched.p2());
    SensorModel s2 = two_level_model(0.7, 0.4, 1.3);
    for (const SensorModel *s : {&s2, &s3}) {
        const int n = 8;
        const double dt = 0.25;
        TimeGrid gr = TimeGrid::bins(n, dt);
        oracle::BinnedState p = oracle::brute_env_state(*s, 0.1, n, dt);
        oracle::BinnedState q = oracle::brute_env_state(*s, -0.2, n, dt);
        FidelityPair f = fidelities(*s, 0.1, -0.2, gr, kOff);
        EXPECT_NEAR(f.env, oracle::uhlmann_fidelity(p.env, q.env), 1e-8);
        EXPECT_NEAR(f.global, std::abs(p.global.dot(q.global)), 1e-8);
    }
}

TEST(Oracle, SchmidtFormConsistency) {
    SensorModel s = two_level_model(1.0, 0.3, 1.0);
    oracle::BinnedState st = oracle::brute_env_state(s, 0.3, 7, 0.4);
    CMatrix m = st.schmidt_matrix();
    ASSERT_EQ(m.rows(), 2);
    ASSERT_EQ(m.cols(), 1 << 7);
    EXPECT_LE(max_abs(m.transpose() * m.conjugate() - st.env), 1e-9);
    EXPECT_LE(max_abs(m * m.adjoint() - st.system_state()), 1e-9);
    EXPECT_NEAR(st.global.squaredNorm(), 1.0, 1e-12);
    // Environment and system share their nonzero spectrum.
    Eigen::SelfAdjointEigenSolver<CMatrix> es(st.env, Eigen::EigenvaluesOnly), ss(st.system_state(), Eigen::EigenvaluesOnly);
    const auto &ev = es.eigenvalues();
    EXPECT_NEAR(ev(ev.size() - 1), ss.eigenvalues()(1), 1e-9);
    EXPECT_NEAR(ev(ev.size() - 2), ss.eigenvalues()(0), 1e-9);
    EXPECT_NEAR(ev(ev.size() - 3), 0.0, 1e-9);
}

TEST(Oracle, LiteralMapsDriftQuadratically) {
    SensorModel s = two_level_model(1.0, 0.0, 1.0);
    for (double dt : {0.1, 0.05}) {
        const int n = 8;
        oracle::BinnedState lit = oracle::brute_global_state(s, 0.0, n, dt, oracle::KrausVariant::literal);
        oracle::BinnedState com = oracle::brute_global_state(s, 0.0, n, dt);
        double drift = std::abs(lit.global.squaredNorm() - 1.0);
        EXPECT_GT(drift, 0.0);
        EXPECT_LE(drift, 2.0 * n * dt * dt);
        EXPECT_NEAR(com.global.squaredNorm(), 1.0, 1e-12);
    }
}

TEST(Oracle, SystemMarginalMatchesDensityPropagation) {
    SensorModel s = two_level_model(1.0, 0.5, 1.0);
    const int n = 10;
    const double dt = 0.2;
    oracle::BinnedState st = oracle::brute_global_state(s, 0.5, n, dt);
    std::vector<CMatrix> rho = evolve_density(s, 0.5, TimeGrid::bins(n, dt), kOff);
    EXPECT_LE(max_abs(st.system_state() - rho.back()), 1e-10);
}

TEST(Oracle, CountingDistributionMatchesEngine) {
    SensorModel s = two_level_model(1.0, 0.0, 1.0);
    const int n = 9;
    const double dt = 0.3;
    TimeGrid gr = TimeGrid::bins(n, dt);
    DecoderModel dec = sweep_decoder(s, 0.4, dt);
    for (const DecoderModel *d : {static_cast<const DecoderModel *>(nullptr), static_cast<const DecoderModel *>(&dec)}) {
        std::vector<double> p = oracle::brute_counting_distribution(s, d, 0.0, n, dt);
        CascadeGenerators gen = cascade_generators(s, d);
        CountingEngine engine(gen, 0.0, gr, kOff);
        double total = 0.0;
        for (unsigned k = 0; k < p.size(); ++k) {
            CountingRecord rec;
            rec.n_steps = n;
            for (int b = 0; b < n; ++b) {
                if (k >> b & 1u) {
                    rec.clicks.push_back(b);
                }
            }
            EXPECT_NEAR(std::exp(record_log_likelihood(engine, rec)), p[k], 1e-10);
            total += p[k];
        }
        EXPECT_NEAR(total, 1.0, 1e-10);
    }
}

TEST(Oracle, SampledFrequenciesFollowTheDistribution) {
    SensorModel s = two_level_model(1.0, 0.0, 1.0);
    const int n = 4;
    const double dt = 0.5;
    std::vector<double> p = oracle::brute_counting_distribution(s, nullptr, 0.0, n, dt);
    CascadeGenerators gen = cascade_generators(s, nullptr);
    CountingEngine engine(gen, 0.0, TimeGrid::bins(n, dt), kOff);
    const int m = 100000;
    std::vector<int> count(p.size(), 0);
    for (int i = 0; i < m; ++i) {
        unsigned k = 0;
        for (int c : sample_trajectory(engine, 5, i).clicks) {
            k |= 1u << c;
        }
        ++count[k];
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
        double sd = std::sqrt(m * p[k] * (1.0 - p[k]));
        EXPECT_NEAR(count[k], m * p[k], 4.0 * sd + 1.0) << k;
    }
}

TEST(Oracle, ExactCountingFisherBracketsTheEstimator) {
    SensorModel s = two_level_model(1.0, 0.0, 1.0);
    const int n = 8;
    const double dt = 0.5;
    TimeGrid gr = TimeGrid::bins(n, dt);
    DecoderModel dec = sweep_decoder(s, -0.5, dt);
    for (const DecoderModel *d : {static_cast<const DecoderModel *>(nullptr), static_cast<const DecoderModel *>(&dec)}) {
        for (double theta : {0.0, 0.7}) {
            double exact = oracle::exact_counting_fisher(s, d, theta, n, dt);
            FisherOptions opt;
            opt.n_traj = 20000;
            opt.guard = kOff;
            opt.halving_check = false;
            FisherEstimate f = fisher_from_trajectories(cascade_generators(s, d), theta, gr, opt);
            EXPECT_NEAR(f.value, exact, 3 * f.std_error + 1e-12) << theta;
        }
    }
}

TEST(Oracle, QuantumBoundsDominateExactCounting) {
    SensorModel s = two_level_model(1.0, 0.0, 1.0);
    const int n = 8;
    const double dt = 0.5;
    TimeGrid gr = TimeGrid::bins(n, dt);
    QfiOptions q;
    q.guard = kOff;
    double ie = env_qfi(s, 0.7, gr, q).value;
    double ig = global_qfi(s, 0.7, gr, q).value;
    EXPECT_GE(ig, ie * (1 - 1e-6));
    EXPECT_LE(oracle::exact_counting_fisher(s, nullptr, 0.7, n, dt), ie * (1 + 1e-6));
}

TEST(Oracle, FidelityBounds) {
    std::mt19937_64 rng(13);
    for (int k = 0; k < 50; ++k) {
        CMatrix a = testing::random_psd(rng, 4);
        CMatrix b = testing::random_psd(rng, 4);
        a /= a.trace();
        b /= b.trace();
        double f = oracle::uhlmann_fidelity(a, b);
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0 + 1e-12);
        EXPECT_NEAR(oracle::uhlmann_fidelity(a, a), 1.0, 1e-10);
    }
    EXPECT_THROW(oracle::uhlmann_fidelity(CMatrix(), CMatrix()), Error);
}

TEST(Oracle, TooManyBins) {
    SensorModel s = two_level_model(1.0, 0.0, 1.0);
    try {
        oracle::brute_global_state(s, 0.0, 13, 0.1);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::TooManyBins);
    }
    EXPECT_NO_THROW(oracle::brute_global_state(s, 0.0, 12, 0.1));
}

}  // namespace
}  // namespace qdec
