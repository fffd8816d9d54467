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

#include "qdec/propagate.hpp"

#include <cmath>
#include <string>

#include "qdec/errors.hpp"

namespace qdec {

TimeGrid TimeGrid::make(double t_start, double t_end, double dt) {
    if (!(dt > 0.0)) {
        fail(ErrorCode::InvalidArgument, "time step must be positive");
    }
    if (t_end < t_start) {
        fail(ErrorCode::InvalidArgument, "grid end precedes start");
    }
    double span = t_end - t_start;
    TimeGrid g;
    g.t_start = t_start;
    g.t_end = t_end;
    g.dt = dt;
    g.n_steps = static_cast<int>(std::llround(span / dt));
    if (std::abs(g.n_steps * dt - span) > 1e-12 * std::max(1.0, span)) {
        fail(ErrorCode::InvalidArgument, "grid span " + std::to_string(span) + " is not a multiple of dt");
    }
    return g;
}

TimeGrid TimeGrid::bins(int n, double dt, double t_start) {
    TimeGrid g;
    g.t_start = t_start;
    g.dt = dt;
    g.n_steps = n;
    g.t_end = t_start + n * dt;
    return g;
}

KrausPair kraus_pair(const SensorModel &model, double t, double theta, double dt, StepGuard guard) {
    CMatrix h = model.hamiltonian(t, theta);
    CMatrix j = model.jump(t, theta);
    CMatrix jj = j.adjoint() * j;
    if (guard.enabled) {
        double size = dt * std::max(op_norm(h), op_norm(jj));
        if (size > guard.limit) {
            fail(ErrorCode::StepTooLarge, "dt*max(|H|,|J^dag J|) = " + std::to_string(size) + " at t=" +
                                              std::to_string(t) + " exceeds " + std::to_string(guard.limit));
        }
    }
    const auto d = h.rows();
    KrausPair k;
    k.a0 = CMatrix::Identity(d, d) - kI * dt * h - 0.5 * dt * jj;
    k.a1 = std::sqrt(dt) * j;
    return k;
}

double completeness_defect(const KrausPair &k) {
    const auto d = k.a0.rows();
    return max_abs(k.a0.adjoint() * k.a0 + k.a1.adjoint() * k.a1 - CMatrix::Identity(d, d));
}

KrausPair complete(const KrausPair &k) {
    CMatrix s = k.a0.adjoint() * k.a0 + k.a1.adjoint() * k.a1;
    CMatrix w = pd_inv_sqrt(s);
    return KrausPair{k.a0 * w, k.a1 * w};
}

KrausSchedule::KrausSchedule(const SensorModel &model, double theta, const TimeGrid &grid, StepGuard guard)
    : constant_(model.time_independent), n_steps_(grid.n_steps), dim_(model.dim) {
    if (constant_) {
        pairs_.push_back(complete(kraus_pair(model, grid.t_start, theta, grid.dt, guard)));
        return;
    }
    pairs_.reserve(grid.n_steps);
    for (int n = 0; n < grid.n_steps; ++n) {
        pairs_.push_back(complete(kraus_pair(model, grid.t(n), theta, grid.dt, guard)));
    }
}

std::vector<CMatrix> propagate_operator(const KrausSchedule &k, const CMatrix &start) {
    std::vector<CMatrix> out;
    out.reserve(k.n_steps() + 1);
    out.push_back(start);
    CMatrix rho = start;
    for (int n = 0; n < k.n_steps(); ++n) {
        const KrausPair &p = k[n];
        rho = p.a0 * rho * p.a0.adjoint() + p.a1 * rho * p.a1.adjoint();
        out.push_back(rho);
    }
    return out;
}

std::vector<CMatrix> evolve_density(const SensorModel &model, double theta, const TimeGrid &grid, StepGuard guard) {
    KrausSchedule k(model, theta, grid, guard);
    const CVector &psi = model.initial_state;
    std::vector<CMatrix> out = propagate_operator(k, psi * psi.adjoint());
    for (std::size_t n = 0; n < out.size(); ++n) {
        double drift = std::abs(out[n].trace().real() - 1.0);
        if (drift > 1e-4) {
            fail(ErrorCode::TraceDrift, "trace drift " + std::to_string(drift) + " at step " + std::to_string(n));
        }
    }
    return out;
}

CMatrix propagate_generalized(const KrausSchedule &k1, const KrausSchedule &k2, const CMatrix &mu0,
                              const MuObserver &observer) {
    if (k1.n_steps() != k2.n_steps() || k1.dim() != k2.dim()) {
        fail(ErrorCode::DimensionMismatch, "generalized propagation needs two schedules on one grid");
    }
    const int d = k1.dim();
    const auto big = mu0.rows();
    if (big % d != 0) {
        fail(ErrorCode::DimensionMismatch, "mu dimension is not a multiple of the system dimension");
    }
    const int anc = static_cast<int>(big / d);
    const CMatrix id_anc = CMatrix::Identity(anc, anc);
    auto lift = [&](const CMatrix &a) { return anc == 1 ? a : kron(a, id_anc); };

    CMatrix mu = mu0;
    if (observer) {
        observer(0, mu);
    }
    KrausPair p1, p2;
    for (int n = 0; n < k1.n_steps(); ++n) {
        if (n == 0 || !k1.constant()) {
            p1 = KrausPair{lift(k1[n].a0), lift(k1[n].a1)};
        }
        if (n == 0 || !k2.constant()) {
            p2 = KrausPair{lift(k2[n].a0), lift(k2[n].a1)};
        }
        mu = p1.a0 * mu * p2.a0.adjoint() + p1.a1 * mu * p2.a1.adjoint();
        if (observer) {
            observer(n + 1, mu);
        }
    }
    return mu;
}

GeneralizedState evolve_generalized(const SensorModel &model, double theta1, double theta2, const TimeGrid &grid,
                                    StepGuard guard, const MuObserver &observer) {
    KrausSchedule k1(model, theta1, grid, guard);
    const CVector &psi = model.initial_state;
    CMatrix mu0 = psi * psi.adjoint();
    CMatrix mu;
    if (theta1 == theta2) {
        mu = propagate_generalized(k1, k1, mu0, observer);
    } else {
        KrausSchedule k2(model, theta2, grid, guard);
        mu = propagate_generalized(k1, k2, mu0, observer);
    }
    return GeneralizedState{mu, theta1, theta2, grid.t_end};
}

GeneralizedState evolve_generalized_purified(const SensorModel &model, double theta1, double theta2,
                                             const TimeGrid &grid, const CMatrix &choi, StepGuard guard) {
    if (choi.rows() != model.dim) {
        fail(ErrorCode::DimensionMismatch, "purification rows must equal the system dimension");
    }
    CVector psi = row_major_vec(choi);
    psi /= psi.norm();
    CMatrix mu0 = psi * psi.adjoint();
    KrausSchedule k1(model, theta1, grid, guard);
    KrausSchedule k2(model, theta2, grid, guard);
    return GeneralizedState{propagate_generalized(k1, k2, mu0), theta1, theta2, grid.t_end};
}

}  // namespace qdec
