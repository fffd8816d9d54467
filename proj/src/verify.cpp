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

#include "qdec/verify.hpp"

#include "qdec/decoder.hpp"
#include "qdec/errors.hpp"

namespace qdec {

std::vector<double> vacuum_probability_series(const SensorModel &sensor, const DecoderModel &dec, double theta,
                                              const TimeGrid &grid, CascadeStart start, StepGuard guard) {
    CascadeGenerators gen = cascade_generators(sensor, &dec, {}, start);
    CountingEngine engine(gen, theta, grid, guard);
    std::vector<double> out;
    out.reserve(grid.n_steps + 1);
    CVector v = engine.initial();
    out.push_back(engine.prob(v));
    BinInstrument scratch;
    for (int n = 0; n < grid.n_steps; ++n) {
        v = engine.instrument(n, scratch).no_click * v;
        out.push_back(engine.prob(v));
    }
    return out;
}

double verify_decoding(const SensorModel &sensor, const DecoderModel &dec, double theta, const TimeGrid &grid,
                       CascadeStart start, StepGuard guard) {
    CascadeGenerators gen = cascade_generators(sensor, &dec, {}, start);
    CountingEngine engine(gen, theta, grid, guard);
    CVector v = engine.initial();
    if (engine.homogeneous()) {
        return engine.prob(engine.advance(v, grid.n_steps));
    }
    BinInstrument scratch;
    for (int n = 0; n < grid.n_steps; ++n) {
        v = engine.instrument(n, scratch).no_click * v;
    }
    return engine.prob(v);
}

double verify_decoding_literal(const SensorModel &sensor, const DecoderModel &dec, double theta,
                               const TimeGrid &grid, CascadeStart start) {
    CascadeGenerators gen = cascade_generators(sensor, &dec, {}, start);
    const int d = gen.dim();
    const CMatrix id = CMatrix::Identity(d, d);
    auto step = [&](double t) {
        CMatrix j = gen.j_total(t, theta);
        return CMatrix(id - kI * grid.dt * gen.h_total(t, theta) - 0.5 * grid.dt * (j.adjoint() * j));
    };
    CVector v = gen.initial_state();
    if (gen.time_independent()) {
        const CMatrix a0 = step(grid.t_start);
        for (int n = 0; n < grid.n_steps; ++n) {
            v = a0 * v;
        }
    } else {
        for (int n = 0; n < grid.n_steps; ++n) {
            v = step(grid.t(n)) * v;
        }
    }
    return v.squaredNorm();
}

double product_start_vacuum(const SensorModel &sensor, double theta, const TimeGrid &grid, StepGuard guard) {
    std::vector<CMatrix> rho = evolve_density(sensor, theta, grid, guard);
    std::vector<CMatrix> rt = rho_tilde(sensor, theta, grid, guard);
    const CMatrix &rs = rho.back();
    PinvResult inv = pinv_threshold(rt.back());
    return (rs * rs * inv.inverse).trace().real();
}

double matched_point_fisher(const SensorModel &sensor, const DecoderModel &dec, double theta, const TimeGrid &grid,
                            double x, StepGuard guard) {
    if (!(x > 0.0)) {
        fail(ErrorCode::InvalidArgument, "offset must be positive");
    }
    double base = 1.0 - verify_decoding(sensor, dec, theta, grid, CascadeStart::purified, guard);
    double up = 1.0 - verify_decoding(sensor, dec, theta + x, grid, CascadeStart::purified, guard);
    double down = 1.0 - verify_decoding(sensor, dec, theta - x, grid, CascadeStart::purified, guard);
    // The discretization leak at x = 0 is removed so only the curvature remains.
    return 2.0 * (up + down - 2.0 * base) / (x * x);
}

}  // namespace qdec
