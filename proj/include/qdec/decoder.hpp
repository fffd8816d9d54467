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

#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "qdec/propagate.hpp"

namespace qdec {

/// Decoder synthesized for a sensor. Operators are tabulated per bin and
/// held constant over the bin (left endpoint), one entry when stationary.
struct DecoderModel {
    int dim = 0;
    bool stationary = true;
    TimeGrid grid;
    std::vector<CMatrix> h;
    std::vector<CMatrix> j;
    CMatrix gauge;             // W in R = sqrt(rho~) W
    CVector initial_state_d;   // W^T conj(psi_S(0)): decoder state for a product start
    CMatrix joint_choi;        // S x D purification that the decoder keeps dark
    std::vector<int> rank_log; // effective rank of R per tabulated bin
    double theta = 0.0;
    double min_rho_ratio = 1.0;       // min eigenvalue / trace of rho~ over the grid
    double hermiticity_residual = 0.0;

    int index(double t) const;
    const CMatrix &hamiltonian_d(double t) const { return h[index(t)]; }
    const CMatrix &jump_d(double t) const { return j[index(t)]; }
};

/// rho~(0) = 1, evolved with the same Kraus map as the master equation.
std::vector<CMatrix> rho_tilde(const SensorModel &model, double theta, const TimeGrid &grid, StepGuard guard = {});

/// Time-dependent decoder from R(t) = sqrt(rho~(t)) W with constant W.
/// J_D = -R^T J^T R^{-T}; H_D is the Hermitian similarity term plus the
/// contribution of the moving R, Herm(-i conj(R^{-1} dR/dt)), taken by a
/// forward difference on the grid.
DecoderModel build_decoder(const SensorModel &model, double theta, const TimeGrid &grid,
                           const std::optional<CMatrix> &gauge = std::nullopt, StepGuard guard = {});

struct SteadyState {
    CMatrix rho;
    RVector p;   // ascending eigenvalues
    CMatrix v;   // eigenvectors (columns)
    int kernel_dim = 0;
};

/// Unique steady state of the master equation, or with dt the fixed point of
/// the completed Kraus map.
SteadyState steady_state(const SensorModel &model, double theta, std::optional<double> dt = std::nullopt);

/// Closed form in the steady-state eigenbasis:
/// J_D = -W^T conj(V) [sqrt(P) (V^dag J V)^T P^{-1/2}] V^T conj(W), and H_D the
/// Hermitian part of the same construction applied to -H_eff.
DecoderModel stationary_decoder(const SensorModel &model, double theta, const std::optional<CMatrix> &gauge = std::nullopt,
                                std::optional<double> dt = std::nullopt);

/// Gauge W for which the stationary decoder is (-H_S, -J_S). Throws
/// NoTimeReversalGauge when the sensor admits none.
CMatrix time_reversal_gauge(const SensorModel &model, double theta);

/// Recipe gauge whose stationary decoder is (-U H_S U^dag, -U J_S U^dag).
CMatrix conjugating_gauge(const SensorModel &model, double theta, const CMatrix &u);

/// CSV rows t, then Re/Im of H_D and J_D entries in row-major order; every
/// stride-th tabulated bin is written.
void write_decoder_csv(const DecoderModel &dec, std::ostream &out, int stride = 1);

}  // namespace qdec
