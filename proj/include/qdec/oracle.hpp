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

#include <optional>
#include <vector>

#include "qdec/decoder.hpp"

// Brute-force references in the full time-bin Hilbert space. Each bin holds a
// Fock state in {0, 1}; record index bit n is the photon number of bin n.
// Nothing here reuses the production propagators.

namespace qdec::oracle {

inline constexpr int kMaxBins = 12;
inline constexpr int kMaxGlobalDim = 1 << 14;

enum class KrausVariant {
    completed,  // A^s S^{-1/2}, the map used by the production code
    literal,    // 1 - i H_eff dt and sqrt(dt) J, norm drifts by O(dt^2) per bin
};

struct BinnedState {
    int n_bins = 0;
    int dim_s = 0;
    CVector global;  // index record * dim_s + s
    CMatrix env;     // 2^N x 2^N

    /// Global amplitudes as a dim_s x 2^N matrix.
    CMatrix schmidt_matrix() const;
    CMatrix system_state() const;
};

BinnedState brute_global_state(const SensorModel &model, double theta, int n_bins, double dt,
                               KrausVariant variant = KrausVariant::completed);
BinnedState brute_env_state(const SensorModel &model, double theta, int n_bins, double dt,
                            KrausVariant variant = KrausVariant::completed);

/// tr sqrt(sqrt(rho1) rho2 sqrt(rho1)); eigenvalues below 1e-12 of the
/// largest are treated as zero in both square roots.
double uhlmann_fidelity(const CMatrix &rho1, const CMatrix &rho2);

/// All 2^N record probabilities for the sensor alone or cascaded into a
/// stationary decoder started in its dark purification.
std::vector<double> brute_counting_distribution(const SensorModel &model, const DecoderModel *dec, double theta,
                                                int n_bins, double dt);

/// sum_r (dP_r/dtheta)^2 / P_r with central differences of step h.
double exact_counting_fisher(const SensorModel &model, const DecoderModel *dec, double theta, int n_bins, double dt,
                             double h = 1e-4);

}  // namespace qdec::oracle
