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
#include <utility>
#include <vector>

#include "qdec/propagate.hpp"

namespace qdec {

enum class FdMethod { central_3pt, richardson };

struct FidelityPair {
    double env = 1.0;       // nuclear norm of mu
    double global = 1.0;    // |tr mu|
    double eigen_gap = 0.0; // |nuclear_norm - tr sqrt(mu mu^dag)| from the eigen route
};

/// Both fidelities from a single mu propagation. With a purification the
/// system starts mixed and the ancilla is kept on the system side.
FidelityPair fidelities(const SensorModel &model, double theta1, double theta2, const TimeGrid &grid,
                        StepGuard guard = {}, const std::optional<CMatrix> &purification = std::nullopt);

double env_fidelity(const SensorModel &model, double theta1, double theta2, const TimeGrid &grid,
                    StepGuard guard = {});
double global_fidelity(const SensorModel &model, double theta1, double theta2, const TimeGrid &grid,
                       StepGuard guard = {});

struct QfiOptions {
    double delta = 1e-3;
    FdMethod method = FdMethod::central_3pt;
    StepGuard guard{};
    std::optional<CMatrix> purification;  // mixed start, see fidelities()
};

struct QfiResult {
    double value = 0.0;  // clipped at 0
    double raw = 0.0;
    double delta = 0.0;
    std::vector<std::pair<double, double>> fidelity_samples;  // (delta, F)
    FdMethod method = FdMethod::central_3pt;
    int delta_adjustments = 0;
    bool window_reached = true;  // false if 1-F stayed below 1e-6 up to delta = 0.1
    double eigen_gap = 0.0;      // largest nuclear-norm cross-check deviation seen
};

/// I = 4 [2 - F(theta, theta+delta) - F(theta, theta-delta)] / delta^2 with delta
/// moved until 1 - F(theta, theta+delta) lies in [1e-6, 1e-2].
QfiResult env_qfi(const SensorModel &model, double theta, const TimeGrid &grid, const QfiOptions &opt = {});
QfiResult global_qfi(const SensorModel &model, double theta, const TimeGrid &grid, const QfiOptions &opt = {});

}  // namespace qdec
