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

#include "qdec/qfi.hpp"

#include <algorithm>
#include <cmath>

#include "qdec/errors.hpp"

namespace qdec {

FidelityPair fidelities(const SensorModel &model, double theta1, double theta2, const TimeGrid &grid,
                        StepGuard guard, const std::optional<CMatrix> &purification) {
    CMatrix mu = purification ? evolve_generalized_purified(model, theta1, theta2, grid, *purification, guard).mu
                              : evolve_generalized(model, theta1, theta2, grid, guard).mu;
    FidelityPair f;
    f.env = nuclear_norm(mu);
    f.global = std::abs(mu.trace());
    f.eigen_gap = std::abs(f.env - nuclear_norm_eigen(mu));
    return f;
}

double env_fidelity(const SensorModel &model, double theta1, double theta2, const TimeGrid &grid, StepGuard guard) {
    return fidelities(model, theta1, theta2, grid, guard).env;
}

double global_fidelity(const SensorModel &model, double theta1, double theta2, const TimeGrid &grid,
                       StepGuard guard) {
    return fidelities(model, theta1, theta2, grid, guard).global;
}

namespace {

constexpr double kGapLow = 1e-6;
constexpr double kGapHigh = 1e-2;
constexpr double kDeltaMin = 1e-6;
constexpr double kDeltaMax = 1e-1;

QfiResult qfi_impl(const SensorModel &model, double theta, const TimeGrid &grid, const QfiOptions &opt,
                   bool global) {
    QfiResult res;
    res.method = opt.method;
    auto fid = [&](double d) {
        FidelityPair f = fidelities(model, theta, theta + d, grid, opt.guard, opt.purification);
        res.eigen_gap = std::max(res.eigen_gap, f.eigen_gap);
        double v = global ? f.global : f.env;
        res.fidelity_samples.emplace_back(d, v);
        return v;
    };

    double delta = std::clamp(opt.delta, kDeltaMin, kDeltaMax);
    double f_plus = fid(delta);
    for (int iter = 0; iter < 80; ++iter) {
        double gap = 1.0 - f_plus;
        if (gap > kGapHigh) {
            if (delta / 2 < kDeltaMin) {
                fail(ErrorCode::StepSelectionFailed, "1-F stays above 1e-2 down to delta=1e-6");
            }
            delta /= 2;
        } else if (gap < kGapLow) {
            if (delta >= kDeltaMax) {
                res.window_reached = false;
                break;
            }
            delta = std::min(2 * delta, kDeltaMax);
        } else {
            break;
        }
        ++res.delta_adjustments;
        f_plus = fid(delta);
    }
    if (!std::isfinite(f_plus)) {
        fail(ErrorCode::StepSelectionFailed, "fidelity is not finite");
    }

    auto second_difference = [&](double d, double fp) {
        double fm = fid(-d);
        return 4.0 * (2.0 - fp - fm) / (d * d);
    };
    double value = second_difference(delta, f_plus);
    if (opt.method == FdMethod::richardson) {
        double half = delta / 2;
        double v_half = second_difference(half, fid(half));
        value = (4.0 * v_half - value) / 3.0;
    }
    res.delta = delta;
    res.raw = value;
    res.value = std::max(value, 0.0);
    return res;
}

}  // namespace

QfiResult env_qfi(const SensorModel &model, double theta, const TimeGrid &grid, const QfiOptions &opt) {
    return qfi_impl(model, theta, grid, opt, false);
}

QfiResult global_qfi(const SensorModel &model, double theta, const TimeGrid &grid, const QfiOptions &opt) {
    return qfi_impl(model, theta, grid, opt, true);
}

}  // namespace qdec
