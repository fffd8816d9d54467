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

#include <vector>

#include "qdec/cascade.hpp"

namespace qdec {

/// Probability of the all-zeros record for sensor plus decoder at theta.
double verify_decoding(const SensorModel &sensor, const DecoderModel &dec, double theta, const TimeGrid &grid,
                       CascadeStart start = CascadeStart::purified, StepGuard guard = {});

/// P_vac after each bin, n = 0..n_steps.
std::vector<double> vacuum_probability_series(const SensorModel &sensor, const DecoderModel &dec, double theta,
                                              const TimeGrid &grid, CascadeStart start = CascadeStart::purified,
                                              StepGuard guard = {});

/// Same record probability with the uncompleted first-order no-click map
/// 1 - i H dt - J^dag J dt / 2, whose norm defect exposes the O(dt) error of
/// the literal discretization.
double verify_decoding_literal(const SensorModel &sensor, const DecoderModel &dec, double theta,
                               const TimeGrid &grid, CascadeStart start = CascadeStart::purified);

/// tr[rho_S(T)^2 rho~(T)^{-1}], the closed form of P_vac for a product start.
double product_start_vacuum(const SensorModel &sensor, double theta, const TimeGrid &grid, StepGuard guard = {});

/// Counting information of a decoder built at theta, read off the vacuum
/// curvature: 2[P_vac(theta + x) + P_vac(theta - x) - 2 P_vac(theta)] / (-x^2).
/// The sensor starts in the decoder's dark state, so this is the Fisher
/// information at the matched point in the limit x -> 0.
double matched_point_fisher(const SensorModel &sensor, const DecoderModel &dec, double theta, const TimeGrid &grid,
                            double x = 1e-3, StepGuard guard = {});

}  // namespace qdec
