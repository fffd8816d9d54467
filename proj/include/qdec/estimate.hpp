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

#include <cstdint>
#include <functional>
#include <vector>

#include "qdec/cascade.hpp"

namespace qdec {

struct LikelihoodCurve {
    std::vector<double> theta_grid;
    std::vector<double> log_likelihoods;
    double argmax = 0.0;
    bool flat = false;  // spread below 1e-9; argmax is then the grid centre
    std::uint64_t record_seed = 0;
    std::uint64_t record_index = 0;
};

/// Grid maximum refined by the vertex of the parabola through the best point
/// and its neighbours. Throws GridTooNarrow when the maximum sits on an end.
double refine_argmax(const std::vector<double> &x, const std::vector<double> &y, bool *flat = nullptr);

LikelihoodCurve likelihood_curve(const CascadeGenerators &gen, const CountingRecord &record,
                                 const std::vector<double> &theta_grid, const TimeGrid &grid, StepGuard guard = {});

/// Log-likelihoods of every record at every grid value, [record][theta].
/// One engine is alive at a time; records are replayed in parallel.
std::vector<std::vector<double>> likelihood_table(const CascadeGenerators &gen,
                                                  const std::vector<CountingRecord> &records,
                                                  const std::vector<double> &theta_grid, const TimeGrid &grid,
                                                  int threads = 1, StepGuard guard = {});

std::vector<double> linspace(double a, double b, int n);

/// Sensor, decoder and grid for one interrogation time.
struct StudySetup {
    CascadeGenerators gen;
    TimeGrid grid;
};
using StudyFactory = std::function<StudySetup(double T)>;

struct StudyOptions {
    int K = 1000;
    std::uint64_t seed = 1;
    int threads = 1;
    int grid_points = 41;
    double width_factor = 5.0;  // half width = width_factor / sqrt(F)
    double half_width = 0.0;    // fixed half width when positive
    int max_widenings = 3;
    FisherOptions fisher{};     // first pass that sets the grid and the reference
};

struct StudyRow {
    double T = 0.0;
    double inv_var_per_K = 0.0;  // 1 / Var of single-record estimates
    double var = 0.0;
    double mean = 0.0;
    double bias = 0.0;
    double bias_bound = 0.0;     // 3 sqrt(Var / K)
    FisherEstimate fisher;
    int K = 0;
    std::uint64_t seed = 0;
    double half_width = 0.0;
    int widened = 0;             // records that needed a wider grid
};

/// K records per T at theta_true, one grid-plus-parabola estimate each.
std::vector<StudyRow> interrogation_study(const StudyFactory &factory, double theta_true,
                                          const std::vector<double> &T_list, const StudyOptions &opt);

}  // namespace qdec
