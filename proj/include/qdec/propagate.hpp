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

#include <functional>
#include <vector>

#include "qdec/linalg.hpp"
#include "qdec/model.hpp"

namespace qdec {

struct TimeGrid {
    double t_start = 0.0;
    double t_end = 0.0;
    double dt = 1e-3;
    int n_steps = 0;

    /// Throws unless (t_end - t_start) is an integer multiple of dt.
    static TimeGrid make(double t_start, double t_end, double dt);
    static TimeGrid bins(int n, double dt, double t_start = 0.0);
    double t(int n) const { return t_start + n * dt; }
};

struct KrausPair {
    CMatrix a0;
    CMatrix a1;
};

/// Born-expansion guard dt * max(||H||, ||J^dag J||) <= limit. The oracle
/// studies at coarse dt switch it off on purpose.
struct StepGuard {
    bool enabled = true;
    double limit = 0.05;
};

/// Literal first-order pair with operators sampled at t:
/// a0 = 1 - i H dt - J^dag J dt / 2, a1 = sqrt(dt) J.
KrausPair kraus_pair(const SensorModel &model, double t, double theta, double dt, StepGuard guard = {});

/// max |a0^dag a0 + a1^dag a1 - 1|, i.e. dt^2 |H_eff^dag H_eff|.
double completeness_defect(const KrausPair &k);

/// Returns a_s S^{-1/2} with S = sum a_s^dag a_s. The completed pair agrees
/// with the literal one to O(dt^2) and is exactly trace preserving.
KrausPair complete(const KrausPair &k);

/// Completed Kraus pairs for every bin of a grid (one entry when the model
/// is time independent).
class KrausSchedule {
   public:
    KrausSchedule(const SensorModel &model, double theta, const TimeGrid &grid, StepGuard guard = {});
    const KrausPair &operator[](int n) const { return constant_ ? pairs_.front() : pairs_[n]; }
    int n_steps() const { return n_steps_; }
    int dim() const { return dim_; }
    bool constant() const { return constant_; }

   private:
    std::vector<KrausPair> pairs_;
    bool constant_ = true;
    int n_steps_ = 0;
    int dim_ = 0;
};

/// rho_0 .. rho_N by repeated Kraus application; throws TraceDrift if
/// |tr rho - 1| exceeds 1e-4 anywhere.
std::vector<CMatrix> evolve_density(const SensorModel &model, double theta, const TimeGrid &grid, StepGuard guard = {});

/// Same map from an arbitrary start operator, without the trace check.
std::vector<CMatrix> propagate_operator(const KrausSchedule &k, const CMatrix &start);

struct GeneralizedState {
    CMatrix mu;
    double theta1 = 0.0;
    double theta2 = 0.0;
    double t = 0.0;
};

using MuObserver = std::function<void(int step, const CMatrix &mu)>;

/// mu -> sum_s A^s(theta1) mu A^s(theta2)^dag from |psi_S(0)><psi_S(0)|.
GeneralizedState evolve_generalized(const SensorModel &model, double theta1, double theta2, const TimeGrid &grid,
                                    StepGuard guard = {}, const MuObserver &observer = {});

/// Same law with a mixed system start given by its purification
/// sum_ij choi(i,j) |i>_S |j>_A; the ancilla A does not evolve.
GeneralizedState evolve_generalized_purified(const SensorModel &model, double theta1, double theta2,
                                             const TimeGrid &grid, const CMatrix &choi, StepGuard guard = {});

/// Lower-level driver shared by the two entry points above.
CMatrix propagate_generalized(const KrausSchedule &k1, const KrausSchedule &k2, const CMatrix &mu0,
                              const MuObserver &observer = {});

}  // namespace qdec
