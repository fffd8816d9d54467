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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qdec/decoder.hpp"

namespace qdec {

/// Loss (sqrt(gamma) s_ge) and dephasing (sqrt(gamma_dep) s_z) on each factor,
/// plus detector efficiency eta. gamma_dep follows gamma unless set.
struct Imperfections {
    double gamma = 0.0;
    std::optional<double> gamma_dep;
    double eta = 1.0;

    double dephasing() const { return gamma_dep.value_or(gamma); }
    bool ideal() const { return gamma == 0.0 && dephasing() == 0.0 && eta == 1.0; }
};

enum class CascadeStart {
    purified,  // decoder.joint_choi, the state the decoder keeps dark
    product,   // psi_S(0) x decoder.initial_state_d
};

class CascadeGenerators {
   public:
    CascadeGenerators(SensorModel sensor, std::shared_ptr<const DecoderModel> dec, Imperfections imp,
                      CascadeStart start);

    int dim() const { return dim_s_ * dim_d_; }
    int dim_s() const { return dim_s_; }
    int dim_d() const { return dim_d_; }
    bool has_decoder() const { return static_cast<bool>(dec_); }
    bool time_independent() const;
    double detector_eta() const { return imp_.eta; }
    const Imperfections &imperfections() const { return imp_; }
    const SensorModel &sensor() const { return sensor_; }
    const DecoderModel *decoder() const { return dec_.get(); }
    const CVector &initial_state() const { return psi0_; }

    CMatrix h_total(double t, double theta) const;
    CMatrix j_total(double t, double theta) const;
    CMatrix h_casc(double t, double theta) const;
    std::vector<CMatrix> extra_lindblad() const { return extra_; }

   private:
    SensorModel sensor_;
    std::shared_ptr<const DecoderModel> dec_;
    Imperfections imp_;
    int dim_s_ = 0;
    int dim_d_ = 1;
    CVector psi0_;
    std::vector<CMatrix> extra_;
};

/// Absent decoder gives the direct-counting baseline (decoder dimension 1).
CascadeGenerators cascade_generators(const SensorModel &sensor, const DecoderModel *dec,
                                     const Imperfections &imp = {}, CascadeStart start = CascadeStart::purified);

/// Per-bin instrument on the state space of the counting engine: pure
/// vectors in the ideal case, column-major vectorized density matrices
/// otherwise. Both maps are completed so that no-click plus click
/// probabilities add to one exactly.
struct BinInstrument {
    CMatrix no_click;
    CMatrix click;
};

/// Precomputed instrument for one parameter value on one grid.
class CountingEngine {
   public:
    CountingEngine(const CascadeGenerators &gen, double theta, const TimeGrid &grid, StepGuard guard = {});

    bool pure() const { return pure_; }
    bool homogeneous() const { return homogeneous_; }
    int state_dim() const { return state_dim_; }
    int n_steps() const { return grid_.n_steps; }
    double theta() const { return theta_; }
    const TimeGrid &grid() const { return grid_; }
    const CascadeGenerators &generators() const { return *gen_; }

    CVector initial() const;
    double prob(const CVector &v) const;
    void normalize(CVector &v) const;
    BinInstrument instrument(int n) const;
    /// Tabulated instrument, or one built into `scratch` when bins are not stored.
    const BinInstrument &instrument(int n, BinInstrument &scratch) const;

    /// L0^m v for the homogeneous engine, powers applied from the highest bit.
    CVector advance(const CVector &v, std::int64_t m) const;
    const std::vector<CMatrix> &powers() const { return powers_; }

    /// Conditional density matrix of a state vector.
    CMatrix density(const CVector &v) const;

   private:
    BinInstrument build(int n) const;

    const CascadeGenerators *gen_;
    double theta_;
    TimeGrid grid_;
    StepGuard guard_;
    bool pure_ = true;
    bool homogeneous_ = true;
    int state_dim_ = 0;
    std::vector<BinInstrument> table_;
    std::vector<CMatrix> powers_;
};

struct CountingRecord {
    int n_steps = 0;
    std::vector<int> clicks;  // bin indices with dN = 1, ascending
    double log_likelihood = 0.0;
    double theta_true = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;

    std::vector<bool> bits() const;
    std::string bitstring() const;
};

/// Optional audit hook receiving the normalized conditional density matrix
/// after every bin (stepping path only).
using StateAudit = std::function<void(int bin, const CMatrix &rho)>;

CountingRecord sample_trajectory(const CountingEngine &engine, std::uint64_t seed, std::uint64_t index = 0,
                                 const StateAudit &audit = {});
CountingRecord sample_trajectory(const CascadeGenerators &gen, double theta_true, const TimeGrid &grid,
                                 std::uint64_t seed);

double record_log_likelihood(const CountingEngine &engine, const CountingRecord &record);
double record_log_likelihood(const CascadeGenerators &gen, double theta, const CountingRecord &record,
                             const TimeGrid &grid);

/// Stepwise reference sampler that draws one uniform per bin. Slower than
/// the lifted sampler for homogeneous engines, same record law.
CountingRecord sample_trajectory_stepwise(const CountingEngine &engine, std::uint64_t seed, std::uint64_t index = 0,
                                          const StateAudit &audit = {});
double record_log_likelihood_stepwise(const CountingEngine &engine, const CountingRecord &record);

struct FisherEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int n_traj = 0;
    double eps = 0.0;
    double T = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    double mean_score = 0.0;
    double mean_score_se = 0.0;
    double halving_ratio = 1.0;  // FI(eps/2)/FI(eps) on the audited subset
    double mean_clicks = 0.0;
};

struct FisherOptions {
    double eps = 1e-3;
    int n_traj = 1000;
    std::uint64_t seed = 1;
    int threads = 1;
    bool halving_check = true;
    StepGuard guard{};
};

FisherEstimate fisher_from_trajectories(const CascadeGenerators &gen, double theta, const TimeGrid &grid,
                                        const FisherOptions &opt);

struct MismatchPoint {
    double delta_mis = 0.0;
    double delta_mis_used = 0.0;  // moved off the singular matched point when needed
    FisherEstimate fisher;
};

struct MismatchSweep {
    std::vector<MismatchPoint> points;
    double peak = 0.0;
    double fwhm = 0.0;
};

/// Decoder for each point is the stationary decoder designed at theta - delta_mis
/// in the gauge that conjugates by s_ee - s_gg, started in its dark state.
/// Points closer than singular_offset to zero are evaluated at +-singular_offset.
MismatchSweep mismatch_sweep(const SensorModel &sensor, double theta, const std::vector<double> &delta_mis,
                             const TimeGrid &grid, const FisherOptions &opt, double singular_offset = 0.25,
                             const Imperfections &imp = {});

/// Stationary decoder at theta_design in the gauge conjugating by s_ee - s_gg.
/// With dt the fixed point of the discrete map is used.
DecoderModel sweep_decoder(const SensorModel &sensor, double theta_design, std::optional<double> dt = std::nullopt);

/// Full width at half maximum by linear interpolation; NaN if a side never
/// drops below half the peak.
double fwhm(const std::vector<double> &x, const std::vector<double> &y);

}  // namespace qdec
