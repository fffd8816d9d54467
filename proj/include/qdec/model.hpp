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
#include <string>

#include "qdec/linalg.hpp"

namespace qdec {

/// Basis convention: two-level {e, g}, three-level {e, g, r}.
namespace basis {
inline constexpr int e = 0;
inline constexpr int g = 1;
inline constexpr int r = 2;
}  // namespace basis

/// |i><j| in dimension d.
CMatrix ketbra(int d, int i, int j);

enum class PulseKind { plateau, gaussian_pi };

struct PulseEnvelope {
    PulseKind kind = PulseKind::plateau;
    double amplitude = 0.0;  // plateau strength; gaussian peak is derived from sigma
    double tau = 2.0;
    double t_end = 0.0;  // plateau end T
    double t_c = 0.0;
    double sigma = 0.05;
    int sign = 1;

    static PulseEnvelope plateau(double amplitude, double tau, double t_end, int sign = 1);
    static PulseEnvelope gaussian_pi(double t_c, double sigma, int sign = 1);

    /// Peak value of a gaussian pi pulse, sqrt(pi/2)/sigma, so the area is pi.
    double gaussian_peak() const;
    double operator()(double t) const;
};

/// Ramp-plateau-ramp envelope. Zero outside [0, T].
double plateau_envelope(double t, double omega1, double tau, double t_end);

using OperatorFn = std::function<CMatrix(double t, double theta)>;

struct SensorModel {
    int dim = 0;
    OperatorFn hamiltonian;
    OperatorFn jump;
    CVector initial_state;
    std::string theta_name;
    double theta0 = 0.0;  // configured value of the bound parameter
    bool time_independent = true;
    std::string name;
};

/// H = -Delta s_ee + Omega/2 (s_eg + s_ge), J = sqrt(Gamma) s_ge, start in |g>.
/// theta binds one of "Delta", "Omega", "Gamma".
SensorModel two_level_model(double omega, double delta, double gamma, const std::string &theta = "Delta");

/// H(t) = Delta s_ee + [Omega_1(t) s_eg + Omega_2(t) s_er + h.c.]/2, J = sqrt(Gamma) s_ge,
/// start in (|g> - |r>)/sqrt(2). The plateau amplitude of p1 is replaced by omega.
SensorModel three_level_model(double delta, double omega, double gamma, const PulseEnvelope &p1,
                              const PulseEnvelope &p2, const std::string &theta = "Delta");

struct ThreeLevelSchedule {
    double plateau_T = 50.0;
    double tau = 2.0;
    double sigma = 0.05;
    double pulse_delay = 1.0;  // t_c = T + delay
    double tail = 5.0;         // T_f = t_c + tail
    PulseEnvelope p1(double omega) const;
    PulseEnvelope p2() const;
    double t_c() const { return plateau_T + pulse_delay; }
    double t_final() const { return t_c() + tail; }
};

/// H = H0 + theta H1, J = J0 + theta J1, time independent.
SensorModel linear_model(const CMatrix &h0, const CMatrix &h1, const CMatrix &j0, const CMatrix &j1,
                         const CVector &psi0, double theta0, const std::string &theta_name = "theta");

/// Throws unless the sampled Hamiltonians are Hermitian and the start state is normalized.
void check_model(const SensorModel &m, double t_max = 1.0);

}  // namespace qdec
