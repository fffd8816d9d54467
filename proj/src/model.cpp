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

#include "qdec/model.hpp"

#include <cmath>
#include <numbers>

#include "qdec/errors.hpp"

namespace qdec {

CMatrix ketbra(int d, int i, int j) {
    CMatrix m = CMatrix::Zero(d, d);
    m(i, j) = 1.0;
    return m;
}

PulseEnvelope PulseEnvelope::plateau(double amplitude, double tau, double t_end, int sign) {
    PulseEnvelope p;
    p.kind = PulseKind::plateau;
    p.amplitude = amplitude;
    p.tau = tau;
    p.t_end = t_end;
    p.sign = sign;
    return p;
}

PulseEnvelope PulseEnvelope::gaussian_pi(double t_c, double sigma, int sign) {
    PulseEnvelope p;
    p.kind = PulseKind::gaussian_pi;
    p.t_c = t_c;
    p.sigma = sigma;
    p.sign = sign;
    p.amplitude = p.gaussian_peak();
    return p;
}

double PulseEnvelope::gaussian_peak() const { return std::sqrt(std::numbers::pi / 2.0) / sigma; }

double PulseEnvelope::operator()(double t) const {
    if (kind == PulseKind::plateau) {
        return sign * plateau_envelope(t, amplitude, tau, t_end);
    }
    double x = (t - t_c) / sigma;
    return sign * gaussian_peak() * std::exp(-0.5 * x * x);
}

double plateau_envelope(double t, double omega1, double tau, double t_end) {
    if (t < 0.0 || t > t_end) {
        return 0.0;
    }
    double q = std::exp(-t_end / tau);
    return omega1 * (std::exp(-t / tau) + std::exp((t - t_end) / tau) + (q - 1.0)) / (1.0 + q);
}

static void require_rate(double gamma) {
    if (!(gamma > 0.0)) {
        fail(ErrorCode::NonpositiveRate, "decay rate Gamma must be positive");
    }
}

SensorModel two_level_model(double omega, double delta, double gamma, const std::string &theta) {
    require_rate(gamma);
    if (theta != "Delta" && theta != "Omega" && theta != "Gamma") {
        fail(ErrorCode::InvalidArgument, "two_level_model: unknown theta binding '" + theta + "'");
    }
    SensorModel m;
    m.dim = 2;
    m.name = "two_level";
    m.theta_name = theta;
    m.theta0 = theta == "Delta" ? delta : theta == "Omega" ? omega : gamma;
    m.time_independent = true;
    const CMatrix see = ketbra(2, basis::e, basis::e);
    const CMatrix sx = ketbra(2, basis::e, basis::g) + ketbra(2, basis::g, basis::e);
    const CMatrix sge = ketbra(2, basis::g, basis::e);
    m.hamiltonian = [=](double, double th) -> CMatrix {
        double d = theta == "Delta" ? th : delta;
        double o = theta == "Omega" ? th : omega;
        return (-d) * see + (0.5 * o) * sx;
    };
    m.jump = [=](double, double th) -> CMatrix {
        double gm = theta == "Gamma" ? th : gamma;
        return std::sqrt(std::max(gm, 0.0)) * sge;
    };
    m.initial_state = CVector::Zero(2);
    m.initial_state(basis::g) = 1.0;
    return m;
}

SensorModel three_level_model(double delta, double omega, double gamma, const PulseEnvelope &p1,
                              const PulseEnvelope &p2, const std::string &theta) {
    require_rate(gamma);
    if (p1.kind != PulseKind::plateau || p2.kind != PulseKind::gaussian_pi) {
        fail(ErrorCode::PulseShapeMismatch, "three_level_model expects a plateau p1 and a gaussian_pi p2");
    }
    if (p2.sigma > 0.2 / gamma) {
        fail(ErrorCode::GaussianTooWide, "gaussian pi pulse width must satisfy sigma <= 0.2/Gamma");
    }
    if (theta != "Delta" && theta != "Omega" && theta != "Gamma") {
        fail(ErrorCode::InvalidArgument, "three_level_model: unknown theta binding '" + theta + "'");
    }
    SensorModel m;
    m.dim = 3;
    m.name = "three_level";
    m.theta_name = theta;
    m.theta0 = theta == "Delta" ? delta : theta == "Omega" ? omega : gamma;
    m.time_independent = false;
    const CMatrix see = ketbra(3, basis::e, basis::e);
    const CMatrix xeg = ketbra(3, basis::e, basis::g) + ketbra(3, basis::g, basis::e);
    const CMatrix xer = ketbra(3, basis::e, basis::r) + ketbra(3, basis::r, basis::e);
    const CMatrix sge = ketbra(3, basis::g, basis::e);
    PulseEnvelope q1 = p1;
    q1.amplitude = 1.0;
    const PulseEnvelope q2 = p2;
    m.hamiltonian = [=](double t, double th) -> CMatrix {
        double d = theta == "Delta" ? th : delta;
        double o = theta == "Omega" ? th : omega;
        return d * see + (0.5 * o * q1(t)) * xeg + (0.5 * q2(t)) * xer;
    };
    m.jump = [=](double, double th) -> CMatrix {
        double gm = theta == "Gamma" ? th : gamma;
        return std::sqrt(std::max(gm, 0.0)) * sge;
    };
    m.initial_state = CVector::Zero(3);
    m.initial_state(basis::g) = 1.0 / std::sqrt(2.0);
    m.initial_state(basis::r) = -1.0 / std::sqrt(2.0);
    return m;
}

PulseEnvelope ThreeLevelSchedule::p1(double omega) const { return PulseEnvelope::plateau(omega, tau, plateau_T); }

PulseEnvelope ThreeLevelSchedule::p2() const { return PulseEnvelope::gaussian_pi(t_c(), sigma); }

SensorModel linear_model(const CMatrix &h0, const CMatrix &h1, const CMatrix &j0, const CMatrix &j1,
                         const CVector &psi0, double theta0, const std::string &theta_name) {
    const auto d = h0.rows();
    if (h0.cols() != d || h1.rows() != d || h1.cols() != d || j0.rows() != d || j0.cols() != d ||
        j1.rows() != d || j1.cols() != d || psi0.size() != d) {
        fail(ErrorCode::DimensionMismatch, "linear_model: operator dimensions disagree");
    }
    SensorModel m;
    m.dim = static_cast<int>(d);
    m.name = "linear";
    m.theta_name = theta_name;
    m.theta0 = theta0;
    m.time_independent = true;
    m.hamiltonian = [=](double, double th) -> CMatrix { return h0 + th * h1; };
    m.jump = [=](double, double th) -> CMatrix { return j0 + th * j1; };
    m.initial_state = psi0.normalized();
    return m;
}

void check_model(const SensorModel &m, double t_max) {
    if (m.dim <= 0 || m.initial_state.size() != m.dim) {
        fail(ErrorCode::DimensionMismatch, "model dimension and initial state disagree");
    }
    if (std::abs(m.initial_state.norm() - 1.0) > 1e-12) {
        fail(ErrorCode::InvalidArgument, "initial state is not normalized");
    }
    for (int k = 0; k <= 8; ++k) {
        double t = t_max * k / 8.0;
        CMatrix h = m.hamiltonian(t, m.theta0);
        if (h.rows() != m.dim || !is_hermitian(h)) {
            fail(ErrorCode::NonHermitianInput, "model Hamiltonian is not Hermitian at t=" + std::to_string(t));
        }
    }
}

}  // namespace qdec
