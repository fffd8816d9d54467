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

#include "qdec/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "qdec/csv.hpp"
#include "qdec/errors.hpp"

namespace qdec {

int DecoderModel::index(double t) const {
    if (stationary || h.size() <= 1) {
        return 0;
    }
    double x = (t - grid.t_start) / grid.dt;
    int n = static_cast<int>(std::floor(x + 1e-9));
    return std::clamp(n, 0, static_cast<int>(h.size()) - 1);
}

std::vector<CMatrix> rho_tilde(const SensorModel &model, double theta, const TimeGrid &grid, StepGuard guard) {
    KrausSchedule k(model, theta, grid, guard);
    return propagate_operator(k, CMatrix::Identity(model.dim, model.dim));
}

static CMatrix resolve_gauge(const std::optional<CMatrix> &gauge, int d) {
    CMatrix w = gauge ? *gauge : CMatrix::Identity(d, d);
    if (w.rows() != d || !is_unitary(w, 1e-12)) {
        fail(ErrorCode::NonUnitaryGauge, "decoder gauge must be a unitary of the sensor dimension");
    }
    return w;
}

static double min_eig_ratio(const CMatrix &m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    double tr = m.trace().real();
    return es.eigenvalues()(0) / tr;
}

DecoderModel build_decoder(const SensorModel &model, double theta, const TimeGrid &grid,
                           const std::optional<CMatrix> &gauge, StepGuard guard) {
    const int d = model.dim;
    CMatrix w = resolve_gauge(gauge, d);
    std::vector<CMatrix> rt = rho_tilde(model, theta, grid, guard);

    DecoderModel dec;
    dec.dim = d;
    dec.stationary = false;
    dec.grid = grid;
    dec.gauge = w;
    dec.theta = theta;
    dec.initial_state_d = w.transpose() * model.initial_state.conjugate();
    dec.joint_choi = psd_sqrt(rt[0]) * w / std::sqrt(rt[0].trace().real());

    std::vector<CMatrix> r(rt.size());
    for (std::size_t n = 0; n < rt.size(); ++n) {
        double ratio = min_eig_ratio(rt[n]);
        dec.min_rho_ratio = std::min(dec.min_rho_ratio, ratio);
        if (ratio < LinalgTolerances::pinv) {
            fail(ErrorCode::RankDeficientRho, "rho~ loses rank at t=" + std::to_string(grid.t(static_cast<int>(n))));
        }
        r[n] = psd_sqrt(rt[n]) * w;
    }

    dec.h.reserve(grid.n_steps);
    dec.j.reserve(grid.n_steps);
    dec.rank_log.reserve(grid.n_steps);
    for (int n = 0; n < grid.n_steps; ++n) {
        double t = grid.t(n);
        CMatrix hs = model.hamiltonian(t, theta);
        CMatrix js = model.jump(t, theta);
        CMatrix heff_t = (hs - 0.5 * kI * (js.adjoint() * js)).transpose();
        CMatrix rt_n = r[n].transpose();
        PinvResult inv = pinv_threshold(rt_n);
        dec.rank_log.push_back(inv.effective_rank);
        if (inv.effective_rank < d) {
            fail(ErrorCode::RankDeficientRho, "R loses rank at t=" + std::to_string(t));
        }
        CMatrix jd = -rt_n * js.transpose() * inv.inverse;
        CMatrix similar = rt_n * heff_t * inv.inverse;
        CMatrix hd = -hermitian_part(similar);
        CMatrix r_dot = (r[n + 1] - r[n]) / grid.dt;
        CMatrix y = (inv.inverse.transpose() * r_dot).conjugate();
        CMatrix moving = -kI * y;
        hd += hermitian_part(moving);
        dec.hermiticity_residual = std::max(dec.hermiticity_residual, max_abs(hd - hd.adjoint()));
        dec.h.push_back(hermitian_part(hd));
        dec.j.push_back(jd);
    }
    return dec;
}

static CMatrix liouvillian(const CMatrix &h, const CMatrix &j) {
    const auto d = h.rows();
    const CMatrix id = CMatrix::Identity(d, d);
    const CMatrix jj = j.adjoint() * j;
    // Column-major vectorization: vec(A X B) = (B^T kron A) vec(X).
    return -kI * kron(id, h) + kI * kron(h.transpose(), id) + kron(j.conjugate(), j) - 0.5 * kron(id, jj) -
           0.5 * kron(jj.transpose(), id);
}

SteadyState steady_state(const SensorModel &model, double theta, std::optional<double> dt) {
    if (!model.time_independent) {
        fail(ErrorCode::InvalidArgument, "steady state requires a time-independent model");
    }
    const int d = model.dim;
    CMatrix gen;
    if (dt) {
        KrausPair k = complete(kraus_pair(model, 0.0, theta, *dt, StepGuard{false}));
        gen = kron(k.a0.conjugate(), k.a0) + kron(k.a1.conjugate(), k.a1) - CMatrix::Identity(d * d, d * d);
    } else {
        gen = liouvillian(model.hamiltonian(0.0, theta), model.jump(0.0, theta));
    }
    Eigen::JacobiSVD<CMatrix> svd(gen, Eigen::ComputeFullV);
    const RVector &s = svd.singularValues();
    SteadyState ss;
    double tol = 1e-10 * std::max(s(0), 1e-300);
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (s(k) <= tol) {
            ++ss.kernel_dim;
        }
    }
    if (ss.kernel_dim != 1) {
        fail(ErrorCode::DegenerateSteadyState, "steady-state kernel has dimension " + std::to_string(ss.kernel_dim));
    }
    CVector v = svd.matrixV().col(s.size() - 1);
    CMatrix rho = Eigen::Map<CMatrix>(v.data(), d, d);
    rho = hermitian_part(rho / rho.trace());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
    ss.rho = rho;
    ss.p = es.eigenvalues();
    ss.v = es.eigenvectors();
    if (ss.p(0) < LinalgTolerances::pinv) {
        fail(ErrorCode::RankDeficientSteadyState, "steady state has eigenvalue " + std::to_string(ss.p(0)));
    }
    return ss;
}

DecoderModel stationary_decoder(const SensorModel &model, double theta, const std::optional<CMatrix> &gauge,
                                std::optional<double> dt) {
    const int d = model.dim;
    CMatrix w = resolve_gauge(gauge, d);
    SteadyState ss = steady_state(model, theta, dt);
    CMatrix hs = model.hamiltonian(0.0, theta);
    CMatrix js = model.jump(0.0, theta);
    CMatrix heff = hs - 0.5 * kI * (js.adjoint() * js);
    CMatrix j_eig = ss.v.adjoint() * js * ss.v;
    CMatrix h_eig = ss.v.adjoint() * heff * ss.v;

    // Element (k, k') carries sqrt(p_k / p_k') <k'|O|k>.
    auto weighted = [&](const CMatrix &o) {
        CMatrix m(d, d);
        for (int k = 0; k < d; ++k) {
            for (int kp = 0; kp < d; ++kp) {
                m(k, kp) = std::sqrt(ss.p(k) / ss.p(kp)) * o(kp, k);
            }
        }
        return m;
    };
    CMatrix left = w.transpose() * ss.v.conjugate();
    CMatrix right = ss.v.transpose() * w.conjugate();

    DecoderModel dec;
    dec.dim = d;
    dec.stationary = true;
    dec.gauge = w;
    dec.theta = theta;
    dec.j.push_back(-left * weighted(j_eig) * right);
    CMatrix hd = -hermitian_part(left * weighted(h_eig) * right);
    dec.h.push_back(hd);
    dec.initial_state_d = w.transpose() * model.initial_state.conjugate();
    dec.joint_choi = psd_sqrt(ss.rho) * w;
    dec.rank_log.push_back(d);
    dec.min_rho_ratio = ss.p(0);
    return dec;
}

CMatrix time_reversal_gauge(const SensorModel &model, double theta) {
    const int d = model.dim;
    SteadyState ss = steady_state(model, theta);
    CMatrix hs = model.hamiltonian(0.0, theta);
    CMatrix js = model.jump(0.0, theta);
    CMatrix heff = hs - 0.5 * kI * (js.adjoint() * js);
    const CMatrix id = CMatrix::Identity(d, d);
    // Column-major vec(R): J R - R J^T = 0 together with one of two equivalent
    // Hamiltonian conditions, H_eff R = R H_eff^T or H_eff R = R conj(H_eff).
    const CMatrix cj = kron(id, js) - kron(js, id);
    const CMatrix h_candidates[2] = {kron(id, heff) - kron(heff, id),
                                     kron(id, heff) - kron(heff.adjoint(), id)};
    const CMatrix target = static_cast<double>(d) * ss.rho;
    const CMatrix sqrt_target_inv = pinv_threshold(psd_sqrt(target)).inverse;
    for (const CMatrix &ch : h_candidates) {
        CMatrix sys(2 * d * d, d * d);
        sys << cj, ch;
        Eigen::JacobiSVD<CMatrix> svd(sys, Eigen::ComputeFullV);
        const RVector &s = svd.singularValues();
        double scale = std::max(s(0), 1e-300);
        int nullity = 0;
        for (Eigen::Index k = 0; k < s.size(); ++k) {
            if (s(k) <= 1e-9 * scale) {
                ++nullity;
            }
        }
        if (nullity != 1) {
            continue;
        }
        CVector v = svd.matrixV().col(d * d - 1);
        CMatrix r = Eigen::Map<CMatrix>(v.data(), d, d);
        r *= std::sqrt(target.trace().real() / (r * r.adjoint()).trace().real());
        CMatrix w = sqrt_target_inv * r;
        if (!is_unitary(w, 1e-8)) {
            continue;
        }
        Eigen::JacobiSVD<CMatrix> polar(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
        w = polar.matrixU() * polar.matrixV().adjoint();
        DecoderModel dec = stationary_decoder(model, theta, w);
        if (max_abs(dec.j[0] + js) < 1e-8 && max_abs(dec.h[0] + hs) < 1e-8) {
            return w;
        }
    }
    fail(ErrorCode::NoTimeReversalGauge, "no gauge maps the decoder onto (-H_S, -J_S)");
}

CMatrix conjugating_gauge(const SensorModel &model, double theta, const CMatrix &u) {
    if (!is_unitary(u, 1e-12)) {
        fail(ErrorCode::NonUnitaryGauge, "conjugating_gauge expects a unitary");
    }
    CMatrix w = time_reversal_gauge(model, theta) * u.transpose();
    // Re-unitarize against round-off from the null-space solve.
    Eigen::JacobiSVD<CMatrix> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

void write_decoder_csv(const DecoderModel &dec, std::ostream &out, int stride) {
    const int d = dec.dim;
    std::vector<std::string> header{"t"};
    for (const char *name : {"H_D", "J_D"}) {
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) {
                std::string idx = std::to_string(a) + std::to_string(b);
                header.push_back(std::string("Re_") + name + "_" + idx);
                header.push_back(std::string("Im_") + name + "_" + idx);
            }
        }
    }
    CsvTable table(header);
    for (std::size_t n = 0; n < dec.h.size(); n += std::max(stride, 1)) {
        table.row().cell(dec.stationary ? 0.0 : dec.grid.t(static_cast<int>(n)));
        for (const CMatrix *m : {&dec.h[n], &dec.j[n]}) {
            for (int a = 0; a < d; ++a) {
                for (int b = 0; b < d; ++b) {
                    table.cell((*m)(a, b).real()).cell((*m)(a, b).imag());
                }
            }
        }
    }
    out << table.str();
}

}  // namespace qdec
