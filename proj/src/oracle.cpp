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

#include "qdec/oracle.hpp"

#include <cmath>
#include <string>

#include "qdec/errors.hpp"

namespace qdec::oracle {

namespace {

void check_bins(int n_bins, int dim) {
    if (n_bins < 0 || n_bins > kMaxBins || (dim << n_bins) > kMaxGlobalDim) {
        fail(ErrorCode::TooManyBins, "oracle supports N <= 12 and D*2^N <= 2^14, got N=" + std::to_string(n_bins));
    }
}

CMatrix herm_power(const CMatrix &m, double power, double rel_cut) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
    RVector ev = es.eigenvalues();
    double top = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    RVector f(ev.size());
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        f(k) = ev(k) > rel_cut * top ? std::pow(ev(k), power) : 0.0;
    }
    return es.eigenvectors() * f.asDiagonal() * es.eigenvectors().adjoint();
}

struct BinMaps {
    CMatrix a0;
    CMatrix a1;
};

// Bin operators from the generators, written out independently of propagate.
BinMaps bin_maps(const CMatrix &h, const CMatrix &j, double dt, KrausVariant variant) {
    const auto d = h.rows();
    BinMaps m;
    m.a0 = CMatrix::Identity(d, d) - cplx(0.0, dt) * (h - cplx(0.0, 0.5) * (j.adjoint() * j));
    m.a1 = std::sqrt(dt) * j;
    if (variant == KrausVariant::completed) {
        CMatrix s = m.a0.adjoint() * m.a0 + m.a1.adjoint() * m.a1;
        CMatrix w = herm_power(s, -0.5, 0.0);
        m.a0 = m.a0 * w;
        m.a1 = m.a1 * w;
    }
    return m;
}

// Amplitude branches psi_r for every record r, built bin by bin.
std::vector<CVector> branches(const std::vector<BinMaps> &maps, const CVector &psi0) {
    std::vector<CVector> cur{psi0};
    for (std::size_t n = 0; n < maps.size(); ++n) {
        std::vector<CVector> next(cur.size() * 2);
        for (std::size_t r = 0; r < cur.size(); ++r) {
            next[r] = maps[n].a0 * cur[r];
            next[r | (std::size_t{1} << n)] = maps[n].a1 * cur[r];
        }
        cur = std::move(next);
    }
    return cur;
}

}  // namespace

CMatrix BinnedState::schmidt_matrix() const {
    const int nrec = 1 << n_bins;
    CMatrix m(dim_s, nrec);
    for (int r = 0; r < nrec; ++r) {
        for (int s = 0; s < dim_s; ++s) {
            m(s, r) = global(r * dim_s + s);
        }
    }
    return m;
}

CMatrix BinnedState::system_state() const {
    CMatrix m = schmidt_matrix();
    return m * m.adjoint();
}

BinnedState brute_global_state(const SensorModel &model, double theta, int n_bins, double dt, KrausVariant variant) {
    check_bins(n_bins, model.dim);
    std::vector<BinMaps> maps;
    for (int n = 0; n < n_bins; ++n) {
        double t = n * dt;
        maps.push_back(bin_maps(model.hamiltonian(t, theta), model.jump(t, theta), dt, variant));
    }
    std::vector<CVector> br = branches(maps, model.initial_state);
    BinnedState st;
    st.n_bins = n_bins;
    st.dim_s = model.dim;
    st.global.resize(static_cast<Eigen::Index>(br.size()) * model.dim);
    for (std::size_t r = 0; r < br.size(); ++r) {
        st.global.segment(static_cast<Eigen::Index>(r) * model.dim, model.dim) = br[r];
    }
    return st;
}

BinnedState brute_env_state(const SensorModel &model, double theta, int n_bins, double dt, KrausVariant variant) {
    BinnedState st = brute_global_state(model, theta, n_bins, dt, variant);
    CMatrix m = st.schmidt_matrix();
    // env(r, r') = sum_s psi(r, s) conj(psi(r', s))
    st.env = m.transpose() * m.conjugate();
    return st;
}

double uhlmann_fidelity(const CMatrix &rho1, const CMatrix &rho2) {
    if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols() || rho1.rows() != rho1.cols() ||
        rho1.rows() == 0) {
        fail(ErrorCode::DimensionMismatch, "fidelity needs two nonempty square matrices of equal size");
    }
    const double cut = 1e-12;
    CMatrix s1 = herm_power(rho1, 0.5, cut);
    CMatrix inner = s1 * rho2 * s1;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
    const RVector &ev = es.eigenvalues();
    double top = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    double f = 0.0;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (ev(k) > cut * top) {
            f += std::sqrt(ev(k));
        }
    }
    return f;
}

std::vector<double> brute_counting_distribution(const SensorModel &model, const DecoderModel *dec, double theta,
                                                int n_bins, double dt) {
    const int ds = model.dim;
    const int dd = dec ? dec->dim : 1;
    check_bins(n_bins, ds * dd);
    const CMatrix is = CMatrix::Identity(ds, ds);
    const CMatrix id = CMatrix::Identity(dd, dd);
    CVector psi0;
    if (dec) {
        if (!dec->stationary || dec->dim != ds) {
            fail(ErrorCode::DimensionMismatch, "oracle cascade needs a stationary decoder of sensor size");
        }
        const CMatrix &pi = dec->joint_choi;
        psi0 = CVector::Zero(ds * dd);
        for (int s = 0; s < ds; ++s) {
            for (int a = 0; a < dd; ++a) {
                psi0(s * dd + a) = pi(s, a);
            }
        }
    } else {
        psi0 = model.initial_state;
    }
    psi0.normalize();

    std::vector<BinMaps> maps;
    for (int n = 0; n < n_bins; ++n) {
        double t = n * dt;
        CMatrix hs = model.hamiltonian(t, theta);
        CMatrix js = model.jump(t, theta);
        if (!dec) {
            maps.push_back(bin_maps(hs, js, dt, KrausVariant::completed));
            continue;
        }
        // Kronecker products written out with Eigen's tensor-free block form.
        auto kr = [&](const CMatrix &a, const CMatrix &b) {
            CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
            for (Eigen::Index i = 0; i < a.rows(); ++i) {
                for (Eigen::Index k = 0; k < a.cols(); ++k) {
                    out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
                }
            }
            return out;
        };
        CMatrix c1 = kr(js, id);
        CMatrix c2 = kr(is, dec->j.front());
        // Unidirectional coupling: H' = (i/2)(c1^dag c2 - c2^dag c1), total jump c1 + c2.
        CMatrix h = kr(hs, id) + kr(is, dec->h.front()) + cplx(0.0, 0.5) * (c1.adjoint() * c2 - c2.adjoint() * c1);
        maps.push_back(bin_maps(h, c1 + c2, dt, KrausVariant::completed));
    }
    std::vector<CVector> br = branches(maps, psi0);
    std::vector<double> p(br.size());
    for (std::size_t r = 0; r < br.size(); ++r) {
        p[r] = br[r].squaredNorm();
    }
    return p;
}

double exact_counting_fisher(const SensorModel &model, const DecoderModel *dec, double theta, int n_bins, double dt,
                             double h) {
    std::vector<double> p0 = brute_counting_distribution(model, dec, theta, n_bins, dt);
    std::vector<double> pp = brute_counting_distribution(model, dec, theta + h, n_bins, dt);
    std::vector<double> pm = brute_counting_distribution(model, dec, theta - h, n_bins, dt);
    double f = 0.0;
    for (std::size_t r = 0; r < p0.size(); ++r) {
        if (p0[r] > 0.0) {
            double d = (pp[r] - pm[r]) / (2.0 * h);
            f += d * d / p0[r];
        }
    }
    return f;
}

}  // namespace qdec::oracle
