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

#include "qdec/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "qdec/errors.hpp"

namespace qdec {

double max_abs(const CMatrix &m) {
    if (m.size() == 0) {
        return 0.0;
    }
    return m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const CMatrix &m, double rel_tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    double scale = max_abs(m);
    if (scale == 0.0) {
        return true;
    }
    return max_abs(m - m.adjoint()) <= rel_tol * scale;
}

CMatrix hermitian_part(const CMatrix &m) { return 0.5 * (m + m.adjoint()); }

static void require_square(const CMatrix &m, const char *who) {
    if (m.rows() != m.cols()) {
        fail(ErrorCode::NonSquare, std::string(who) + ": matrix is not square");
    }
}

CMatrix psd_sqrt(const CMatrix &m) {
    require_square(m, "psd_sqrt");
    if (!is_hermitian(m)) {
        fail(ErrorCode::NonHermitianInput, "psd_sqrt: input violates the Hermiticity tolerance");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m));
    RVector ev = es.eigenvalues();
    double scale = std::max(std::abs(ev.sum()), ev.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (ev(k) < -LinalgTolerances::psd_clip * scale) {
            fail(ErrorCode::NegativeEigenvalue, "psd_sqrt: eigenvalue " + std::to_string(ev(k)) + " below clip threshold");
        }
        ev(k) = std::sqrt(std::max(ev(k), 0.0));
    }
    const CMatrix &v = es.eigenvectors();
    CMatrix r = v * ev.cast<cplx>().asDiagonal() * v.adjoint();
    return hermitian_part(r);
}

CMatrix pd_inv_sqrt(const CMatrix &m) {
    require_square(m, "pd_inv_sqrt");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m));
    RVector ev = es.eigenvalues();
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (!(ev(k) > 0.0)) {
            fail(ErrorCode::NegativeEigenvalue, "pd_inv_sqrt: matrix is not positive definite");
        }
        ev(k) = 1.0 / std::sqrt(ev(k));
    }
    const CMatrix &v = es.eigenvectors();
    return hermitian_part(v * ev.cast<cplx>().asDiagonal() * v.adjoint());
}

double nuclear_norm(const CMatrix &m) {
    require_square(m, "nuclear_norm");
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues().sum();
}

double nuclear_norm_eigen(const CMatrix &m) {
    require_square(m, "nuclear_norm_eigen");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m * m.adjoint()), Eigen::EigenvaluesOnly);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        acc += std::sqrt(std::max(es.eigenvalues()(k), 0.0));
    }
    return acc;
}

PinvResult pinv_threshold(const CMatrix &m, double rel_tol) {
    require_square(m, "pinv_threshold");
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVector &s = svd.singularValues();
    PinvResult out;
    out.inverse = CMatrix::Zero(m.cols(), m.rows());
    if (s.size() == 0 || s(0) == 0.0) {
        return out;
    }
    RVector inv = RVector::Zero(s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (s(k) >= rel_tol * s(0)) {
            inv(k) = 1.0 / s(k);
            ++out.effective_rank;
        }
    }
    out.inverse = svd.matrixV() * inv.cast<cplx>().asDiagonal() * svd.matrixU().adjoint();
    return out;
}

CMatrix kron(const CMatrix &a, const CMatrix &b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

double op_norm(const CMatrix &m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

bool is_unitary(const CMatrix &u, double tol) {
    if (u.rows() != u.cols()) {
        return false;
    }
    return max_abs(u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())) <= tol;
}

CVector row_major_vec(const CMatrix &m) {
    CVector v(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            v(i * m.cols() + j) = m(i, j);
        }
    }
    return v;
}

CMatrix row_major_unvec(const CVector &v, int rows, int cols) {
    if (v.size() != static_cast<Eigen::Index>(rows) * cols) {
        fail(ErrorCode::DimensionMismatch, "row_major_unvec: size mismatch");
    }
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            m(i, j) = v(i * cols + j);
        }
    }
    return m;
}

}  // namespace qdec
