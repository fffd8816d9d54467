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

#include <complex>

#include <Eigen/Dense>

namespace qdec {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

/// Relative tolerances shared by every decomposition in the library.
struct LinalgTolerances {
    static constexpr double hermitian = 1e-12;  // max|M - M^dag| <= tol * max|M|
    static constexpr double psd_clip = 1e-10;   // eigenvalues above -tol * tr are clipped to 0
    static constexpr double pinv = 1e-10;       // singular values below tol * s_max are dropped
};

double max_abs(const CMatrix &m);
bool is_hermitian(const CMatrix &m, double rel_tol = LinalgTolerances::hermitian);
CMatrix hermitian_part(const CMatrix &m);

/// Principal square root of a Hermitian PSD matrix. Slightly negative
/// eigenvalues (above -1e-10 tr) are clipped to zero.
CMatrix psd_sqrt(const CMatrix &m);

/// Inverse principal square root of a Hermitian positive-definite matrix.
CMatrix pd_inv_sqrt(const CMatrix &m);

/// Sum of singular values.
double nuclear_norm(const CMatrix &m);

/// tr sqrt(m m^dag) through a Hermitian eigendecomposition; used for
/// cross-checking nuclear_norm.
double nuclear_norm_eigen(const CMatrix &m);

struct PinvResult {
    CMatrix inverse;
    int effective_rank = 0;
};

PinvResult pinv_threshold(const CMatrix &m, double rel_tol = LinalgTolerances::pinv);

CMatrix kron(const CMatrix &a, const CMatrix &b);

/// Spectral norm (largest singular value).
double op_norm(const CMatrix &m);

bool is_unitary(const CMatrix &u, double tol = 1e-12);

/// Row-major reshape, index i*cols+j. A bipartite vector sum_ij c_ij |i>|j>
/// in kron ordering is the row-major image of the matrix c.
CVector row_major_vec(const CMatrix &m);
CMatrix row_major_unvec(const CVector &v, int rows, int cols);

}  // namespace qdec
