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

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qdec/linalg.hpp"

namespace qdec::testing {

inline CMatrix random_matrix(std::mt19937_64 &rng, int rows, int cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            m(i, j) = cplx(n(rng), n(rng));
        }
    }
    return m;
}

inline CMatrix random_hermitian(std::mt19937_64 &rng, int d) {
    CMatrix a = random_matrix(rng, d, d);
    return 0.5 * (a + a.adjoint());
}

inline CMatrix random_psd(std::mt19937_64 &rng, int d) {
    CMatrix a = random_matrix(rng, d, d);
    return a * a.adjoint();
}

// Haar-ish unitary from the QR factor of a Gaussian matrix.
inline CMatrix random_unitary(std::mt19937_64 &rng, int d) {
    Eigen::HouseholderQR<CMatrix> qr(random_matrix(rng, d, d));
    CMatrix q = qr.householderQ();
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < d; ++k) {
        cplx ph = r(k, k) / std::abs(r(k, k));
        q.col(k) *= ph;
    }
    return q;
}

inline CMatrix diag(std::initializer_list<cplx> v) {
    CMatrix m = CMatrix::Zero(static_cast<int>(v.size()), static_cast<int>(v.size()));
    int k = 0;
    for (cplx x : v) {
        m(k, k) = x;
        ++k;
    }
    return m;
}

inline double rel_frobenius(const CMatrix &a, const CMatrix &b) {
    double nb = b.norm();
    return (a - b).norm() / (nb > 0 ? nb : 1.0);
}

inline CMatrix sigma_x() {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 1) = m(1, 0) = 1.0;
    return m;
}

inline CMatrix sigma_z() { return diag({1.0, -1.0}); }

// 1 - R^2 of a least-squares line through (x, y).
inline double r_squared(const std::vector<double> &x, const std::vector<double> &y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy * sxy / (sxx * syy);
}

inline double fit_slope(const std::vector<double> &x, const std::vector<double> &y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace qdec::testing
