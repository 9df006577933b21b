// SPDX-License-Identifier: Apache-2.0
//
// iscap-hbf: energy-efficient hybrid beamforming with on-off control
// Copyright (C) 2026 The iscap-hbf authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef ISCAP_TEST_SUPPORT_HPP
#define ISCAP_TEST_SUPPORT_HPP

#include "iscap/rng.hpp"
#include "iscap/types.hpp"

#include <cmath>

namespace iscap::testing {

inline MatC random_matrix(Rng& rng, int rows, int cols)
{
    MatC g(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            g(i, j) = rng.complex_normal();
    return g;
}

/// Random PSD matrix of the given rank.
inline MatC random_psd(Rng& rng, int n, int rank)
{
    const MatC g = random_matrix(rng, n, rank);
    return g * g.adjoint() / rank;
}

/// Constant-modulus analog matrix, entries of modulus 1/sqrt(rows).
inline MatC random_cm(Rng& rng, int rows, int cols)
{
    MatC f(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            f(i, j) = std::polar(1.0 / std::sqrt(static_cast<double>(rows)), rng.uniform(0.0, 2.0 * kPi));
    return f;
}

inline double min_eig(const MatC& a)
{
    Eigen::SelfAdjointEigenSolver<MatC> es(hermitian_part(a));
    return es.eigenvalues()(0);
}

} // namespace iscap::testing

#endif
