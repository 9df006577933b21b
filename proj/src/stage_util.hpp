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

// Helpers shared by the digital and analog stages.

#ifndef ISCAP_STAGE_UTIL_HPP
#define ISCAP_STAGE_UTIL_HPP

#include "iscap/conic.hpp"
#include "iscap/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace iscap::detail {

// Tangent point floor for the concave PA term; an antenna idle at the local
// point is linearized here instead of at zero (infinite slope).
inline constexpr double kPaFloor = kActivationTol;

inline MatC restrict(const MatC& m, const std::vector<int>& idx)
{
    MatC out(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j)
            out(i, j) = m(idx[i], idx[j]);
    return out;
}

inline MatC expand(const MatC& m, const std::vector<int>& idx, int n)
{
    MatC out = MatC::Zero(n, n);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j)
            out(idx[i], idx[j]) = m(i, j);
    return out;
}

/// Optimal, or stopped early at a point that is feasible and nearly optimal.
inline bool usable(const Solution& s)
{
    if (s.status == SolveStatus::optimal)
        return true;
    return (s.status == SolveStatus::max_iter || s.status == SolveStatus::numerical_failure) &&
           s.max_violation < 1e-7 && s.rel_gap < 1e-5;
}

/// First-order upper bound of c * p^(1-beta) at max(p0, floor): slope and intercept.
struct Tangent {
    double slope;
    double intercept;
};

inline Tangent pa_tangent(double p0, double c, double beta, double floor)
{
    const double p = std::max(p0, floor);
    const double g = (1.0 - beta) * c * std::pow(p, -beta);
    return {g, c * std::pow(p, 1.0 - beta) - g * p};
}

/// Tangent of unit / log(1+1/eps) * log(1 + x/eps) at x0.
inline Tangent log_tangent(double x0, double unit, double eps)
{
    const double x = std::max(0.0, x0);
    const double scale = unit / std::log1p(1.0 / eps);
    return {scale / (x + eps), scale * (std::log1p(x / eps) - x / (x + eps))};
}

} // namespace iscap::detail

#endif
