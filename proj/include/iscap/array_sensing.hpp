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

#ifndef ISCAP_ARRAY_SENSING_HPP
#define ISCAP_ARRAY_SENSING_HPP

#include "iscap/conic.hpp"
#include "iscap/types.hpp"

#include <functional>
#include <vector>

namespace iscap {

struct Scenario;

/// ULA response with the array centre as phase reference.
VecC steering(double theta, int n);

/// d/dtheta of steering(theta, n).
VecC steering_derivative(double theta, int n);

struct SteeringSet {
    MatC A, V, A_dot, V_dot; ///< receive/transmit responses and derivatives, one column per target
    VecC b;                  ///< reflection coefficients (diagonal of B)

    int targets() const { return static_cast<int>(b.size()); }
};

SteeringSet make_steering_set(const std::vector<double>& theta, const std::vector<cd>& beta, int n_tx, int n_rx);
SteeringSet make_steering_set(const Scenario& scn);

/// Real 3K x 3K Fisher information for (theta, Re b, Im b), scaled by 2/sigma^2.
MatR build_fim(const SteeringSet& ss, const MatC& rx, int dwell, double sigma_s2);

/// FIM as a linear map of the transmit covariance: M_ab = tr(Q_ab Rx) with
/// Hermitian Q_ab (N_T x N_T). Only a <= b is stored; index via at().
class FimMap {
public:
    FimMap(const SteeringSet& ss, int dwell, double sigma_s2);

    int size() const { return n_; }
    const MatC& at(int a, int b) const { return q_[index(a, b)]; }

    /// M(Rx) through the coefficient matrices.
    MatR apply(const MatC& rx) const;

    /// Pulls every coefficient back through Q -> T(Q), e.g. Q -> F^H Q F.
    FimMap transformed(const std::function<MatC(const MatC&)>& t) const;

private:
    FimMap() = default;
    int index(int a, int b) const;

    int n_ = 0;
    std::vector<MatC> q_;
};

/// tr(M^-1); throws Error(unidentifiable) when the unit-diagonal form D M D
/// (D = diag(M)^-1/2) has min eig < 1e-10 max eig.
double crb_trace(const MatR& m);

/// Adds the Schur-complement form of tr(M(x)^-1) <= crb_max to p:
/// 3K blocks [[D M D, e_i], [e_i^T, t_i]] >= 0 and sum d_i^2 t_i <= crb_max.
/// entry(a, b) returns the affine expression of M_ab in p's variables; the
/// diagonal congruence D keeps the blocks well scaled (pass ones for the
/// literal form). Returns the t_i variable indices.
std::vector<int> schur_crb_blocks(ConicProgram& p, const std::function<AffineExpr(int, int)>& entry, int size,
                                  double crb_max, const VecR& d);

/// D = diag(1/sqrt(M_aa)) clipped against tiny diagonals; ones when m is empty.
VecR fim_scaling(const MatR& m);

} // namespace iscap

#endif
