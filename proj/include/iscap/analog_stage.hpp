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

#ifndef ISCAP_ANALOG_STAGE_HPP
#define ISCAP_ANALOG_STAGE_HPP

#include "iscap/conic.hpp"
#include "iscap/design.hpp"
#include "iscap/digital_stage.hpp"
#include "iscap/scenario.hpp"
#include "iscap/types.hpp"

#include <cstdint>
#include <vector>

namespace iscap {

/// f = vec(F^T): f[i * N_RF + j] = F(i, j).
VecC vec_analog(const MatC& F);
MatC unvec_analog(const VecC& f, int n_tx, int n_rf);

struct SensingEigen {
    VecR lambda;
    std::vector<VecC> q;

    MatC reconstruct() const;
};

/// Eigenpairs of S with eigenvalues above 1e-12 of the largest (negatives dropped).
SensingEigen sensing_eigen(const MatC& S);

/// T_u = E (I kron diag(u)), so that T_u vec(F^T) = F u.
MatC stream_operator(const VecC& u, int n_tx);

/// Linear maps R_f -> R_bar_k and R_f -> R_S for fixed digital variables.
struct LiftMaps {
    int n_tx = 0;
    int n_rf = 0;
    std::vector<MatC> t_w; ///< T_{w_k}
    std::vector<MatC> t_q; ///< sqrt(lambda_i) T_{q_i}

    MatC r_bar(int k, const MatC& rf) const;
    MatC r_s(const MatC& rf) const;
    /// Adjoint of R_f -> sum R_bar_k + R_S: Q -> sum T^H Q T.
    MatC pullback(const MatC& q) const;
};

LiftMaps lift_maps(const std::vector<VecC>& w, const SensingEigen& se, int n_tx);

/// A kron B with A's index major: out(i*nb + j, i2*nb + j2) = A(i,i2) B(j,j2).
MatC kron(const MatC& a, const MatC& b);

struct AnalogSdr {
    ConicProgram program;
    int rf_var = -1;
    std::vector<int> free; ///< positions of vec(F^T) carried by the variable
    std::vector<int> t_vars;

    std::vector<MatC> pack_herm(const MatC& rf_full) const;
    std::vector<double> pack_scalar() const;
    MatC unpack(const Solution& s, int n_full) const;
};

/// Convex subproblem in R_f around `local_rf` (full N_T N_RF size) for fixed
/// (w, S). Positions with ps_on false are pinned to zero by leaving them out
/// of the variable; the rest satisfy [R_f]_nn <= 1/N_T.
AnalogSdr build_analog_sdr(const Scenario& scn, const std::vector<VecC>& w, const MatC& S, const MatC& local_rf,
                           const BoolMat& ps_on, const StageOptions& opt = {});

/// PA + RF + lifted PS relaxed objective as a function of R_f.
double analog_relaxed_objective(const Scenario& scn, const std::vector<VecC>& w, const MatC& S, const MatC& rf);

/// Lifted constraint report with Rx = sum T R_f T^H.
SlackReport lifted_slacks(const Scenario& scn, const std::vector<VecC>& w, const MatC& S, const MatC& rf);

struct AnalogSca {
    StageStatus status = StageStatus::infeasible;
    MatC rf; ///< relaxed optimum R_f (full size)
    std::vector<double> trace;
    int iterations = 0;
};

/// SCA over R_f from init_rf (feasible lifted point, e.g. f f^H of the current F).
AnalogSca sca_analog(const Scenario& scn, const std::vector<VecC>& w, const MatC& S, const MatC& init_rf,
                     const BoolMat& ps_on, const StageOptions& opt = {});

struct Randomized {
    bool ok = false;
    MatC F;
    VecC f_bar;             ///< pre-projection sample of the chosen candidate
    std::vector<VecC> w;    ///< digital variables of the chosen candidate
    MatC S;
    double objective = 0.0; ///< relaxed objective of the chosen candidate
    double best_violation = 0.0;
    int feasible_count = 0;
    bool incumbent_kept = false;
};

struct RandomizeOptions {
    int n_samples = 200;
    std::uint64_t seed = 0;
    /// Also try each sample with (w, S) rescaled by the smallest factor at
    /// which SINR, EH and CRB hold.
    bool allow_scaling = true;
    double feas_tol = 1e-6;
    /// Besides the 1e-9/N_T off threshold, also project each sample with
    /// elements below 1e-6 ... 1e-1 of 1/N_T switched off.
    bool extra_masks = true;
};

/// Gaussian randomization from R_f_bar: samples, projects to modulus
/// 1/sqrt(N_T) (masked where diag(R_f_bar) <= 1e-9/N_T, plus the coarser
/// masks of RandomizeOptions::extra_masks), evaluates exact
/// constraints and the relaxed objective, and returns the feasible minimizer.
/// An incumbent F (optional) enters the candidate set unchanged.
Randomized gaussian_randomize(const MatC& rf_bar, const Scenario& scn, const std::vector<VecC>& w, const MatC& S,
                              const RandomizeOptions& opt, const MatC* incumbent = nullptr);

} // namespace iscap

#endif
