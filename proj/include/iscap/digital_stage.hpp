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

#ifndef ISCAP_DIGITAL_STAGE_HPP
#define ISCAP_DIGITAL_STAGE_HPP

#include "iscap/conic.hpp"
#include "iscap/design.hpp"
#include "iscap/scenario.hpp"
#include "iscap/types.hpp"

#include <string>
#include <vector>

namespace iscap {

/// Digital-side covariances. R and S are N_RF x N_RF (N_RF = F.cols()).
struct TxCovariances {
    std::vector<MatC> R;
    MatC S;
    std::vector<VecC> w; ///< filled by recover_rank_one

    MatC total() const; ///< sum R_k + S
};

/// Zero covariances for k users on n chains.
TxCovariances zero_covariances(int k, int n);

enum class StageStatus { converged, max_iter, infeasible, warning };

const char* to_string(StageStatus s);

struct StageOptions {
    int max_iter = 50;
    double rel_tol = 1e-5;
    /// Thresholds are tightened by this relative margin inside the solver.
    double margin = 2e-6;
    SolverSettings solver;
    /// Constraint class left out of the subproblem ("sinr", "crb", "eh",
    /// "power"); used to name the binding class of an infeasible instance.
    std::string drop_class;
    /// Analog stage only: unmasked elements keep modulus 1/sqrt(N_T) exactly
    /// (hardware without PS switching) instead of the relaxed upper bound.
    bool fixed_modulus = false;
};

struct DigitalSdr {
    ConicProgram program;
    std::vector<int> r_vars; ///< one per IR
    int s_var = -1;
    std::vector<int> active; ///< chain indices carried by the variables
    std::vector<int> t_vars; ///< Schur slacks

    /// Variable values of a covariance set (restricted to active chains).
    std::vector<MatC> pack_herm(const TxCovariances& c) const;
    std::vector<double> pack_scalar() const;
    /// Full-size covariances from a solution.
    TxCovariances unpack(const Solution& s, int n_chains) const;
};

/// Convex subproblem around `local`: SINR, Schur-CRB, EH and per-antenna
/// constraints on the active chains, objective the Taylor upper bound of the
/// PA and RF terms plus the constant relaxed PS term. With include_rf false the
/// RF term is omitted (used for the initial point).
DigitalSdr build_digital_sdr(const Scenario& scn, const MatC& F, const TxCovariances& local, const BoolVec& rf_on,
                             const StageOptions& opt = {}, bool include_rf = true);
DigitalSdr build_digital_sdr(const Scenario& scn, const MatC& F, const TxCovariances& local);

/// True relaxed objective of a covariance set under F: PA + relaxed RF + relaxed PS.
double digital_relaxed_objective(const Scenario& scn, const MatC& F, const TxCovariances& c);

/// Lifted-form constraint report (SINR with R_k, CRB, EH, antenna power).
SlackReport covariance_slacks(const Scenario& scn, const MatC& F, const TxCovariances& c);

struct DigitalResult {
    StageStatus status = StageStatus::infeasible;
    TxCovariances relaxed;   ///< SCA output before recovery
    TxCovariances recovered; ///< rank-one w, R_k = w w^H, S
    std::vector<double> trace;
    int iterations = 0;
    std::string binding; ///< constraint class when infeasible
};

/// SCA on the digital SDR. Without init (or with an init failing the lifted
/// constraints) the initial point is the minimizer of the fixed-efficiency
/// problem; trace[0] is the objective of the initial point.
DigitalResult sca_digital(const Scenario& scn, const MatC& F, const TxCovariances* init, const BoolVec& rf_on,
                          const StageOptions& opt = {});

/// Rank-one reconstruction w_k = (g^H R_k g)^(-1/2) R_k g with g = F^H h_k,
/// S = S_bar + sum R_bar - sum w w^H. Throws degenerate_recovery on zero gain.
TxCovariances recover_rank_one(const std::vector<MatC>& r_bar, const MatC& s_bar, const MatC& F,
                               const std::vector<VecC>& h);

} // namespace iscap

#endif
