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

#ifndef ISCAP_DESIGN_HPP
#define ISCAP_DESIGN_HPP

#include "iscap/power_models.hpp"
#include "iscap/scenario.hpp"
#include "iscap/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace iscap {

using BoolVec = Eigen::Array<bool, Eigen::Dynamic, 1>;
using BoolMat = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Hybrid transmit design: analog F (N_T x N_RF), digital w_k and S (N_RF space).
struct Design {
    MatC F;
    std::vector<VecC> w;
    MatC S;

    /// F (sum w w^H + S) F^H.
    MatC tx_covariance() const;
    /// sum w w^H + S on the RF-chain side.
    MatC chain_covariance() const;
};

struct SlackEntry {
    std::string name;
    double achieved = 0.0;
    double required = 0.0;
    bool lower_bound = true; ///< achieved >= required, else achieved <= required

    /// Relative margin; negative means violated.
    double rel_slack() const;
};

struct SlackReport {
    std::vector<SlackEntry> entries;

    double worst() const;
    bool feasible(double tol = 1e-6) const;
    /// Class ("sinr", "crb", "eh", "power") of the most violated entry.
    std::string binding_class() const;
};

/// SINR of every IR with the sensing/energy covariance as interference.
std::vector<double> sinr_values(const Scenario& scn, const Design& d);

/// tr(M^-1) of the design; +inf when the FIM is singular.
double design_crb(const Scenario& scn, const Design& d);

/// RF power arriving at each ER.
std::vector<double> eh_input_powers(const Scenario& scn, const Design& d);

/// Every constraint of the original problem recomputed from scratch.
SlackReport check_constraints(const Scenario& scn, const Design& d);

/// Concave PA + relaxed RF + relaxed PS terms (the continuous objective).
double relaxed_objective(const Scenario& scn, const Design& d);

/// Per-chain weights v_n of a design.
VecR design_chain_weights(const Design& d);

/// Full-on analog beamformer with deterministic random phases.
MatC random_phase_analog(int n_tx, int n_rf, std::uint64_t seed);

/// Removes dead hardware without changing F (sum w w^H + S) F^H: chains whose
/// F column is zero lose their digital rows, and F columns of chains with
/// v_n <= kActivationTol are zeroed.
Design prune_inactive(const Design& d);

enum class SchemeId { joint, no_onoff, ps_only, rf_only, digital_full, fixed_pa };

const char* to_string(SchemeId s);
/// Throws invalid_argument on unknown names.
SchemeId scheme_from_string(const std::string& name);
std::vector<SchemeId> all_schemes();

struct OnOffMask {
    BoolVec rf_on;
    BoolMat ps_on;      ///< N_T x N_RF
    VecR rf_weights;    ///< v_n of the design the search started from
    MatR ps_weights;    ///< |f_bar_ij| of the design the search started from

    static OnOffMask all_on(int n_tx, int n_rf);
    /// Chain j is off when rf_on(j) is false or column j of ps_on is all off;
    /// PSs of an off chain are off.
    OnOffMask normalized() const;
    int rf_count() const;
    int ps_count() const;
    std::string key() const;
};

/// 0/1 text grid, one line per antenna, one column per RF chain.
std::string mask_grid(const BoolMat& on);

enum class DesignStatus { converged, max_iter, infeasible, randomization_failed };

const char* to_string(DesignStatus s);

struct DesignResult {
    SchemeId scheme = SchemeId::joint;
    DesignStatus status = DesignStatus::infeasible;
    MatC F;
    std::vector<VecC> w;
    MatC S;
    OnOffMask mask;
    PowerBreakdown power;
    SlackReport slacks;
    std::vector<double> trace; ///< relaxed objective after each AO iteration
    int ao_iterations = 0;
    std::string binding;       ///< constraint class when infeasible
    VecC f_bar;                ///< pre-projection sample behind F (PS weights)
    std::optional<ErrorKind> error; ///< set when an exception aborted the scheme
    bool ps_switching = true;  ///< false: live PSs were held at constant modulus

    bool feasible() const;
    Design design() const { return {F, w, S}; }
    /// PS elements that are on in the mask and nonzero in F.
    BoolMat effective_ps() const;
    /// Chains that are on in the mask and carry power above kActivationTol.
    BoolVec effective_rf() const;
};

} // namespace iscap

#endif
