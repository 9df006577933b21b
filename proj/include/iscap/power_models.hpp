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

#ifndef ISCAP_POWER_MODELS_HPP
#define ISCAP_POWER_MODELS_HPP

#include "iscap/scenario.hpp"
#include "iscap/types.hpp"

#include <string>

namespace iscap {

struct PowerBreakdown {
    double p_pa = 0.0;
    double p_rf = 0.0;
    double p_ps = 0.0;
    double p_sw = 0.0;
    double p_static = 0.0;
    double total = 0.0;

    static std::string csv_header();
    std::string csv_row() const;
};

/// sum_n (P_max)^beta (P_n)^(1-beta) / eta_max. Zero-output antennas cost 0.
double pa_power(const VecR& p_out, const HardwareConstants& hw);

/// log(1 + x/eps) / log(1 + 1/eps).
double indicator_relax(double x, double eps);

/// p_rf times the number of chains with v_n above tol.
double rf_power_exact(const VecR& v, double p_rf, double tol = kActivationTol);

/// unit / log(1+1/eps) * sum log(1 + w/eps); used for both RF chains and PSs.
double relaxed_on_off_power(const VecR& weights, double unit_power, double eps);
double rf_power_relaxed(const VecR& v, double p_rf, double eps);
/// Relaxation applied to |F_ij|.
double ps_power_relaxed(const MatC& f, double p_ps, double eps);
/// Same relaxation on |F_ij|^2, the diagonal of the lifted analog variable.
/// This is the PS term the optimization stages minimize.
double ps_power_relaxed_lifted(const MatC& f, double p_ps, double eps);

/// Non-linear (logistic) harvested DC power for RF input p_in.
double eh_dc(double p_in, const EhParams& eh);

/// RF input whose DC output is exactly gamma_dc. Throws saturation_unreachable when gamma_dc >= M.
double eh_threshold_invert(double gamma_dc, const EhParams& eh);

/// P_SW^s (N_RF + N_T N_RF).
double switch_power(const Dimensions& dims, double p_sw);

/// Per-antenna radiated power diag(F (sum w w^H + S) F^H).
VecR antenna_powers(const MatC& f, const std::vector<VecC>& w, const MatC& s);

/// Per-chain weights v_n = sum |w_k[n]|^2 + S_nn.
VecR chain_weights(const std::vector<VecC>& w, const MatC& s);

/// Exact breakdown with indicator counts. rf_count/ps_count are the active
/// elements; throws invalid_argument naming the antenna if P_n exceeds P_max
/// by more than 1e-6 relative.
PowerBreakdown total_power(const VecR& p_out, int rf_count, int ps_count, double p_sw_total,
                           const HardwareConstants& hw);

/// Breakdown of a hybrid design with counts read off (F, w, S).
PowerBreakdown total_power(const MatC& f, const std::vector<VecC>& w, const MatC& s, const Dimensions& dims,
                           const HardwareConstants& hw);

} // namespace iscap

#endif
