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

#include "iscap/design.hpp"

#include "iscap/array_sensing.hpp"
#include "iscap/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iscap {

MatC Design::chain_covariance() const
{
    MatC y = S;
    for (const auto& wk : w)
        y += wk * wk.adjoint();
    return y;
}

MatC Design::tx_covariance() const
{
    return F * chain_covariance() * F.adjoint();
}

double SlackEntry::rel_slack() const
{
    if (lower_bound)
        return achieved / required - 1.0;
    return 1.0 - achieved / required;
}

double SlackReport::worst() const
{
    double w = std::numeric_limits<double>::infinity();
    for (const auto& e : entries)
        w = std::min(w, e.rel_slack());
    return w;
}

bool SlackReport::feasible(double tol) const
{
    for (const auto& e : entries)
        if (!(e.rel_slack() >= -tol))
            return false;
    return true;
}

std::string SlackReport::binding_class() const
{
    const SlackEntry* worst_entry = nullptr;
    for (const auto& e : entries)
        if (!worst_entry || e.rel_slack() < worst_entry->rel_slack())
            worst_entry = &e;
    if (!worst_entry)
        return "none";
    const std::string& n = worst_entry->name;
    return n.substr(0, n.find('['));
}

std::vector<double> sinr_values(const Scenario& scn, const Design& d)
{
    std::vector<double> out;
    const int k_ir = scn.dims.k_ir;
    for (int k = 0; k < k_ir; ++k) {
        const VecC g = d.F.adjoint() * scn.h[k]; // effective channel on the chain side
        double interf = (g.adjoint() * d.S * g)(0, 0).real();
        for (int i = 0; i < k_ir; ++i)
            if (i != k)
                interf += std::norm(g.dot(d.w[i]));
        out.push_back(std::norm(g.dot(d.w[k])) / (interf + scn.noise_ir[k]));
    }
    return out;
}

double design_crb(const Scenario& scn, const Design& d)
{
    if (scn.dims.k_s == 0)
        return 0.0;
    try {
        return crb_trace(build_fim(make_steering_set(scn), d.tx_covariance(), scn.dims.dwell, scn.noise_sense));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::unidentifiable)
            return std::numeric_limits<double>::infinity();
        throw;
    }
}

std::vector<double> eh_input_powers(const Scenario& scn, const Design& d)
{
    const MatC rx = d.tx_covariance();
    std::vector<double> out;
    for (const auto& dj : scn.d)
        out.push_back(std::max(0.0, (dj.adjoint() * rx * dj)(0, 0).real()));
    return out;
}

SlackReport check_constraints(const Scenario& scn, const Design& d)
{
    SlackReport r;
    const auto s = sinr_values(scn, d);
    for (std::size_t k = 0; k < s.size(); ++k)
        r.entries.push_back({"sinr[" + std::to_string(k) + "]", s[k], scn.thresholds.sinr_min[k], true});
    if (scn.dims.k_s > 0)
        r.entries.push_back({"crb", design_crb(scn, d), scn.thresholds.crb_max, false});
    const auto p = eh_input_powers(scn, d);
    for (std::size_t j = 0; j < p.size(); ++j)
        r.entries.push_back({"eh[" + std::to_string(j) + "]", eh_dc(p[j], scn.eh[j]), scn.thresholds.eh_dc_min[j], true});
    const VecR pa = antenna_powers(d.F, d.w, d.S);
    for (Eigen::Index n = 0; n < pa.size(); ++n)
        r.entries.push_back({"power[" + std::to_string(n) + "]", pa(n), scn.hw.p_ant_max, false});
    return r;
}

VecR design_chain_weights(const Design& d)
{
    return chain_weights(d.w, d.S);
}

double relaxed_objective(const Scenario& scn, const Design& d)
{
    const auto& hw = scn.hw;
    return pa_power(antenna_powers(d.F, d.w, d.S), hw) +
           rf_power_relaxed(design_chain_weights(d), hw.p_rf, hw.eps_indicator) +
           ps_power_relaxed_lifted(d.F, hw.p_ps, hw.eps_indicator);
}

MatC random_phase_analog(int n_tx, int n_rf, std::uint64_t seed)
{
    Rng rng(seed);
    MatC f(n_tx, n_rf);
    const double amp = 1.0 / std::sqrt(static_cast<double>(n_tx));
    for (int j = 0; j < n_rf; ++j)
        for (int i = 0; i < n_tx; ++i)
            f(i, j) = std::polar(amp, rng.uniform(0.0, 2.0 * kPi));
    return f;
}

Design prune_inactive(const Design& d)
{
    Design out = d;
    const VecR v = design_chain_weights(d);
    for (Eigen::Index j = 0; j < d.F.cols(); ++j) {
        if (out.F.col(j).squaredNorm() == 0.0 || v(j) <= kActivationTol) {
            out.F.col(j).setZero();
            for (auto& wk : out.w)
                wk(j) = 0.0;
            out.S.row(j).setZero();
            out.S.col(j).setZero();
        }
    }
    return out;
}

const char* to_string(SchemeId s)
{
    switch (s) {
    case SchemeId::joint: return "joint";
    case SchemeId::no_onoff: return "no_onoff";
    case SchemeId::ps_only: return "ps_only";
    case SchemeId::rf_only: return "rf_only";
    case SchemeId::digital_full: return "digital_full";
    case SchemeId::fixed_pa: return "fixed_pa";
    }
    return "?";
}

std::vector<SchemeId> all_schemes()
{
    return {SchemeId::joint, SchemeId::no_onoff, SchemeId::ps_only,
            SchemeId::rf_only, SchemeId::digital_full, SchemeId::fixed_pa};
}

SchemeId scheme_from_string(const std::string& name)
{
    for (SchemeId s : all_schemes())
        if (name == to_string(s))
            return s;
    throw Error(ErrorKind::invalid_argument, "unknown scheme '" + name + "'");
}

OnOffMask OnOffMask::all_on(int n_tx, int n_rf)
{
    OnOffMask m;
    m.rf_on = BoolVec::Constant(n_rf, true);
    m.ps_on = BoolMat::Constant(n_tx, n_rf, true);
    m.rf_weights = VecR::Zero(n_rf);
    m.ps_weights = MatR::Zero(n_tx, n_rf);
    return m;
}

OnOffMask OnOffMask::normalized() const
{
    OnOffMask m = *this;
    for (Eigen::Index j = 0; j < ps_on.cols(); ++j) {
        m.rf_on(j) = rf_on(j) && ps_on.col(j).any();
        if (!m.rf_on(j))
            m.ps_on.col(j).setConstant(false);
    }
    return m;
}

int OnOffMask::rf_count() const
{
    return static_cast<int>(rf_on.count());
}

int OnOffMask::ps_count() const
{
    return static_cast<int>(ps_on.count());
}

std::string OnOffMask::key() const
{
    std::string k;
    for (Eigen::Index j = 0; j < rf_on.size(); ++j)
        k += rf_on(j) ? '1' : '0';
    k += '/';
    for (Eigen::Index i = 0; i < ps_on.rows(); ++i)
        for (Eigen::Index j = 0; j < ps_on.cols(); ++j)
            k += ps_on(i, j) ? '1' : '0';
    return k;
}

std::string mask_grid(const BoolMat& on)
{
    std::string g;
    for (Eigen::Index i = 0; i < on.rows(); ++i) {
        for (Eigen::Index j = 0; j < on.cols(); ++j)
            g += on(i, j) ? '1' : '0';
        g += '\n';
    }
    return g;
}

const char* to_string(DesignStatus s)
{
    switch (s) {
    case DesignStatus::converged: return "converged";
    case DesignStatus::max_iter: return "max_iter";
    case DesignStatus::infeasible: return "infeasible";
    case DesignStatus::randomization_failed: return "randomization_failed";
    }
    return "?";
}

bool DesignResult::feasible() const
{
    return (status == DesignStatus::converged || status == DesignStatus::max_iter) && slacks.feasible(1e-6);
}

BoolMat DesignResult::effective_ps() const
{
    BoolMat on(F.rows(), F.cols());
    for (Eigen::Index i = 0; i < F.rows(); ++i)
        for (Eigen::Index j = 0; j < F.cols(); ++j)
            on(i, j) = (mask.ps_on.size() == 0 || mask.ps_on(i, j)) && F(i, j) != cd(0.0);
    return on;
}

BoolVec DesignResult::effective_rf() const
{
    const VecR v = chain_weights(w, S);
    BoolVec on(v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j)
        on(j) = (mask.rf_on.size() == 0 || mask.rf_on(j)) && v(j) > kActivationTol;
    return on;
}

} // namespace iscap
