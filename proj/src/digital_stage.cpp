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

#include "iscap/digital_stage.hpp"

#include "iscap/array_sensing.hpp"
#include "iscap/power_models.hpp"
#include "stage_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iscap {

using detail::expand;
using detail::restrict;
using detail::usable;

namespace {

std::vector<int> active_indices(const BoolVec& rf_on)
{
    std::vector<int> a;
    for (Eigen::Index i = 0; i < rf_on.size(); ++i)
        if (rf_on(i))
            a.push_back(static_cast<int>(i));
    return a;
}

MatC columns(const MatC& f, const std::vector<int>& idx)
{
    MatC out(f.rows(), idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j)
        out.col(j) = f.col(idx[j]);
    return out;
}

void check_dims(const Scenario& scn, const MatC& F, const TxCovariances& c)
{
    const auto n = F.cols();
    if (F.rows() != scn.dims.n_tx)
        throw Error(ErrorKind::dimension_mismatch, "F must have N_T rows");
    if (static_cast<int>(c.R.size()) != scn.dims.k_ir)
        throw Error(ErrorKind::dimension_mismatch, "need one R_k per IR");
    for (const auto& r : c.R)
        if (r.rows() != n || r.cols() != n)
            throw Error(ErrorKind::dimension_mismatch, "R_k must be N_RF x N_RF");
    if (c.S.rows() != n || c.S.cols() != n)
        throw Error(ErrorKind::dimension_mismatch, "S must be N_RF x N_RF");
}

} // namespace

MatC TxCovariances::total() const
{
    MatC y = S;
    for (const auto& r : R)
        y += r;
    return y;
}

TxCovariances zero_covariances(int k, int n)
{
    TxCovariances c;
    c.R.assign(k, MatC::Zero(n, n));
    c.S = MatC::Zero(n, n);
    return c;
}

const char* to_string(StageStatus s)
{
    switch (s) {
    case StageStatus::converged: return "converged";
    case StageStatus::max_iter: return "max_iter";
    case StageStatus::infeasible: return "infeasible";
    case StageStatus::warning: return "warning";
    }
    return "?";
}

std::vector<MatC> DigitalSdr::pack_herm(const TxCovariances& c) const
{
    std::vector<MatC> out;
    for (const auto& r : c.R)
        out.push_back(restrict(r, active));
    out.push_back(restrict(c.S, active));
    return out;
}

std::vector<double> DigitalSdr::pack_scalar() const
{
    return std::vector<double>(program.scalar_count(), 0.0);
}

TxCovariances DigitalSdr::unpack(const Solution& s, int n_chains) const
{
    TxCovariances c;
    for (int v : r_vars)
        c.R.push_back(expand(s.herm[program.herm_slot(v)], active, n_chains));
    c.S = expand(s.herm[program.herm_slot(s_var)], active, n_chains);
    return c;
}

DigitalSdr build_digital_sdr(const Scenario& scn, const MatC& F, const TxCovariances& local, const BoolVec& rf_on,
                             const StageOptions& opt, bool include_rf)
{
    check_dims(scn, F, local);
    if (rf_on.size() != F.cols())
        throw Error(ErrorKind::dimension_mismatch, "rf_on length != F columns");
    const auto& th = scn.thresholds;
    for (double g : th.sinr_min)
        if (!(g > 0.0))
            throw Error(ErrorKind::invalid_argument, "SINR thresholds must be positive");
    for (double g : th.eh_dc_min)
        if (!(g > 0.0))
            throw Error(ErrorKind::invalid_argument, "EH thresholds must be positive");
    if (scn.dims.k_s > 0 && !(th.crb_max > 0.0))
        throw Error(ErrorKind::invalid_argument, "CRB threshold must be positive");

    DigitalSdr out;
    out.active = active_indices(rf_on);
    const int na = static_cast<int>(out.active.size());
    const MatC fa = columns(F, out.active);
    const auto& hw = scn.hw;
    const double up = 1.0 + opt.margin;
    ConicProgram& p = out.program;

    for (int k = 0; k < scn.dims.k_ir; ++k)
        out.r_vars.push_back(p.add_hermitian("R" + std::to_string(k), na));
    out.s_var = p.add_hermitian("S", na);
    std::vector<int> all = out.r_vars;
    all.push_back(out.s_var);

    if (opt.drop_class != "sinr")
        for (int k = 0; k < scn.dims.k_ir; ++k) {
            const VecC g = fa.adjoint() * scn.h[k];
            const MatC hk = g * g.adjoint();
            const double sg = scn.noise_ir[k];
            AffineExpr e(-up);
            for (int v : all)
                e.add_herm(v, v == out.r_vars[k] ? MatC(hk / (th.sinr_min[k] * sg)) : MatC(-hk / sg));
            p.add_inequality(e, "sinr" + std::to_string(k));
        }

    if (scn.dims.k_s > 0 && opt.drop_class != "crb") {
        const FimMap map = FimMap(make_steering_set(scn), scn.dims.dwell, scn.noise_sense)
                               .transformed([&](const MatC& q) { return MatC(fa.adjoint() * q * fa); });
        MatC y_ref = restrict(local.total(), out.active);
        const double tr = y_ref.trace().real();
        if (tr > 1e-12)
            y_ref += 1e-3 * tr / na * MatC::Identity(na, na);
        else
            y_ref = hw.p_ant_max * MatC::Identity(na, na);
        const VecR d = fim_scaling(map.apply(y_ref));
        out.t_vars = schur_crb_blocks(
            p,
            [&](int a, int b) {
                AffineExpr e;
                for (int v : all)
                    e.add_herm(v, map.at(a, b));
                return e;
            },
            map.size(), th.crb_max * (1.0 - opt.margin), d);
    }

    if (opt.drop_class != "eh")
        for (int j = 0; j < scn.dims.k_er; ++j) {
            const double p_in = eh_threshold_invert(th.eh_dc_min[j], scn.eh[j]);
            const VecC g = fa.adjoint() * scn.d[j];
            AffineExpr e(-up);
            for (int v : all)
                e.add_herm(v, g * g.adjoint() / p_in);
            p.add_inequality(e, "eh" + std::to_string(j));
        }

    std::vector<MatC> row_outer(F.rows());
    for (Eigen::Index n = 0; n < F.rows(); ++n) {
        const VecC a = fa.row(n).adjoint();
        row_outer[n] = a * a.adjoint();
        if (opt.drop_class == "power" || a.squaredNorm() == 0.0)
            continue;
        AffineExpr e(1.0);
        for (int v : all)
            e.add_herm(v, -row_outer[n] / hw.p_ant_max);
        p.add_inequality(e, "power" + std::to_string(n));
    }

    // Objective: tangent of the concave PA and RF terms at the local point.
    const MatC y_loc = restrict(local.total(), out.active);
    const double c = std::pow(hw.p_ant_max, hw.beta_pa) / hw.eta_max;
    MatC coeff = MatC::Zero(na, na);
    double constant = ps_power_relaxed_lifted(F, hw.p_ps, hw.eps_indicator);
    for (Eigen::Index n = 0; n < F.rows(); ++n) {
        if (row_outer[n].squaredNorm() == 0.0)
            continue;
        const auto t = detail::pa_tangent((row_outer[n] * y_loc).trace().real(), c, hw.beta_pa, detail::kPaFloor);
        coeff += t.slope * row_outer[n];
        constant += t.intercept;
    }
    if (include_rf && hw.p_rf > 0.0)
        for (int m = 0; m < na; ++m) {
            const auto t = detail::log_tangent(y_loc(m, m).real(), hw.p_rf, hw.eps_indicator);
            coeff(m, m) += t.slope;
            constant += t.intercept;
        }
    AffineExpr obj(constant);
    for (int v : all)
        obj.add_herm(v, coeff);
    p.set_objective(obj);
    return out;
}

DigitalSdr build_digital_sdr(const Scenario& scn, const MatC& F, const TxCovariances& local)
{
    return build_digital_sdr(scn, F, local, BoolVec::Constant(F.cols(), true));
}

double digital_relaxed_objective(const Scenario& scn, const MatC& F, const TxCovariances& c)
{
    const auto& hw = scn.hw;
    const MatC y = c.total();
    const VecR p_out = (F * y * F.adjoint()).diagonal().real().cwiseMax(0.0);
    const VecR v = y.diagonal().real().cwiseMax(0.0);
    return pa_power(p_out, hw) + rf_power_relaxed(v, hw.p_rf, hw.eps_indicator) +
           ps_power_relaxed_lifted(F, hw.p_ps, hw.eps_indicator);
}

SlackReport covariance_slacks(const Scenario& scn, const MatC& F, const TxCovariances& c)
{
    SlackReport r;
    for (int k = 0; k < scn.dims.k_ir; ++k) {
        const VecC g = F.adjoint() * scn.h[k];
        double interf = (g.adjoint() * c.S * g)(0, 0).real() + scn.noise_ir[k];
        for (int i = 0; i < scn.dims.k_ir; ++i)
            if (i != k)
                interf += (g.adjoint() * c.R[i] * g)(0, 0).real();
        const double sig = (g.adjoint() * c.R[k] * g)(0, 0).real();
        r.entries.push_back({"sinr[" + std::to_string(k) + "]", sig / interf, scn.thresholds.sinr_min[k], true});
    }
    const MatC rx = F * c.total() * F.adjoint();
    if (scn.dims.k_s > 0) {
        double crb = std::numeric_limits<double>::infinity();
        try {
            crb = crb_trace(build_fim(make_steering_set(scn), rx, scn.dims.dwell, scn.noise_sense));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::unidentifiable)
                throw;
        }
        r.entries.push_back({"crb", crb, scn.thresholds.crb_max, false});
    }
    for (int j = 0; j < scn.dims.k_er; ++j) {
        const double p_in = std::max(0.0, (scn.d[j].adjoint() * rx * scn.d[j])(0, 0).real());
        r.entries.push_back({"eh[" + std::to_string(j) + "]", eh_dc(p_in, scn.eh[j]), scn.thresholds.eh_dc_min[j], true});
    }
    for (Eigen::Index n = 0; n < rx.rows(); ++n)
        r.entries.push_back({"power[" + std::to_string(n) + "]", rx(n, n).real(), scn.hw.p_ant_max, false});
    return r;
}

TxCovariances recover_rank_one(const std::vector<MatC>& r_bar, const MatC& s_bar, const MatC& F,
                               const std::vector<VecC>& h)
{
    if (r_bar.size() != h.size())
        throw Error(ErrorKind::dimension_mismatch, "need one channel per R_k");
    TxCovariances out;
    out.S = s_bar;
    for (std::size_t k = 0; k < r_bar.size(); ++k) {
        const MatC& rk = r_bar[k];
        if (rk.rows() != F.cols() || s_bar.rows() != F.cols())
            throw Error(ErrorKind::dimension_mismatch, "covariance size != F columns");
        const VecC g = F.adjoint() * h[k];
        const VecC rg = rk * g;
        const double gain = g.dot(rg).real();
        VecC w = VecC::Zero(rk.rows());
        if (gain > 0.0)
            w = rg / std::sqrt(gain);
        else if (rk.norm() > 0.0)
            throw Error(ErrorKind::degenerate_recovery, "zero beam gain for user " + std::to_string(k));
        const MatC rw = w * w.adjoint();
        out.S += rk - rw;
        out.R.push_back(rw);
        out.w.push_back(w);
    }
    out.S = hermitian_part(out.S);
    return out;
}

namespace {

struct Attempt {
    bool ok = false;
    TxCovariances cov;
    SolveStatus status = SolveStatus::numerical_failure;
};

Attempt solve_step(const Scenario& scn, const MatC& F, const TxCovariances& local, const BoolVec& rf_on,
                   const StageOptions& opt, bool include_rf)
{
    Attempt a;
    const DigitalSdr sdr = build_digital_sdr(scn, F, local, rf_on, opt, include_rf);
    const Solution sol = solve(sdr.program, opt.solver);
    a.status = sol.status;
    if (!usable(sol))
        return a;
    a.ok = true;
    a.cov = sdr.unpack(sol, static_cast<int>(F.cols()));
    return a;
}

std::string diagnose(const Scenario& scn, const MatC& F, const TxCovariances& local, const BoolVec& rf_on,
                     const StageOptions& opt)
{
    for (const char* cls : {"sinr", "crb", "eh", "power"}) {
        StageOptions o = opt;
        o.drop_class = cls;
        if (solve_step(scn, F, local, rf_on, o, false).ok)
            return cls;
    }
    return "multiple";
}

} // namespace

DigitalResult sca_digital(const Scenario& scn, const MatC& F, const TxCovariances* init, const BoolVec& rf_on,
                          const StageOptions& opt)
{
    DigitalResult res;
    const int n = static_cast<int>(F.cols());
    TxCovariances local;
    double prev = std::numeric_limits<double>::infinity();
    bool have = false;
    if (init && covariance_slacks(scn, F, *init).feasible(1e-6)) {
        local = *init;
        prev = digital_relaxed_objective(scn, F, local);
        have = true;
    } else {
        local = init ? *init : zero_covariances(scn.dims.k_ir, n);
        Scenario fixed = scn;
        fixed.hw.beta_pa = 0.0;
        try {
            const Attempt a = solve_step(fixed, F, local, rf_on, opt, false);
            if (a.ok) {
                local = a.cov;
                prev = digital_relaxed_objective(scn, F, local);
                have = true;
            } else {
                res.binding = a.status == SolveStatus::infeasible ? diagnose(fixed, F, local, rf_on, opt) : "solver";
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::saturation_unreachable)
                throw;
            res.binding = "eh";
        }
        if (!have) {
            res.status = StageStatus::infeasible;
            return res;
        }
    }
    res.trace.push_back(prev);
    res.status = StageStatus::max_iter;
    for (int it = 1; it <= opt.max_iter; ++it) {
        res.iterations = it;
        const Attempt a = solve_step(scn, F, local, rf_on, opt, true);
        if (!a.ok) {
            res.status = StageStatus::warning;
            break;
        }
        const double obj = digital_relaxed_objective(scn, F, a.cov);
        if (!(obj <= prev + 1e-9 * std::abs(prev))) {
            // The surrogate step did not improve the true objective (solver
            // tolerance); keep the incumbent.
            res.status = StageStatus::converged;
            break;
        }
        local = a.cov;
        res.trace.push_back(obj);
        const double dec = (prev - obj) / std::max(std::abs(prev), 1e-300);
        prev = obj;
        if (dec < opt.rel_tol) {
            res.status = StageStatus::converged;
            break;
        }
    }
    res.relaxed = local;
    res.recovered = recover_rank_one(local.R, local.S, F, scn.h);
    return res;
}

} // namespace iscap
