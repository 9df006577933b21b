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

#include "iscap/analog_stage.hpp"

#include "iscap/array_sensing.hpp"
#include "iscap/power_models.hpp"
#include "iscap/rng.hpp"
#include "stage_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iscap {

using detail::expand;
using detail::restrict;
using detail::usable;

VecC vec_analog(const MatC& F)
{
    VecC f(F.size());
    for (Eigen::Index i = 0; i < F.rows(); ++i)
        for (Eigen::Index j = 0; j < F.cols(); ++j)
            f(i * F.cols() + j) = F(i, j);
    return f;
}

MatC unvec_analog(const VecC& f, int n_tx, int n_rf)
{
    if (f.size() != static_cast<Eigen::Index>(n_tx) * n_rf)
        throw Error(ErrorKind::dimension_mismatch, "vec(F^T) length != N_T N_RF");
    MatC F(n_tx, n_rf);
    for (int i = 0; i < n_tx; ++i)
        for (int j = 0; j < n_rf; ++j)
            F(i, j) = f(i * n_rf + j);
    return F;
}

MatC SensingEigen::reconstruct() const
{
    if (q.empty())
        return MatC();
    MatC s = MatC::Zero(q.front().size(), q.front().size());
    for (std::size_t i = 0; i < q.size(); ++i)
        s += lambda(static_cast<Eigen::Index>(i)) * q[i] * q[i].adjoint();
    return s;
}

SensingEigen sensing_eigen(const MatC& S)
{
    SensingEigen se;
    Eigen::SelfAdjointEigenSolver<MatC> es(hermitian_part(S));
    const VecR& ev = es.eigenvalues();
    const double top = ev.size() ? ev.maxCoeff() : 0.0;
    std::vector<double> lam;
    for (Eigen::Index i = ev.size() - 1; i >= 0; --i)
        if (top > 0.0 && ev(i) > 1e-12 * top) {
            lam.push_back(ev(i));
            se.q.push_back(es.eigenvectors().col(i));
        }
    se.lambda = Eigen::Map<VecR>(lam.data(), static_cast<Eigen::Index>(lam.size()));
    return se;
}

MatC stream_operator(const VecC& u, int n_tx)
{
    const auto n_rf = u.size();
    MatC t = MatC::Zero(n_tx, n_tx * n_rf);
    for (int i = 0; i < n_tx; ++i)
        t.block(i, i * n_rf, 1, n_rf) = u.transpose();
    return t;
}

MatC LiftMaps::r_bar(int k, const MatC& rf) const
{
    return t_w.at(k) * rf * t_w[k].adjoint();
}

MatC LiftMaps::r_s(const MatC& rf) const
{
    MatC out = MatC::Zero(n_tx, n_tx);
    for (const auto& t : t_q)
        out += t * rf * t.adjoint();
    return out;
}

MatC LiftMaps::pullback(const MatC& q) const
{
    MatC out = MatC::Zero(n_tx * n_rf, n_tx * n_rf);
    for (const auto& t : t_w)
        out += t.adjoint() * q * t;
    for (const auto& t : t_q)
        out += t.adjoint() * q * t;
    return out;
}

LiftMaps lift_maps(const std::vector<VecC>& w, const SensingEigen& se, int n_tx)
{
    LiftMaps m;
    m.n_tx = n_tx;
    m.n_rf = w.empty() ? (se.q.empty() ? 0 : static_cast<int>(se.q.front().size())) : static_cast<int>(w.front().size());
    for (const auto& wk : w) {
        if (wk.size() != m.n_rf)
            throw Error(ErrorKind::dimension_mismatch, "digital beamformers differ in length");
        m.t_w.push_back(stream_operator(wk, n_tx));
    }
    for (std::size_t i = 0; i < se.q.size(); ++i) {
        if (se.q[i].size() != m.n_rf)
            throw Error(ErrorKind::dimension_mismatch, "eigenvector length != N_RF");
        m.t_q.push_back(std::sqrt(se.lambda(static_cast<Eigen::Index>(i))) * stream_operator(se.q[i], n_tx));
    }
    return m;
}

MatC kron(const MatC& a, const MatC& b)
{
    MatC out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index k = 0; k < a.cols(); ++k)
            out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
    return out;
}

namespace {

MatC digital_covariance(const std::vector<VecC>& w, const MatC& S)
{
    MatC y = S;
    for (const auto& wk : w)
        y += wk * wk.adjoint();
    return y;
}

// sum over streams u of T_u R_f T_u^H, where sum u u^H = y.
MatC lifted_covariance(const MatC& rf, const MatC& y, int n_tx)
{
    const auto n_rf = y.rows();
    MatC out(n_tx, n_tx);
    for (int i = 0; i < n_tx; ++i)
        for (int k = 0; k < n_tx; ++k)
            out(i, k) = rf.block(i * n_rf, k * n_rf, n_rf, n_rf).cwiseProduct(y).sum();
    return out;
}

void check_dims(const Scenario& scn, const std::vector<VecC>& w, const MatC& S, const MatC& rf)
{
    const int nt = scn.dims.n_tx;
    if (static_cast<int>(w.size()) != scn.dims.k_ir)
        throw Error(ErrorKind::dimension_mismatch, "need one w_k per IR");
    const auto nrf = S.rows();
    if (S.cols() != nrf)
        throw Error(ErrorKind::dimension_mismatch, "S must be square");
    for (const auto& wk : w)
        if (wk.size() != nrf)
            throw Error(ErrorKind::dimension_mismatch, "w_k length != N_RF");
    if (rf.rows() != nt * nrf || rf.cols() != nt * nrf)
        throw Error(ErrorKind::dimension_mismatch, "R_f must be N_T N_RF square");
}

} // namespace

std::vector<MatC> AnalogSdr::pack_herm(const MatC& rf_full) const
{
    return {restrict(rf_full, free)};
}

std::vector<double> AnalogSdr::pack_scalar() const
{
    return std::vector<double>(program.scalar_count(), 0.0);
}

MatC AnalogSdr::unpack(const Solution& s, int n_full) const
{
    return expand(s.herm[program.herm_slot(rf_var)], free, n_full);
}

AnalogSdr build_analog_sdr(const Scenario& scn, const std::vector<VecC>& w, const MatC& S, const MatC& local_rf,
                           const BoolMat& ps_on, const StageOptions& opt)
{
    check_dims(scn, w, S, local_rf);
    const int nt = scn.dims.n_tx;
    const int nrf = static_cast<int>(S.rows());
    if (ps_on.rows() != nt || ps_on.cols() != nrf)
        throw Error(ErrorKind::dimension_mismatch, "PS mask must be N_T x N_RF");
    const auto& th = scn.thresholds;
    const auto& hw = scn.hw;
    const double up = 1.0 + opt.margin;

    AnalogSdr out;
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nrf; ++j)
            if (ps_on(i, j))
                out.free.push_back(i * nrf + j);
    const int n = static_cast<int>(out.free.size());
    ConicProgram& p = out.program;
    out.rf_var = p.add_hermitian("Rf", n);
    const int v = out.rf_var;

    const MatC y = digital_covariance(w, S);
    const MatC y_conj = y.conjugate();
    auto lift = [&](const MatC& q) { return restrict(kron(q, y_conj), out.free); };

    for (int a = 0; a < n; ++a) {
        MatC e = MatC::Zero(n, n);
        e(a, a) = -static_cast<double>(nt);
        if (opt.fixed_modulus)
            p.add_equality(AffineExpr(1.0).add_herm(v, e), "modulus");
        else
            p.add_inequality(AffineExpr(1.0).add_herm(v, e), "modulus");
    }

    if (opt.drop_class != "sinr")
        for (int k = 0; k < scn.dims.k_ir; ++k) {
            const MatC hk = scn.h[k] * scn.h[k].adjoint();
            const MatC own = w[k] * w[k].adjoint();
            const double sg = scn.noise_ir[k];
            const MatC c = restrict(kron(hk, own.conjugate()), out.free) / (th.sinr_min[k] * sg) -
                           restrict(kron(hk, (y - own).conjugate()), out.free) / sg;
            p.add_inequality(AffineExpr(-up).add_herm(v, c), "sinr" + std::to_string(k));
        }

    if (scn.dims.k_s > 0 && opt.drop_class != "crb") {
        const FimMap map = FimMap(make_steering_set(scn), scn.dims.dwell, scn.noise_sense).transformed(lift);
        MatC r_ref = restrict(local_rf, out.free);
        const double tr = r_ref.trace().real();
        r_ref += (tr > 1e-12 ? 1e-3 * tr / n : 1.0 / nt) * MatC::Identity(n, n);
        const VecR d = fim_scaling(map.apply(r_ref));
        out.t_vars = schur_crb_blocks(
            p, [&](int a, int b) { return AffineExpr().add_herm(v, map.at(a, b)); }, map.size(),
            th.crb_max * (1.0 - opt.margin), d);
    }

    if (opt.drop_class != "eh")
        for (int j = 0; j < scn.dims.k_er; ++j) {
            const double p_in = eh_threshold_invert(th.eh_dc_min[j], scn.eh[j]);
            p.add_inequality(AffineExpr(-up).add_herm(v, lift(scn.d[j] * scn.d[j].adjoint()) / p_in),
                             "eh" + std::to_string(j));
        }

    std::vector<MatC> ant(nt);
    for (int i = 0; i < nt; ++i) {
        MatC e = MatC::Zero(nt, nt);
        e(i, i) = 1.0;
        ant[i] = lift(e);
        if (opt.drop_class == "power" || ant[i].squaredNorm() == 0.0)
            continue;
        p.add_inequality(AffineExpr(1.0).add_herm(v, -ant[i] / hw.p_ant_max), "power" + std::to_string(i));
    }

    // Objective: PA and PS tangents at the local point, RF term constant.
    const MatC r_loc = restrict(local_rf, out.free);
    const double c = std::pow(hw.p_ant_max, hw.beta_pa) / hw.eta_max;
    MatC coeff = MatC::Zero(n, n);
    double constant = rf_power_relaxed(y.diagonal().real().cwiseMax(0.0), hw.p_rf, hw.eps_indicator);
    for (int i = 0; i < nt; ++i) {
        if (ant[i].squaredNorm() == 0.0)
            continue;
        const auto t = detail::pa_tangent((ant[i] * r_loc).trace().real(), c, hw.beta_pa, detail::kPaFloor);
        coeff += t.slope * ant[i];
        constant += t.intercept;
    }
    for (int a = 0; a < n; ++a) {
        const auto t = detail::log_tangent(r_loc(a, a).real(), hw.p_ps, hw.eps_indicator);
        coeff(a, a) += t.slope;
        constant += t.intercept;
    }
    p.set_objective(AffineExpr(constant).add_herm(v, coeff));
    return out;
}

double analog_relaxed_objective(const Scenario& scn, const std::vector<VecC>& w, const MatC& S, const MatC& rf)
{
    check_dims(scn, w, S, rf);
    const auto& hw = scn.hw;
    const MatC y = digital_covariance(w, S);
    const MatC rx = lifted_covariance(rf, y, scn.dims.n_tx);
    const VecR diag = rf.diagonal().real().cwiseMax(0.0);
    return pa_power(rx.diagonal().real().cwiseMax(0.0), hw) +
           rf_power_relaxed(y.diagonal().real().cwiseMax(0.0), hw.p_rf, hw.eps_indicator) +
           relaxed_on_off_power(diag, hw.p_ps, hw.eps_indicator);
}

SlackReport lifted_slacks(const Scenario& scn, const std::vector<VecC>& w, const MatC& S, const MatC& rf)
{
    check_dims(scn, w, S, rf);
    const int nt = scn.dims.n_tx;
    const MatC y = digital_covariance(w, S);
    const MatC rx = lifted_covariance(rf, y, nt);
    SlackReport r;
    for (int k = 0; k < scn.dims.k_ir; ++k) {
        const MatC own = w[k] * w[k].adjoint();
        const VecC& h = scn.h[k];
        const double sig = (h.adjoint() * lifted_covariance(rf, own, nt) * h)(0, 0).real();
        const double interf = (h.adjoint() * lifted_covariance(rf, y - own, nt) * h)(0, 0).real() + scn.noise_ir[k];
        r.entries.push_back({"sinr[" + std::to_string(k) + "]", sig / interf, scn.thresholds.sinr_min[k], true});
    }
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
    for (int i = 0; i < nt; ++i)
        r.entries.push_back({"power[" + std::to_string(i) + "]", rx(i, i).real(), scn.hw.p_ant_max, false});
    for (Eigen::Index a = 0; a < rf.rows(); ++a)
        r.entries.push_back({"modulus[" + std::to_string(a) + "]", rf(a, a).real(), 1.0 / nt, false});
    return r;
}

AnalogSca sca_analog(const Scenario& scn, const std::vector<VecC>& w, const MatC& S, const MatC& init_rf,
                     const BoolMat& ps_on, const StageOptions& opt)
{
    AnalogSca res;
    const int nf = static_cast<int>(init_rf.rows());
    MatC local = init_rf;
    double prev = std::numeric_limits<double>::infinity();
    bool have = false;
    if (lifted_slacks(scn, w, S, init_rf).feasible(1e-6)) {
        prev = analog_relaxed_objective(scn, w, S, local);
        res.trace.push_back(prev);
        have = true;
    }
    res.status = StageStatus::max_iter;
    for (int it = 1; it <= opt.max_iter; ++it) {
        res.iterations = it;
        const AnalogSdr sdr = build_analog_sdr(scn, w, S, local, ps_on, opt);
        const Solution sol = solve(sdr.program, opt.solver);
        if (!usable(sol)) {
            res.status = have ? StageStatus::warning : StageStatus::infeasible;
            break;
        }
        const MatC cand = sdr.unpack(sol, nf);
        const double obj = analog_relaxed_objective(scn, w, S, cand);
        if (have && !(obj <= prev + 1e-9 * std::abs(prev))) {
            res.status = StageStatus::converged;
            break;
        }
        const double dec = have ? (prev - obj) / std::max(std::abs(prev), 1e-300) : 1.0;
        local = cand;
        prev = obj;
        have = true;
        res.trace.push_back(obj);
        if (dec < opt.rel_tol) {
            res.status = StageStatus::converged;
            break;
        }
    }
    res.rf = local;
    return res;
}

namespace {

// Smallest factor on (w, S) at which SINR, EH and CRB all meet their
// thresholds; +inf when no scaling can (interference-limited SINR).
double restoring_scale(const Scenario& scn, const Design& d)
{
    constexpr double kPad = 1.0 + 1e-8;
    double alpha = 0.0;
    const int k_ir = scn.dims.k_ir;
    for (int k = 0; k < k_ir; ++k) {
        const VecC g = d.F.adjoint() * scn.h[k];
        const double sig = std::norm(g.dot(d.w[k]));
        double interf = (g.adjoint() * d.S * g)(0, 0).real();
        for (int i = 0; i < k_ir; ++i)
            if (i != k)
                interf += std::norm(g.dot(d.w[i]));
        const double gam = scn.thresholds.sinr_min[k] * kPad;
        if (sig <= gam * interf)
            return std::numeric_limits<double>::infinity();
        alpha = std::max(alpha, gam * scn.noise_ir[k] / (sig - gam * interf));
    }
    const auto p_in = eh_input_powers(scn, d);
    for (int j = 0; j < scn.dims.k_er; ++j) {
        const double need = eh_threshold_invert(scn.thresholds.eh_dc_min[j], scn.eh[j]) * kPad;
        if (!(p_in[j] > 0.0))
            return std::numeric_limits<double>::infinity();
        alpha = std::max(alpha, need / p_in[j]);
    }
    if (scn.dims.k_s > 0)
        alpha = std::max(alpha, design_crb(scn, d) * kPad / scn.thresholds.crb_max);
    return alpha;
}

} // namespace

Randomized gaussian_randomize(const MatC& rf_bar, const Scenario& scn, const std::vector<VecC>& w, const MatC& S,
                              const RandomizeOptions& opt, const MatC* incumbent)
{
    check_dims(scn, w, S, rf_bar);
    if (opt.n_samples < 1)
        throw Error(ErrorKind::invalid_argument, "n_samples must be at least 1");
    const int nt = scn.dims.n_tx;
    const int nrf = static_cast<int>(S.rows());
    const auto n = rf_bar.rows();
    const double amp = 1.0 / std::sqrt(static_cast<double>(nt));

    Randomized best;
    best.objective = std::numeric_limits<double>::infinity();
    best.best_violation = std::numeric_limits<double>::infinity();

    auto record = [&](const MatC& F, const VecC& f_bar, const Design& d, bool is_incumbent) {
        ++best.feasible_count;
        const double obj = relaxed_objective(scn, d);
        if (obj < best.objective) {
            best.ok = true;
            best.objective = obj;
            best.F = F;
            best.f_bar = f_bar;
            best.w = d.w;
            best.S = d.S;
            best.incumbent_kept = is_incumbent;
        }
    };
    auto consider = [&](const MatC& F, const VecC& f_bar, bool is_incumbent) {
        Design d{F, w, S};
        const SlackReport rep = check_constraints(scn, d);
        best.best_violation = std::min(best.best_violation, std::max(0.0, -rep.worst()));
        if (rep.feasible(opt.feas_tol))
            record(F, f_bar, d, is_incumbent);
        if (!opt.allow_scaling || is_incumbent)
            return;
        // The projected beam usually has more (or less) array gain than the
        // relaxed one; rescale (w, S) so the binding threshold is met exactly.
        const double alpha = restoring_scale(scn, d);
        if (!std::isfinite(alpha) || !(alpha > 0.0))
            return;
        const double s = std::sqrt(alpha);
        for (auto& wk : d.w)
            wk *= s;
        d.S *= alpha;
        if (check_constraints(scn, d).feasible(opt.feas_tol))
            record(F, f_bar, d, false);
    };

    if (incumbent)
        consider(*incumbent, vec_analog(*incumbent), true);

    Eigen::SelfAdjointEigenSolver<MatC> es(hermitian_part(rf_bar));
    // Eigenvalues at roundoff level of the largest are clipped with the
    // negative ones, so a rank-one input yields exactly its own phases.
    VecR lam = es.eigenvalues();
    const double lam_floor = 1e-12 * std::max(0.0, lam.maxCoeff());
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        lam(i) = lam(i) > lam_floor ? std::sqrt(lam(i)) : 0.0;
    const MatC root = es.eigenvectors() * lam.asDiagonal();
    // The 1e-9/N_T threshold comes first; the coarser ones also switch off
    // elements the interior-point solution only drove to near zero.
    const double off_levels[] = {1e-9, 1e-6, 1e-4, 1e-3, 1e-2, 1e-1};
    Rng rng(opt.seed);
    for (int s = 0; s < opt.n_samples; ++s) {
        const VecC xi = root * rng.complex_normal(n);
        VecC prev_f;
        for (double level : off_levels) {
            VecC f = VecC::Zero(n);
            for (Eigen::Index a = 0; a < n; ++a)
                if (rf_bar(a, a).real() > level / nt)
                    f(a) = std::polar(amp, std::arg(xi(a)));
            if (f.squaredNorm() == 0.0 || (prev_f.size() && f == prev_f))
                continue;
            consider(unvec_analog(f, nt, nrf), xi, false);
            prev_f = f;
            if (!opt.extra_masks)
                break;
        }
    }
    if (best.ok)
        best.best_violation = 0.0;
    return best;
}

} // namespace iscap
