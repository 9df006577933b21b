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

#include "iscap/ao_driver.hpp"

#include "iscap/power_models.hpp"
#include "iscap/rng.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>

namespace iscap {

namespace {

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

TxCovariances covariances_of(const Design& d)
{
    TxCovariances c;
    for (const auto& wk : d.w) {
        c.R.push_back(wk * wk.adjoint());
        c.w.push_back(wk);
    }
    c.S = d.S;
    return c;
}

Design apply_mask(Design d, const OnOffMask& mask)
{
    for (Eigen::Index j = 0; j < d.F.cols(); ++j) {
        for (Eigen::Index i = 0; i < d.F.rows(); ++i)
            if (!mask.ps_on(i, j))
                d.F(i, j) = 0.0;
        if (!mask.rf_on(j)) {
            for (auto& wk : d.w)
                wk(j) = 0.0;
            d.S.row(j).setZero();
            d.S.col(j).setZero();
        }
    }
    return d;
}

void finish(DesignResult& r, const Scenario& scn, const Design& d)
{
    const Design clean = prune_inactive(d);
    r.F = clean.F;
    r.w = clean.w;
    r.S = clean.S;
    r.slacks = check_constraints(scn, clean);
    if (r.status != DesignStatus::infeasible && !r.slacks.feasible(1e-6)) {
        r.status = DesignStatus::infeasible;
        r.binding = r.slacks.binding_class();
    }
}

} // namespace

DesignResult run_ao(const Scenario& scn, const OnOffMask& mask_in, const Design* warm, const AoOptions& opt,
                    bool ps_switching)
{
    StageOptions analog = opt.analog;
    analog.fixed_modulus = !ps_switching;
    DesignResult res;
    res.ps_switching = ps_switching;
    const OnOffMask mask = mask_in.normalized();
    res.mask = mask;
    const int nt = static_cast<int>(mask.ps_on.rows());
    const int nrf = static_cast<int>(mask.ps_on.cols());
    const std::uint64_t mask_seed = fnv1a(mask.key());

    Design start;
    if (warm) {
        start = apply_mask(*warm, mask);
    } else {
        start.F = random_phase_analog(nt, nrf, derive_seed(scn.seed, 0xF0));
        start = apply_mask(Design{start.F, std::vector<VecC>(scn.dims.k_ir, VecC::Zero(nrf)), MatC::Zero(nrf, nrf)},
                           mask);
    }
    const TxCovariances warm_cov = covariances_of(start);
    DigitalResult dig = sca_digital(scn, start.F, warm ? &warm_cov : nullptr, mask.rf_on, opt.digital);
    if (dig.status == StageStatus::infeasible) {
        res.status = DesignStatus::infeasible;
        res.binding = dig.binding;
        res.F = start.F;
        return res;
    }
    Design cur{start.F, dig.recovered.w, dig.recovered.S};
    double prev = relaxed_objective(scn, cur);
    res.trace.push_back(prev);
    res.f_bar = vec_analog(cur.F);
    res.ps_switching = ps_switching;
    res.status = DesignStatus::max_iter;

    for (int it = 1; it <= opt.max_outer; ++it) {
        res.ao_iterations = it;
        const VecC f = vec_analog(cur.F);
        const AnalogSca an = sca_analog(scn, cur.w, cur.S, f * f.adjoint(), mask.ps_on, analog);
        RandomizeOptions ro = opt.randomize;
        ro.seed = derive_seed(scn.seed ^ mask_seed, static_cast<std::uint64_t>(it));
        const Randomized rnd = gaussian_randomize(an.rf, scn, cur.w, cur.S, ro, &cur.F);
        if (!rnd.ok) {
            res.status = DesignStatus::randomization_failed;
            break;
        }
        Design next{rnd.F, rnd.w, rnd.S};
        const TxCovariances init = covariances_of(next);
        dig = sca_digital(scn, next.F, &init, mask.rf_on, opt.digital);
        if (dig.status != StageStatus::infeasible) {
            next.w = dig.recovered.w;
            next.S = dig.recovered.S;
        }
        const double obj = relaxed_objective(scn, next);
        if (!(obj <= prev + 1e-9 * std::abs(prev)) || !check_constraints(scn, next).feasible(1e-6)) {
            res.status = DesignStatus::converged;
            break;
        }
        const double dec = (prev - obj) / std::max(std::abs(prev), 1e-300);
        cur = next;
        prev = obj;
        res.trace.push_back(obj);
        res.f_bar = rnd.incumbent_kept ? vec_analog(cur.F) : rnd.f_bar;
        if (dec < opt.rel_tol) {
            res.status = DesignStatus::converged;
            break;
        }
    }
    finish(res, scn, cur);
    return res;
}

HardwareCount scheme_hardware(const Design& d, SchemeId scheme)
{
    const VecR v = chain_weights(d.w, d.S);
    const int n_rf = static_cast<int>(d.F.cols());
    const int all_ps = static_cast<int>(d.F.size());
    int rf_ind = 0, ps_ind = 0, rf_cols = 0;
    for (int j = 0; j < n_rf; ++j) {
        rf_ind += v(j) > kActivationTol;
        int col = 0;
        for (Eigen::Index i = 0; i < d.F.rows(); ++i)
            col += d.F(i, j) != cd(0.0);
        ps_ind += col;
        rf_cols += col > 0;
    }
    switch (scheme) {
    case SchemeId::joint:
    case SchemeId::fixed_pa: return {rf_ind, ps_ind};
    case SchemeId::no_onoff: return {n_rf, all_ps};
    case SchemeId::rf_only: return {rf_ind, all_ps};
    case SchemeId::ps_only: return {rf_cols, ps_ind};
    case SchemeId::digital_full: return {rf_ind, 0};
    }
    throw Error(ErrorKind::invalid_argument, "unknown scheme");
}

PowerBreakdown scheme_power(const Scenario& scn, const Design& d, SchemeId scheme)
{
    const VecR p_out = antenna_powers(d.F, d.w, d.S).cwiseMax(0.0);
    const HardwareCount hc = scheme_hardware(d, scheme);
    const double sw = scheme == SchemeId::digital_full ? scn.hw.p_sw * scn.dims.n_tx
                                                       : switch_power(scn.dims, scn.hw.p_sw);
    return total_power(p_out, hc.rf, hc.ps, sw, scn.hw);
}

namespace {

// Shares AO solves between the schemes of one scenario. Every reoptimization
// starts from its track's all-on baseline, so a mask determines its result.
// The fixed track keeps all live PSs at constant modulus (no PS switching).
class InstanceSolver {
public:
    enum Track { switching = 0, fixed = 1 };

    InstanceSolver(const Scenario& scn, const AoOptions& opt) : scn_(scn), opt_(opt) {}

    DesignResult priced(const DesignResult& raw, SchemeId scheme) const
    {
        DesignResult r = raw;
        r.scheme = scheme;
        if (r.status == DesignStatus::infeasible || !r.F.size() ||
            r.w.size() != static_cast<std::size_t>(scn_.dims.k_ir) || !r.S.size()) {
            r.power = PowerBreakdown{};
            r.power.total = std::numeric_limits<double>::infinity();
            return r;
        }
        r.power = scheme_power(scn_, r.design(), scheme);
        return r;
    }

    const DesignResult& baseline(Track t)
    {
        auto& b = tracks_[t].baseline;
        if (!b)
            b = run_ao(scn_, OnOffMask::all_on(scn_.dims.n_tx, scn_.dims.n_rf), nullptr, opt_, t == switching);
        return *b;
    }

    const DesignResult& under(Track t, const OnOffMask& mask)
    {
        const OnOffMask m = mask.normalized();
        auto& cache = tracks_[t].cache;
        const std::string key = m.key();
        if (auto it = cache.find(key); it != cache.end())
            return it->second;
        const DesignResult& base = baseline(t);
        DesignResult r;
        if (base.status == DesignStatus::infeasible) {
            r = run_ao(scn_, m, nullptr, opt_, t == switching);
        } else {
            const Design warm = base.design();
            r = run_ao(scn_, m, &warm, opt_, t == switching);
        }
        r.mask.rf_weights = mask.rf_weights;
        r.mask.ps_weights = mask.ps_weights;
        return cache.emplace(key, std::move(r)).first->second;
    }

    Reoptimizer reopt(Track t, SchemeId scheme)
    {
        return [this, t, scheme](const OnOffMask& m) { return priced(under(t, m), scheme); };
    }

    DesignResult rf_search(Track t, SchemeId scheme)
    {
        return rf_onoff_search(scn_, priced(baseline(t), scheme), reopt(t, scheme)).best;
    }

    DesignResult ps_search(const DesignResult& from, SchemeId scheme)
    {
        return ps_onoff_search(scn_, priced(from, scheme), reopt(switching, scheme), opt_.ps_schedule).best;
    }

    DesignResult no_onoff() { return priced(baseline(fixed), SchemeId::no_onoff); }

    DesignResult rf_only()
    {
        if (!rf_only_)
            rf_only_ = rf_search(fixed, SchemeId::rf_only);
        return *rf_only_;
    }

    DesignResult ps_only()
    {
        if (!ps_only_)
            ps_only_ = ps_search(baseline(switching), SchemeId::ps_only);
        return *ps_only_;
    }

    // RF search then PS search; the partial schemes' choices are also
    // candidates, so the result is never worse than any of them.
    DesignResult joint(SchemeId label)
    {
        DesignResult best = ps_search(rf_search(switching, SchemeId::joint), SchemeId::joint);
        for (const DesignResult& other : {priced(baseline(fixed), SchemeId::joint), priced(rf_only(), SchemeId::joint),
                                          priced(ps_only(), SchemeId::joint)})
            if (other.feasible() && (!best.feasible() || other.power.total < best.power.total))
                best = other;
        best.scheme = label;
        return best;
    }

private:
    struct TrackState {
        std::optional<DesignResult> baseline;
        std::map<std::string, DesignResult> cache;
    };

    Scenario scn_;
    AoOptions opt_;
    TrackState tracks_[2];
    std::optional<DesignResult> rf_only_, ps_only_;
};

OnOffMask digital_all_on(int nt)
{
    OnOffMask all;
    all.rf_on = BoolVec::Constant(nt, true);
    all.ps_on = BoolMat::Constant(nt, nt, false);
    all.ps_on.matrix().diagonal().setConstant(true);
    all.rf_weights = VecR::Zero(nt);
    all.ps_weights = MatR::Zero(nt, nt);
    return all;
}

// Fully digital: one chain per antenna, F the identity on the live chains.
DesignResult digital_under_mask(const Scenario& scn, const OnOffMask& mask, const AoOptions& opt)
{
    const int nt = scn.dims.n_tx;
    DesignResult r;
    r.scheme = SchemeId::digital_full;
    r.mask = mask;
    MatC f = MatC::Identity(nt, nt);
    for (int j = 0; j < nt; ++j)
        if (!mask.rf_on(j))
            f.col(j).setZero();
    r.F = f;
    const DigitalResult dig = sca_digital(scn, f, nullptr, mask.rf_on, opt.digital);
    if (dig.status == StageStatus::infeasible) {
        r.status = DesignStatus::infeasible;
        r.binding = dig.binding;
        r.power.total = std::numeric_limits<double>::infinity();
        return r;
    }
    r.status = dig.status == StageStatus::converged ? DesignStatus::converged : DesignStatus::max_iter;
    r.trace = dig.trace;
    r.ao_iterations = dig.iterations;
    finish(r, scn, Design{f, dig.recovered.w, dig.recovered.S});
    r.power = scheme_power(scn, r.design(), SchemeId::digital_full);
    if (r.status == DesignStatus::infeasible)
        r.power.total = std::numeric_limits<double>::infinity();
    return r;
}

DesignResult digital_full(const Scenario& scn, const AoOptions& opt)
{
    std::map<std::string, DesignResult> cache;
    auto solve_mask = [&](const OnOffMask& mask) {
        const std::string key = mask.key();
        if (auto it = cache.find(key); it != cache.end())
            return it->second;
        return cache.emplace(key, digital_under_mask(scn, mask, opt)).first->second;
    };
    const DesignResult base = solve_mask(digital_all_on(scn.dims.n_tx));
    if (base.status == DesignStatus::infeasible)
        return base;
    return rf_onoff_search(scn, base, solve_mask).best;
}

DesignResult run_scheme(InstanceSolver& solver, std::unique_ptr<InstanceSolver>& fixed, const Scenario& scn,
                        SchemeId scheme, const AoOptions& opt)
{
    switch (scheme) {
    case SchemeId::joint: return solver.joint(SchemeId::joint);
    case SchemeId::no_onoff: return solver.no_onoff();
    case SchemeId::rf_only: return solver.rf_only();
    case SchemeId::ps_only: return solver.ps_only();
    case SchemeId::digital_full: return digital_full(scn, opt);
    case SchemeId::fixed_pa: {
        // Designed as if the PA efficiency were fixed, reported with the real PA.
        if (!fixed) {
            Scenario lin = scn;
            lin.hw.beta_pa = 0.0;
            fixed = std::make_unique<InstanceSolver>(lin, opt);
        }
        DesignResult r = fixed->joint(SchemeId::fixed_pa);
        if (r.status != DesignStatus::infeasible)
            r.power = scheme_power(scn, r.design(), SchemeId::fixed_pa);
        return r;
    }
    }
    throw Error(ErrorKind::invalid_argument, "unknown scheme");
}

} // namespace

DesignResult reoptimize(const Scenario& scn, SchemeId scheme, const OnOffMask& mask, const AoOptions& opt,
                        bool ps_switching)
{
    scn.validate();
    if (scheme == SchemeId::digital_full)
        return digital_under_mask(scn, mask, opt);
    Scenario design_scn = scn;
    if (scheme == SchemeId::fixed_pa)
        design_scn.hw.beta_pa = 0.0;
    InstanceSolver solver(design_scn, opt);
    DesignResult r = solver.under(ps_switching ? InstanceSolver::switching : InstanceSolver::fixed, mask);
    r.scheme = scheme;
    if (r.feasible())
        r.power = scheme_power(scn, r.design(), scheme);
    else
        r.power.total = std::numeric_limits<double>::infinity();
    return r;
}

DesignResult solve_instance(const Scenario& scn, SchemeId scheme, const AoOptions& opt)
{
    return compare_schemes(scn, {scheme}, opt).front();
}

std::vector<DesignResult> compare_schemes(const Scenario& scn, const std::vector<SchemeId>& schemes,
                                          const AoOptions& opt)
{
    scn.validate();
    InstanceSolver solver(scn, opt);
    std::unique_ptr<InstanceSolver> fixed;
    std::vector<DesignResult> out;
    for (SchemeId s : schemes) {
        try {
            out.push_back(run_scheme(solver, fixed, scn, s, opt));
        } catch (const Error& e) {
            DesignResult r;
            r.scheme = s;
            r.status = DesignStatus::infeasible;
            r.binding = e.what();
            r.error = e.kind();
            r.power.total = std::numeric_limits<double>::infinity();
            out.push_back(r);
        }
    }
    return out;
}

} // namespace iscap
