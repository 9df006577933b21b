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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Set ISCAP_ACCEPT_VERBOSE for per-item detail.

#include "iscap/analog_stage.hpp"
#include "iscap/ao_driver.hpp"
#include "iscap/array_sensing.hpp"
#include "iscap/digital_stage.hpp"
#include "iscap/experiments.hpp"
#include "iscap/power_models.hpp"
#include "iscap/rng.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace iscap;

namespace {

bool verbose = false;

void note(const char* fmt, auto... args)
{
    if (verbose) {
        std::printf("    ");
        std::printf(fmt, args...);
        std::printf("\n");
    }
}

struct Clock {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

MatC random_psd(Rng& rng, int n, double ridge)
{
    MatC g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g(i, j) = rng.complex_normal();
    return g * g.adjoint() / n + ridge * MatC::Identity(n, n);
}

MatC sqrtm(const MatC& a)
{
    Eigen::SelfAdjointEigenSolver<MatC> es(a);
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           es.eigenvectors().adjoint();
}

VecC echo(double theta, cd beta, const MatC& x, int nr)
{
    const MatC y = steering(theta, nr) * beta * steering(theta, static_cast<int>(x.rows())).transpose() * x;
    return Eigen::Map<const VecC>(y.data(), y.size());
}

Scenario desk(std::uint64_t seed)
{
    return generate_scenario(seed, desk_config());
}

// ---------------------------------------------------------------------------

std::string fim_oracle()
{
    Clock clk;
    Rng rng(2024);
    const int n = 8, l = 10;
    const double sigma2 = 0.7, theta = -0.42, h = 1e-6;
    const cd beta(0.6, 0.5);
    const MatC rx = random_psd(rng, n, 0.1);
    const MatC x = sqrtm(static_cast<double>(l) * rx);
    MatC j(n * n, 3);
    j.col(0) = (echo(theta + h, beta, x, n) - echo(theta - h, beta, x, n)) / (2 * h);
    j.col(1) = (echo(theta, beta + h, x, n) - echo(theta, beta - h, x, n)) / (2 * h);
    j.col(2) = (echo(theta, beta + cd(0, h), x, n) - echo(theta, beta - cd(0, h), x, n)) / (2 * h);
    const MatR oracle = (2.0 / sigma2) * (j.adjoint() * j).real();
    const MatR m = build_fim(make_steering_set({theta}, {beta}, n, n), rx, l, sigma2);
    const double err = (m - oracle).norm() / oracle.norm();
    const double t = clk.seconds();
    char buf[128];
    std::snprintf(buf, sizeof buf, "rel Frobenius error %.2e, %.2f s", err, t);
    return (err <= 1e-3 && t < 5.0 ? "" : "!") + std::string(buf);
}

std::string schur_equivalence()
{
    Clock clk;
    Rng rng(77);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + trial % 7;
        MatR g(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                g(a, b) = rng.normal();
        const MatR m = g * g.transpose() / n + 0.2 * MatR::Identity(n, n);
        const double truth = m.inverse().trace();
        ConicProgram p;
        const auto t = schur_crb_blocks(
            p, [&](int a, int b) { return AffineExpr(m(a, b)); }, n, 1e3 * truth, VecR::Ones(n));
        AffineExpr obj;
        for (int i = 0; i < n; ++i)
            obj.add_scalar(t[i], 1.0);
        p.set_objective(obj);
        const Solution s = solve(p);
        const double rel = s.status == SolveStatus::optimal ? std::abs(s.objective_value - truth) / truth : 1.0;
        note("size %d: sum t %.9g, tr(M^-1) %.9g", n, s.objective_value, truth);
        worst = std::max(worst, rel);
    }
    const double t = clk.seconds();
    char buf[128];
    std::snprintf(buf, sizeof buf, "20 matrices, worst rel error %.2e, %.2f s", worst, t);
    return (worst <= 1e-5 && t < 30.0 ? "" : "!") + std::string(buf);
}

std::string recovery_suite()
{
    Clock clk;
    Rng rng(303);
    double worst_cov = 0.0, worst_gain = 0.0, worst_eig = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 5, k = 1 + trial % 3, nt = 8;
        std::vector<MatC> r_bar;
        std::vector<VecC> h;
        for (int i = 0; i < k; ++i) {
            MatC g(n, 1 + trial % 2);
            for (int a = 0; a < g.rows(); ++a)
                for (int b = 0; b < g.cols(); ++b)
                    g(a, b) = rng.complex_normal();
            r_bar.push_back(g * g.adjoint());
            h.push_back(rng.complex_normal(nt));
        }
        const MatC s_bar = random_psd(rng, n, 0.0) * (trial % 4 == 0 ? 0.0 : 1.0);
        MatC f(nt, n);
        for (int a = 0; a < nt; ++a)
            for (int b = 0; b < n; ++b)
                f(a, b) = std::polar(1.0 / std::sqrt(double(nt)), rng.uniform(0.0, 2 * kPi));
        const TxCovariances out = recover_rank_one(r_bar, s_bar, f, h);
        MatC before = s_bar, after = out.S;
        for (int i = 0; i < k; ++i) {
            before += r_bar[i];
            after += out.w[i] * out.w[i].adjoint();
            const VecC g = f.adjoint() * h[i];
            const double tb = (g.adjoint() * r_bar[i] * g)(0, 0).real();
            const double tr = std::norm((g.adjoint() * out.w[i])(0, 0));
            worst_gain = std::max(worst_gain, std::abs(tr - tb) / tb);
        }
        worst_cov = std::max(worst_cov, (after - before).norm() / before.norm());
        Eigen::SelfAdjointEigenSolver<MatC> es(hermitian_part(out.S));
        worst_eig = std::min(worst_eig, es.eigenvalues()(0));
    }
    const double t = clk.seconds();
    char buf[160];
    std::snprintf(buf, sizeof buf, "covariance %.1e, gain %.1e, min eig(S) %.1e, %.2f s", worst_cov, worst_gain,
                  worst_eig, t);
    const bool ok = worst_cov <= 1e-12 && worst_gain <= 1e-10 && worst_eig >= -1e-8 && t < 10.0;
    return (ok ? "" : "!") + std::string(buf);
}

std::string sca_monotonicity()
{
    Clock clk;
    int bad = 0, max_iters = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Scenario scn = desk(seed);
        const BoolVec all = BoolVec::Constant(4, true);
        const MatC f = random_phase_analog(8, 4, derive_seed(seed, 0xACC));
        const DigitalResult dig = sca_digital(scn, f, nullptr, all);
        if (dig.status == StageStatus::infeasible) {
            note("seed %d: digital stage infeasible", int(seed));
            ++bad;
            continue;
        }
        auto monotone = [](const std::vector<double>& tr) {
            for (std::size_t i = 1; i < tr.size(); ++i)
                if (tr[i] > tr[i - 1] + 1e-6)
                    return false;
            return true;
        };
        const VecC fv = vec_analog(f);
        const AnalogSca an =
            sca_analog(scn, dig.recovered.w, dig.recovered.S, fv * fv.adjoint(), BoolMat::Constant(8, 4, true));
        // The traces hold the exact relaxed objectives; re-evaluate the last.
        const double dig_last = digital_relaxed_objective(scn, f, dig.relaxed);
        const double an_last = analog_relaxed_objective(scn, dig.recovered.w, dig.recovered.S, an.rf);
        const bool ok = monotone(dig.trace) && monotone(an.trace) && dig.iterations <= 50 && an.iterations <= 50 &&
                        an.status != StageStatus::infeasible &&
                        std::abs(dig_last - dig.trace.back()) <= 1e-9 * std::abs(dig_last) &&
                        std::abs(an_last - an.trace.back()) <= 1e-9 * std::abs(an_last);
        note("seed %d: digital %d it %.6f -> %.6f, analog %d it %.6f -> %.6f %s", int(seed), dig.iterations,
             dig.trace.front(), dig.trace.back(), an.iterations, an.trace.front(), an.trace.back(),
             ok ? "" : "VIOLATION");
        max_iters = std::max({max_iters, dig.iterations, an.iterations});
        bad += !ok;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "10 seeds x 2 stages, %d violations, max %d iterations, %.1f s", bad, max_iters,
                  clk.seconds());
    return (bad == 0 ? "" : "!") + std::string(buf);
}

// Constraint check from the definitions, independent of check_constraints.
bool exact_feasible(const Scenario& scn, const Design& d, std::string& why)
{
    const double tol = 1e-6;
    const MatC y = d.chain_covariance();
    const MatC rx = d.F * y * d.F.adjoint();
    for (int k = 0; k < scn.dims.k_ir; ++k) {
        const VecC g = d.F.adjoint() * scn.h[k];
        double interf = std::real((g.adjoint() * d.S * g)(0, 0)) + scn.noise_ir[k];
        for (int i = 0; i < scn.dims.k_ir; ++i)
            if (i != k)
                interf += std::norm((g.adjoint() * d.w[i])(0, 0));
        const double sinr = std::norm((g.adjoint() * d.w[k])(0, 0)) / interf;
        if (sinr < scn.thresholds.sinr_min[k] * (1 - tol)) {
            why = "sinr";
            return false;
        }
    }
    if (scn.dims.k_s > 0) {
        double crb;
        try {
            crb = crb_trace(build_fim(make_steering_set(scn), rx, scn.dims.dwell, scn.noise_sense));
        } catch (const Error&) {
            why = "crb (unidentifiable)";
            return false;
        }
        if (crb > scn.thresholds.crb_max * (1 + tol)) {
            why = "crb";
            return false;
        }
    }
    for (int j = 0; j < scn.dims.k_er; ++j) {
        const double p_in = std::real((scn.d[j].adjoint() * rx * scn.d[j])(0, 0));
        if (eh_dc(p_in, scn.eh[j]) < scn.thresholds.eh_dc_min[j] * (1 - tol)) {
            why = "eh";
            return false;
        }
    }
    for (int n = 0; n < scn.dims.n_tx; ++n)
        if (rx(n, n).real() > scn.hw.p_ant_max * (1 + tol)) {
            why = "power";
            return false;
        }
    return true;
}

struct Collected {
    std::vector<std::pair<Scenario, DesignResult>> designs;
};

std::vector<std::vector<DesignResult>> g_compare; // per seed, all schemes
const std::vector<std::uint64_t> kCompareSeeds = {1, 2, 3};

const DesignResult& pick(const std::vector<DesignResult>& rs, SchemeId s)
{
    for (const auto& r : rs)
        if (r.scheme == s)
            return r;
    throw std::runtime_error("missing scheme");
}

void run_comparisons()
{
    if (!g_compare.empty())
        return;
    for (std::uint64_t seed : kCompareSeeds)
        g_compare.push_back(compare_schemes(desk(seed), all_schemes()));
}

std::vector<SweepTable> g_sweeps;

SweepSpec sweep(SweepAxis axis, std::vector<double> values, std::vector<SchemeId> schemes)
{
    SweepSpec s;
    s.axis = axis;
    s.values = std::move(values);
    s.schemes = std::move(schemes);
    s.seeds = {1, 2};
    return s;
}

void run_sweeps()
{
    if (!g_sweeps.empty())
        return;
    g_sweeps.push_back(
        run_sweep(sweep(SweepAxis::sinr_db, {-4.0, 0.0, 4.0, 8.0}, {SchemeId::joint, SchemeId::no_onoff})));
    g_sweeps.push_back(run_sweep(sweep(SweepAxis::crb_max, {0.2, 0.1, 0.05}, {SchemeId::joint})));
    g_sweeps.push_back(run_sweep(sweep(SweepAxis::eh_dbm, {-8.0, -5.0, -2.0, 1.0}, {SchemeId::joint})));
}

std::string end_to_end_feasibility()
{
    Clock clk;
    run_comparisons();
    run_sweeps();
    int checked = 0, bad = 0;
    auto check = [&](const Scenario& scn, const DesignResult& r, const char* where) {
        if (r.status != DesignStatus::converged && r.status != DesignStatus::max_iter)
            return;
        ++checked;
        std::string why;
        if (!exact_feasible(scn, r.design(), why)) {
            ++bad;
            note("%s %s violates %s", where, to_string(r.scheme), why.c_str());
        }
    };
    for (std::size_t i = 0; i < kCompareSeeds.size(); ++i)
        for (const auto& r : g_compare[i])
            check(desk(kCompareSeeds[i]), r, "compare");
    for (const auto& t : g_sweeps)
        for (const auto& row : t.rows)
            check(sweep_scenario(generate_scenario(row.seed, t.spec.base), t.spec, row.value), row.result, "sweep");
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d returned designs re-checked, %d violations (%.1f s incl. solves)", checked,
                  bad, clk.seconds());
    return (bad == 0 && checked > 0 ? "" : "!") + std::string(buf);
}

std::string dominance()
{
    run_comparisons();
    int feasible = 0, bad = 0;
    std::string order;
    for (std::size_t i = 0; i < kCompareSeeds.size(); ++i) {
        const auto& rs = g_compare[i];
        const DesignResult& j = pick(rs, SchemeId::joint);
        if (!j.feasible())
            continue;
        ++feasible;
        for (SchemeId s : {SchemeId::no_onoff, SchemeId::ps_only, SchemeId::rf_only}) {
            const DesignResult& o = pick(rs, s);
            if (o.feasible() && j.power.total > o.power.total + 1e-8) {
                ++bad;
                note("seed %d: joint %.10g > %s %.10g", int(kCompareSeeds[i]), j.power.total, to_string(s),
                     o.power.total);
            }
        }
        note("seed %d: joint %.4f ps_only %.4f rf_only %.4f no_onoff %.4f digital_full %.4f fixed_pa %.4f",
             int(kCompareSeeds[i]), j.power.total, pick(rs, SchemeId::ps_only).power.total,
             pick(rs, SchemeId::rf_only).power.total, pick(rs, SchemeId::no_onoff).power.total,
             pick(rs, SchemeId::digital_full).power.total, pick(rs, SchemeId::fixed_pa).power.total);
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d feasible instances, %d violations of joint <= min(partial)", feasible, bad);
    return (bad == 0 && feasible > 0 ? "" : "!") + std::string(buf);
}

std::string monotone_sweep()
{
    Clock clk;
    run_sweeps();
    int bad = 0;
    std::string detail;
    for (const auto& t : g_sweeps) {
        const auto& sp = t.spec;
        std::vector<std::size_t> order(sp.values.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        // loosest first
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return tighter(sp.axis, sp.values[b], sp.values[a]); });
        for (SchemeId s : sp.schemes) {
            double prev = -1.0;
            std::string line;
            for (std::size_t idx : order) {
                const double v = sp.values[idx];
                const double m = t.mean_total(v, s);
                char b[48];
                std::snprintf(b, sizeof b, " %g:%.4f", v, m);
                line += b;
                if (t.feasible_seeds(v, s) != static_cast<int>(sp.seeds.size())) {
                    ++bad;
                    line += "(infeasible seed)";
                    continue;
                }
                if (prev >= 0.0 && m < prev * (1 - 1e-6)) {
                    ++bad;
                    line += "(decrease)";
                }
                prev = m;
            }
            note("%s %s:%s", to_string(sp.axis), to_string(s), line.c_str());
        }
    }
    // Plateau: the two loosest SINR points.
    const SweepTable& sinr = g_sweeps.front();
    double worst_plateau = 0.0;
    for (SchemeId s : sinr.spec.schemes) {
        const double a = sinr.mean_total(-4.0, s), b = sinr.mean_total(0.0, s);
        worst_plateau = std::max(worst_plateau, std::abs(a - b) / b);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "3 axes, %d monotonicity violations, low-SINR plateau %.2f%% (%.1f s)", bad,
                  100 * worst_plateau, clk.seconds());
    return (bad == 0 && worst_plateau < 0.01 ? "" : "!") + std::string(buf);
}

int zero_power_antennas(const DesignResult& r)
{
    const VecR p = antenna_powers(r.F, r.w, r.S);
    int z = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        z += p(i) <= kActivationTol;
    return z;
}

std::string sparsification()
{
    run_comparisons();
    int bad = 0, compared = 0;
    std::string counts;
    for (std::size_t i = 0; i < kCompareSeeds.size(); ++i) {
        const DesignResult& nl = pick(g_compare[i], SchemeId::joint);
        const DesignResult& lin = pick(g_compare[i], SchemeId::fixed_pa);
        if (!nl.feasible() || !lin.feasible())
            continue;
        ++compared;
        const int a = zero_power_antennas(nl), b = zero_power_antennas(lin);
        counts += " " + std::to_string(a) + "/" + std::to_string(b);
        bad += a < b;
    }
    return (bad == 0 && compared > 0 ? "" : "!") + std::string("zero-power antennas beta=0.5/beta=0:") + counts;
}

std::string eh_suite()
{
    const EhParams e;
    bool ok = eh_dc(0.0, e) == 0.0;
    const double sat = std::abs(eh_dc(100.0 * e.b, e) - e.m);
    ok = ok && sat <= 1e-6;
    double worst = 0.0;
    for (double g = 1e-8; g < e.m; g *= 1.3)
        worst = std::max(worst, std::abs(eh_dc(eh_threshold_invert(g, e), e) / g - 1.0));
    for (double p = 1e-7; p < 5e-3; p *= 1.3)
        worst = std::max(worst, std::abs(eh_threshold_invert(eh_dc(p, e), e) / p - 1.0));
    ok = ok && worst <= 1e-10;
    char buf[128];
    std::snprintf(buf, sizeof buf, "zero in zero out, |P(100b) - M| = %.1e, round trip %.1e", sat, worst);
    return (ok ? "" : "!") + std::string(buf);
}

std::string slurp_without_stamp(const std::string& path)
{
    std::ifstream f(path);
    std::string line, out;
    bool first = true;
    while (std::getline(f, line)) {
        if (first && line.rfind("# generated", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        out += line + '\n';
    }
    return out;
}

std::string determinism()
{
    Clock clk;
    const auto dir = std::filesystem::temp_directory_path();
    const std::string a = (dir / "iscap_accept_a.csv").string(), b = (dir / "iscap_accept_b.csv").string();
    const std::string args = " sweep --axis sinr_db --values 2,6 --schemes joint,digital_full --seeds 3 --out ";
    for (const auto& out : {a, b}) {
        const std::string cmd = std::string(ISCAP_CLI) + args + out + " 2>/dev/null";
        const int rc = std::system(cmd.c_str());
        if (!WIFEXITED(rc) || WEXITSTATUS(rc) != 0)
            return "!CLI run failed";
    }
    const std::string ca = slurp_without_stamp(a), cb = slurp_without_stamp(b);
    const bool same = !ca.empty() && ca == cb;
    char buf[128];
    std::snprintf(buf, sizeof buf, "two CLI runs, %zu bytes each, %s (%.1f s)", ca.size(),
                  same ? "identical" : "DIFFERENT", clk.seconds());
    return (same ? "" : "!") + std::string(buf);
}

} // namespace

int main()
{
    verbose = std::getenv("ISCAP_ACCEPT_VERBOSE") != nullptr;
    struct Criterion {
        const char* name;
        std::function<std::string()> run;
    };
    const std::vector<Criterion> criteria = {
        {"FIM oracle", fim_oracle},
        {"Schur equivalence", schur_equivalence},
        {"rank-one recovery suite", recovery_suite},
        {"SCA monotonicity", sca_monotonicity},
        {"end-to-end feasibility", end_to_end_feasibility},
        {"scheme dominance", dominance},
        {"monotone sweep", monotone_sweep},
        {"non-linear PA sparsification", sparsification},
        {"EH model unit suite", eh_suite},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string msg;
        try {
            msg = criteria[i].run();
        } catch (const std::exception& e) {
            msg = std::string("!exception: ") + e.what();
        }
        const bool pass = msg.empty() || msg[0] != '!';
        if (!pass)
            msg.erase(0, 1);
        failed += !pass;
        std::printf("%s %2zu %s: %s\n", pass ? "PASS" : "FAIL", i + 1, criteria[i].name, msg.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
