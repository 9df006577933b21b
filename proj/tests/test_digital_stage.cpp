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

#include <catch_amalgamated.hpp>

#include "iscap/design.hpp"
#include "iscap/digital_stage.hpp"
#include "test_support.hpp"

#include <cmath>
#include <cstdio>

using namespace iscap;
using namespace iscap::testing;

namespace {

const BoolVec kAllOn = BoolVec::Constant(4, true);

Scenario desk(std::uint64_t seed)
{
    return generate_scenario(seed, desk_config());
}

TxCovariances random_cov(Rng& rng, int k, int n, double scale)
{
    TxCovariances c;
    for (int i = 0; i < k; ++i)
        c.R.push_back(scale * random_psd(rng, n, 2));
    c.S = scale * random_psd(rng, n, n);
    return c;
}

double surrogate_at(const DigitalSdr& sdr, const TxCovariances& c)
{
    return sdr.program.evaluate(sdr.program.objective(), sdr.pack_herm(c), sdr.pack_scalar());
}

} // namespace

TEST_CASE("recovery preserves the covariance identities", "[digital]")
{
    Rng rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 4;
        const int k = 2;
        std::vector<MatC> r_bar;
        std::vector<VecC> h;
        for (int i = 0; i < k; ++i) {
            r_bar.push_back(random_psd(rng, n, 1 + trial % 3));
            h.push_back(rng.complex_normal(8));
        }
        const MatC s_bar = random_psd(rng, n, 1 + trial % 4);
        const MatC f = random_cm(rng, 8, n);
        const TxCovariances out = recover_rank_one(r_bar, s_bar, f, h);

        MatC before = s_bar, after = out.S;
        for (int i = 0; i < k; ++i) {
            before += r_bar[i];
            after += out.R[i];
            CHECK((out.R[i] - out.w[i] * out.w[i].adjoint()).norm() == 0.0);
            const VecC g = f.adjoint() * h[i];
            const double t_bar = (g.adjoint() * r_bar[i] * g)(0, 0).real();
            const double t_rec = (g.adjoint() * out.R[i] * g)(0, 0).real();
            CHECK(std::abs(t_rec - t_bar) <= 1e-10 * t_bar);
        }
        CHECK((after - before).norm() <= 1e-13 * before.norm());
        CHECK(min_eig(out.S) >= -1e-8);
    }
}

TEST_CASE("recovery is the identity on rank-one inputs", "[digital]")
{
    Rng rng(7);
    const VecC u = rng.complex_normal(4);
    const MatC f = random_cm(rng, 8, 4);
    const VecC h = rng.complex_normal(8);
    const TxCovariances out = recover_rank_one({u * u.adjoint()}, MatC::Zero(4, 4), f, {h});
    CHECK((out.R[0] - u * u.adjoint()).norm() <= 1e-12 * u.squaredNorm());
    const cd phase = out.w[0].dot(u) / u.squaredNorm();
    CHECK(std::abs(std::abs(phase) - 1.0) < 1e-12);
    CHECK(out.S.norm() <= 1e-12 * u.squaredNorm());
}

TEST_CASE("recovery rejects a zero beam gain", "[digital]")
{
    MatC f = MatC::Zero(2, 2);
    f(0, 0) = 1.0;
    MatC r = MatC::Zero(2, 2);
    r(1, 1) = 1.0; // energy on a chain the user cannot see
    VecC h = VecC::Zero(2);
    h(0) = 1.0;
    try {
        recover_rank_one({r}, MatC::Zero(2, 2), f, {h});
        FAIL("expected degenerate recovery");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degenerate_recovery);
    }
    const TxCovariances z = recover_rank_one({MatC::Zero(2, 2)}, MatC::Zero(2, 2), f, {h});
    CHECK(z.w[0].norm() == 0.0);
}

TEST_CASE("surrogate is tangent at the local point and dominates elsewhere", "[digital]")
{
    const Scenario scn = desk(3);
    Rng rng(11);
    const MatC f = random_cm(rng, 8, 4);
    for (int trial = 0; trial < 10; ++trial) {
        const TxCovariances local = random_cov(rng, 2, 4, 0.2);
        const DigitalSdr sdr = build_digital_sdr(scn, f, local);
        const double truth = digital_relaxed_objective(scn, f, local);
        CHECK(std::abs(surrogate_at(sdr, local) - truth) <= 1e-10 * truth);
        for (int s = 0; s < 10; ++s) {
            const TxCovariances x = random_cov(rng, 2, 4, rng.uniform(0.01, 1.0));
            CHECK(surrogate_at(sdr, x) >= digital_relaxed_objective(scn, f, x) - 1e-9);
        }
    }
}

TEST_CASE("fixed efficiency without RF cost gives an exact linear objective", "[digital]")
{
    Scenario scn = desk(3);
    scn.hw.beta_pa = 0.0;
    scn.hw.p_rf = 0.0;
    Rng rng(12);
    const MatC f = random_cm(rng, 8, 4);
    const DigitalSdr sdr = build_digital_sdr(scn, f, random_cov(rng, 2, 4, 0.3));
    for (int s = 0; s < 10; ++s) {
        const TxCovariances x = random_cov(rng, 2, 4, rng.uniform(0.01, 1.0));
        const double truth = digital_relaxed_objective(scn, f, x);
        CHECK(std::abs(surrogate_at(sdr, x) - truth) <= 1e-10 * truth);
    }
}

TEST_CASE("no information receivers leaves only the sensing covariance", "[digital]")
{
    ScenarioConfig cfg = desk_config();
    cfg.dims.k_ir = 0;
    const Scenario scn = generate_scenario(5, cfg);
    const MatC f = random_phase_analog(8, 4, 9);
    const DigitalSdr sdr = build_digital_sdr(scn, f, zero_covariances(0, 4));
    CHECK(sdr.r_vars.empty());
    CHECK(sdr.program.herm_count() == 1);
    for (const auto& c : sdr.program.inequalities())
        CHECK(c.tag.rfind("sinr", 0) != 0);
    const DigitalResult res = sca_digital(scn, f, nullptr, kAllOn);
    REQUIRE(res.status == StageStatus::converged);
    CHECK(covariance_slacks(scn, f, res.recovered).feasible(1e-6));
}

TEST_CASE("SCA descends monotonically and recovery stays feasible", "[digital]")
{
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const Scenario scn = desk(seed);
        const MatC f = random_phase_analog(8, 4, derive_seed(seed, 1));
        const DigitalResult res = sca_digital(scn, f, nullptr, kAllOn);
        REQUIRE(res.status == StageStatus::converged);
        CHECK(res.iterations <= 50);
        std::printf("digital SCA seed %llu: %d iterations, objective %.6f W\n",
                    static_cast<unsigned long long>(seed), res.iterations, res.trace.back());
        for (std::size_t j = 1; j < res.trace.size(); ++j)
            CHECK(res.trace[j] <= res.trace[j - 1] + 1e-6);
        CHECK(covariance_slacks(scn, f, res.relaxed).feasible(1e-6));
        const Design d{f, res.recovered.w, res.recovered.S};
        const SlackReport rep = check_constraints(scn, d);
        CHECK(rep.feasible(1e-6));
        CHECK(std::abs(relaxed_objective(scn, d) - res.trace.back()) <= 1e-9 * res.trace.back());
    }
}

TEST_CASE("fixed efficiency converges after one step", "[digital]")
{
    Scenario scn = desk(2);
    scn.hw.beta_pa = 0.0;
    scn.hw.p_rf = 0.0;
    const MatC f = random_phase_analog(8, 4, 4);
    const DigitalResult res = sca_digital(scn, f, nullptr, kAllOn);
    CHECK(res.status == StageStatus::converged);
    CHECK(res.iterations == 1);
}

TEST_CASE("switched-off chains carry no power", "[digital]")
{
    const Scenario scn = desk(4);
    const MatC f = random_phase_analog(8, 4, 5);
    BoolVec on = kAllOn;
    on(1) = false;
    const DigitalResult res = sca_digital(scn, f, nullptr, on);
    REQUIRE(res.status == StageStatus::converged);
    const MatC y = res.recovered.total();
    CHECK(y.row(1).norm() == 0.0);
    CHECK(y.col(1).norm() == 0.0);
    CHECK(res.recovered.w[0](1) == cd(0.0));
}

TEST_CASE("infeasible instances name the binding class", "[digital]")
{
    const MatC f = random_phase_analog(8, 4, 6);
    {
        Scenario scn = desk(1);
        for (auto& g : scn.thresholds.sinr_min)
            g = db_to_linear(80.0);
        const DigitalResult res = sca_digital(scn, f, nullptr, kAllOn);
        CHECK(res.status == StageStatus::infeasible);
        CHECK(res.binding == "sinr");
    }
    {
        Scenario scn = desk(1);
        scn.thresholds.eh_dc_min[0] = 2.0 * scn.eh[0].m;
        const DigitalResult res = sca_digital(scn, f, nullptr, kAllOn);
        CHECK(res.status == StageStatus::infeasible);
        CHECK(res.binding == "eh");
    }
}
