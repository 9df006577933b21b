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

#include "iscap/ao_driver.hpp"
#include "iscap/onoff_control.hpp"
#include "test_support.hpp"

#include <cmath>
#include <set>

using namespace iscap;
using namespace iscap::testing;

namespace {

Scenario desk(std::uint64_t seed)
{
    return generate_scenario(seed, desk_config());
}

// All-on design whose chain weights are exactly `v` (S diagonal, w zero).
DesignResult synthetic(const VecR& v, int k_ir, std::uint64_t seed)
{
    Rng rng(seed);
    DesignResult r;
    r.status = DesignStatus::converged;
    r.F = random_cm(rng, 8, static_cast<int>(v.size()));
    r.w.assign(k_ir, VecC::Zero(v.size()));
    r.S = v.cast<cd>().asDiagonal();
    r.mask = OnOffMask::all_on(8, static_cast<int>(v.size()));
    r.power.total = 100.0;
    return r;
}

// Priced copy of `base` under `mask`.
DesignResult masked(const DesignResult& base, const OnOffMask& mask, double total, bool feasible = true)
{
    DesignResult r = base;
    r.mask = mask;
    for (int j = 0; j < mask.rf_on.size(); ++j)
        if (!mask.rf_on(j)) {
            r.S.row(j).setZero();
            r.S.col(j).setZero();
        }
    for (int i = 0; i < mask.ps_on.rows(); ++i)
        for (int j = 0; j < mask.ps_on.cols(); ++j)
            if (!mask.ps_on(i, j))
                r.F(i, j) = 0.0;
    r.power.total = total;
    r.status = feasible ? DesignStatus::converged : DesignStatus::infeasible;
    return r;
}

} // namespace

TEST_CASE("ascending order is stable in index", "[onoff]")
{
    VecR w(5);
    w << 1.0, 0.5, 1.0, 0.5, 0.0;
    CHECK(ascending_order(w, {0, 1, 2, 3, 4}) == std::vector<int>{4, 1, 3, 0, 2});
    CHECK(ascending_order(w, {0, 2, 3}) == std::vector<int>{3, 0, 2});
}

TEST_CASE("PS prefix schedules", "[onoff]")
{
    CHECK(ps_prefix_grid(32, PsSchedule::geometric) == std::vector<int>{1, 2, 4, 8, 16});
    CHECK(ps_prefix_grid(5, PsSchedule::exhaustive) == std::vector<int>{1, 2, 3, 4});
    CHECK(ps_prefix_grid(1, PsSchedule::geometric).empty());
    CHECK(ps_prefix_grid(1, PsSchedule::exhaustive).empty());
}

TEST_CASE("RF search returns the argmin and respects the K_IR floor", "[onoff]")
{
    const Scenario scn = desk(1);
    VecR v(4);
    v << 3.0, 1.0, 4.0, 2.0;
    const DesignResult base = synthetic(v, scn.dims.k_ir, 1);
    std::vector<OnOffMask> seen;
    const double totals[] = {100.0, 97.0, 98.5};

    const SearchResult res = rf_onoff_search(scn, base, [&](const OnOffMask& m) {
        seen.push_back(m);
        return masked(base, m, totals[4 - m.rf_count()]);
    });
    REQUIRE(seen.size() == 2);
    for (const auto& m : seen)
        CHECK(m.rf_count() >= scn.dims.k_ir);
    // Lowest weights first: chain 1, then chain 3.
    CHECK_FALSE(seen[0].rf_on(1));
    CHECK(seen[0].rf_count() == 3);
    CHECK_FALSE(seen[1].rf_on(3));
    CHECK(res.best.power.total == 97.0);
    CHECK_FALSE(res.best.mask.rf_on(1));
    REQUIRE(res.trials.size() == 3);
    for (const auto& t : res.trials)
        if (t.feasible)
            CHECK(res.best.power.total <= t.total);
}

TEST_CASE("RF search skips infeasible trials and keeps the baseline", "[onoff]")
{
    const Scenario scn = desk(1);
    VecR v(4);
    v << 3.0, 1.0, 4.0, 2.0;
    DesignResult base = synthetic(v, scn.dims.k_ir, 2);
    base.power.total = 50.0;
    const SearchResult res = rf_onoff_search(scn, base, [&](const OnOffMask& m) {
        return m.rf_count() == 3 ? masked(base, m, 10.0, false) : masked(base, m, 60.0);
    });
    CHECK(res.best.power.total == 50.0);
    CHECK(res.best.mask.rf_count() == 4);

    DesignResult bad = base;
    bad.status = DesignStatus::infeasible;
    int calls = 0;
    const SearchResult none = rf_onoff_search(scn, bad, [&](const OnOffMask& m) {
        ++calls;
        return masked(base, m, 1.0);
    });
    CHECK(calls == 0);
    CHECK_FALSE(none.best.feasible());
}

TEST_CASE("a chain carrying nothing is switched off", "[onoff]")
{
    const Scenario scn = desk(1);
    VecR v(4);
    v << 0.0, 1.0, 2.0, 3.0;
    const DesignResult base = synthetic(v, scn.dims.k_ir, 3);
    // Switching off a loaded chain costs more than the RF power it saves.
    const SearchResult res = rf_onoff_search(scn, base, [&](const OnOffMask& m) {
        double total = 100.0;
        for (int j = 0; j < 4; ++j)
            if (!m.rf_on(j))
                total += v(j) > 0.0 ? 10.0 : -0.5;
        return masked(base, m, total);
    });
    CHECK_FALSE(res.best.mask.rf_on(0));
    CHECK(res.best.mask.rf_count() == 3);
    CHECK_FALSE(res.best.effective_rf()(0));
}

TEST_CASE("PS search switches off the zero-weight rows", "[onoff]")
{
    const Scenario scn = desk(1);
    VecR v(4);
    v << 1.0, 1.0, 1.0, 1.0;
    DesignResult base = synthetic(v, scn.dims.k_ir, 4);
    base.f_bar = vec_analog(base.F);
    // Antennas 2 and 5 carry nothing in the relaxed solution.
    for (int j = 0; j < 4; ++j) {
        base.f_bar(2 * 4 + j) = 0.0;
        base.f_bar(5 * 4 + j) = 1e-9;
    }
    for (auto sched : {PsSchedule::geometric, PsSchedule::exhaustive}) {
        int calls = 0;
        const SearchResult res = ps_onoff_search(
            scn, base,
            [&](const OnOffMask& m) {
                ++calls;
                CHECK(m.rf_count() >= scn.dims.k_ir);
                double total = 100.0;
                for (int i = 0; i < 8; ++i)
                    for (int j = 0; j < 4; ++j)
                        if (!m.ps_on(i, j))
                            total += (i == 2 || i == 5) ? -0.042 : 1.0;
                return masked(base, m, total);
            },
            sched);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 4; ++j)
                CHECK(res.best.mask.ps_on(i, j) == (i != 2 && i != 5));
        CHECK(res.best.power.total == Catch::Approx(100.0 - 8 * 0.042));
        for (const auto& t : res.trials)
            if (t.feasible)
                CHECK(res.best.power.total <= t.total);
        if (sched == PsSchedule::geometric)
            CHECK(calls < 31);
        else
            CHECK(calls >= 8);
    }
}

TEST_CASE("the joint pipeline composes with its re-optimization", "[onoff][slow]")
{
    const Scenario scn = desk(1);
    const AoOptions opt;
    const DesignResult r = solve_instance(scn, SchemeId::joint, opt);
    REQUIRE(r.feasible());
    CHECK(check_constraints(scn, r.design()).feasible(1e-6));
    const DesignResult again = reoptimize(scn, SchemeId::joint, r.mask, opt, r.ps_switching);
    REQUIRE(again.feasible());
    CHECK(std::abs(again.power.total - r.power.total) <= 1e-4 * r.power.total);
}
