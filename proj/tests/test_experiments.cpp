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

#include "iscap/experiments.hpp"
#include "iscap/power_models.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace iscap;

namespace {

SweepSpec tiny_spec()
{
    SweepSpec s;
    s.axis = SweepAxis::sinr_db;
    s.values = {0.0, 60.0};
    s.schemes = {SchemeId::no_onoff};
    s.seeds = {7};
    return s;
}

std::string csv_of(const SweepTable& t, bool stamp)
{
    std::ostringstream os;
    write_sweep_csv(t, os, stamp);
    return os.str();
}

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);)
        out.push_back(l);
    return out;
}

int cli(const std::string& args)
{
    const std::string cmd = std::string(ISCAP_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST_CASE("sweep specs are validated", "[cli]")
{
    SweepSpec s = tiny_spec();
    CHECK_NOTHROW(s.validate());
    s.schemes.clear();
    CHECK_THROWS_AS(s.validate(), Error);
    s = tiny_spec();
    s.seeds.clear();
    CHECK_THROWS_AS(s.validate(), Error);
    s = tiny_spec();
    s.values = {0.0, 4.0, 2.0};
    CHECK_THROWS_AS(s.validate(), Error);
    s.values = {4.0, 4.0};
    CHECK_THROWS_AS(s.validate(), Error);
    s.values = {8.0, 4.0, 0.0};
    CHECK_NOTHROW(s.validate());
    s.axis = SweepAxis::crb_max;
    s.values = {0.1, 0.0};
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("tightening direction per axis", "[cli]")
{
    CHECK(tighter(SweepAxis::sinr_db, 8.0, 4.0));
    CHECK(tighter(SweepAxis::eh_dbm, -1.0, -3.0));
    CHECK(tighter(SweepAxis::crb_max, 0.05, 0.1));
    CHECK_FALSE(tighter(SweepAxis::crb_max, 0.1, 0.05));
    CHECK(axis_from_string("eh_dbm") == SweepAxis::eh_dbm);
    CHECK_THROWS_AS(axis_from_string("snr"), Error);
}

TEST_CASE("sweep configuration round-trips through JSON", "[cli]")
{
    SweepSpec s = tiny_spec();
    s.axis = SweepAxis::eh_dbm;
    s.values = {-6.0, -3.0};
    s.schemes = {SchemeId::joint, SchemeId::fixed_pa};
    s.seeds = {3, 9};
    s.inherit_tighter = false;
    s.ao.ps_schedule = PsSchedule::exhaustive;
    s.base.sinr_db = 2.5;
    const SweepSpec back = sweep_from_json(to_json(s));
    CHECK(back.axis == s.axis);
    CHECK(back.values == s.values);
    CHECK(back.schemes == s.schemes);
    CHECK(back.seeds == s.seeds);
    CHECK(back.inherit_tighter == false);
    CHECK(back.ao.ps_schedule == PsSchedule::exhaustive);
    CHECK(back.base.sinr_db == 2.5);
    CHECK(back.base.dims == s.base.dims);

    const SweepSpec partial = sweep_from_json(nlohmann::json{{"scenario", {{"thresholds", {{"crb_max", 0.3}}}}}}, s);
    CHECK(partial.base.crb_max == 0.3);
    CHECK(partial.base.sinr_db == 2.5);
    CHECK_THROWS_AS(sweep_from_json(nlohmann::json{{"schemes", {"hybrid"}}}), Error);
}

TEST_CASE("sweep CSV is reproducible and marks infeasible rows", "[cli]")
{
    const SweepSpec spec = tiny_spec();
    const SweepTable a = run_sweep(spec);
    const SweepTable b = run_sweep(spec);
    CHECK(csv_of(a, false) == csv_of(b, false));

    const auto stamped = lines(csv_of(a, true));
    REQUIRE(stamped.size() == 4);
    CHECK(stamped[0].rfind("# generated ", 0) == 0);
    CHECK(stamped[1].rfind("axis,value,scheme,seed,status,inherited,rf_on,ps_on,p_pa_w", 0) == 0);
    CHECK(stamped[2].rfind("sinr_db,0,no_onoff,7,", 0) == 0);
    CHECK(stamped[3].rfind("sinr_db,60,no_onoff,7,infeasible,", 0) == 0);
    const auto header_cols = std::count(stamped[1].begin(), stamped[1].end(), ',');
    for (int i = 2; i < 4; ++i)
        CHECK(std::count(stamped[i].begin(), stamped[i].end(), ',') == header_cols);

    REQUIRE(a.rows.size() == 2);
    CHECK(a.rows[0].result.feasible());
    CHECK_FALSE(a.rows[1].result.feasible());
    CHECK(a.feasible_seeds(0.0, SchemeId::no_onoff) == 1);
    CHECK(std::isnan(a.mean_total(60.0, SchemeId::no_onoff)));
}

TEST_CASE("sweep cells share the seed's channels", "[cli]")
{
    const SweepSpec spec = tiny_spec();
    const Scenario seeded = generate_scenario(7, spec.base);
    const Scenario a = sweep_scenario(seeded, spec, 0.0);
    const Scenario b = sweep_scenario(seeded, spec, 6.0);
    CHECK(a.h[0] == b.h[0]);
    CHECK(a.d[0] == b.d[0]);
    CHECK(b.thresholds.sinr_min[0] == Catch::Approx(db_to_linear(6.0)));
    CHECK(a.thresholds.crb_max == b.thresholds.crb_max);
}

TEST_CASE("design dump: per-antenna powers and the PS grid", "[cli]")
{
    const Scenario scn = generate_scenario(7, desk_config());
    const auto path = (std::filesystem::temp_directory_path() / "iscap_dump_test.csv").string();
    std::filesystem::remove(path);
    const DesignResult r = dump_design(scn, SchemeId::no_onoff, AoOptions{}, path);
    REQUIRE(r.feasible());
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    const auto ls = lines(ss.str());
    REQUIRE(ls.size() == 1 + 8 + 1 + 1 + 8);
    CHECK(ls[0] == "antenna,p_out_w");
    double sum = 0.0;
    for (int i = 0; i < 8; ++i)
        sum += std::stod(ls[1 + i].substr(ls[1 + i].find(',') + 1));
    const MatC tx = r.design().tx_covariance();
    CHECK(std::abs(sum - tx.trace().real()) <= 1e-8 * tx.trace().real());
    CHECK(ls[10] == "antenna,ps_on");
    for (int i = 0; i < 8; ++i) {
        const std::string grid = ls[11 + i].substr(ls[11 + i].find(',') + 1);
        CHECK(grid.size() == 4);
        CHECK(grid.find_first_not_of("01") == std::string::npos);
    }

    Scenario hard = with_thresholds(scn, db_to_linear(60.0), scn.thresholds.crb_max, scn.thresholds.eh_dc_min[0]);
    const auto none = (std::filesystem::temp_directory_path() / "iscap_dump_none.csv").string();
    std::filesystem::remove(none);
    CHECK_FALSE(dump_design(hard, SchemeId::no_onoff, AoOptions{}, none).feasible());
    CHECK_FALSE(std::filesystem::exists(none));
}

TEST_CASE("CLI exit codes", "[cli]")
{
    const auto dir = std::filesystem::temp_directory_path();
    const std::string out = (dir / "iscap_cli_test.csv").string();
    CHECK(cli("") == 1);
    CHECK(cli("sweep --schemes '' --out " + out) == 1);
    CHECK(cli("sweep --schemes joint --values 0,4,2 --out " + out) == 1);
    CHECK(cli("sweep --schemes warp --out " + out) == 1);
    CHECK(cli("sweep --axis snr --out " + out) == 1);
    CHECK(cli("config") == 0);
    CHECK(cli("sweep --schemes no_onoff --values 60 --seeds 7 --out " + out) == 2);
    CHECK(cli("sweep --schemes no_onoff --values 0 --seeds 7 --no-timestamp --out " + out) == 0);
    std::ifstream f(out);
    std::string first;
    std::getline(f, first);
    CHECK(first.rfind("axis,", 0) == 0);
}
