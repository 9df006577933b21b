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

// iscap: threshold sweeps, scheme comparisons and design dumps.
//
//   iscap config                      print the default sweep configuration
//   iscap sweep --axis sinr_db --values 0,4,8 --out sweep.csv
//   iscap compare --seed 3
//   iscap dump --seed 3 --beta 0 --out beta0.csv
//
// Exit codes: 0 success, 1 usage, 2 every instance infeasible, 3 solver failure.

#include "iscap/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace iscap;

constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitSolver = 3;

struct Common {
    std::string config_path;
    bool full_scale = false;
    std::string ps_schedule;
};

std::vector<std::string> split(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

SweepSpec load_spec(const Common& c)
{
    SweepSpec spec;
    if (c.full_scale) {
        spec.base = full_scale_config();
        std::cerr << "warning: full scale (" << spec.base.dims.n_tx << " antennas, " << spec.base.dims.n_rf
                  << " RF chains) makes each analog solve a " << spec.base.dims.n_tx * spec.base.dims.n_rf
                  << "-dimensional SDP; expect hours per sweep point\n";
    }
    if (!c.config_path.empty()) {
        std::ifstream f(c.config_path);
        if (!f)
            throw Error(ErrorKind::invalid_argument, "cannot read config " + c.config_path);
        nlohmann::json j;
        try {
            f >> j;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::invalid_argument, std::string("config: ") + e.what());
        }
        spec = sweep_from_json(j, spec);
    }
    if (!c.ps_schedule.empty())
        spec = sweep_from_json({{"ps_schedule", c.ps_schedule}}, spec);
    return spec;
}

std::vector<double> default_values(SweepAxis axis)
{
    switch (axis) {
    case SweepAxis::sinr_db: return {-4.0, 0.0, 4.0, 8.0, 12.0};
    case SweepAxis::crb_max: return {0.2, 0.1, 0.05, 0.02};
    case SweepAxis::eh_dbm: return {-8.0, -5.0, -2.0, 1.0};
    }
    return {};
}

bool solver_trouble(const DesignResult& r)
{
    return r.status == DesignStatus::randomization_failed || (r.error && *r.error == ErrorKind::solver_failure);
}

int run_sweep_cmd(const Common& c, const std::string& axis, const std::string& values, const std::string& schemes,
                  const std::string& seeds, bool schemes_given, bool no_inherit, bool no_timestamp,
                  const std::string& out_path)
{
    SweepSpec spec = load_spec(c);
    if (!axis.empty())
        spec.axis = axis_from_string(axis);
    if (!values.empty()) {
        spec.values.clear();
        for (const auto& v : split(values))
            spec.values.push_back(std::stod(v));
    }
    if (spec.values.empty())
        spec.values = default_values(spec.axis);
    if (schemes_given) {
        spec.schemes.clear();
        for (const auto& s : split(schemes))
            spec.schemes.push_back(scheme_from_string(s));
    } else if (spec.schemes.empty()) {
        spec.schemes = all_schemes();
    }
    if (!seeds.empty()) {
        spec.seeds.clear();
        for (const auto& s : split(seeds))
            spec.seeds.push_back(std::stoull(s));
    }
    if (spec.seeds.empty())
        spec.seeds = {1};
    if (no_inherit)
        spec.inherit_tighter = false;
    spec.validate();

    const SweepTable table = run_sweep(spec, [&](const SweepRow& row) {
        std::fprintf(stderr, "%s=%g seed=%llu %-12s %s %s\n", to_string(spec.axis), row.value,
                     static_cast<unsigned long long>(row.seed), to_string(row.scheme),
                     row.result.feasible() ? to_string(row.result.status) : "infeasible",
                     row.result.feasible() ? std::to_string(row.result.power.total).c_str() : "");
    });
    std::ofstream f(out_path);
    if (!f)
        throw Error(ErrorKind::io, "cannot write " + out_path);
    write_sweep_csv(table, f, !no_timestamp);

    bool any_ok = false, trouble = false;
    for (const auto& row : table.rows) {
        any_ok = any_ok || row.result.feasible();
        trouble = trouble || solver_trouble(row.result);
    }
    if (trouble)
        return kExitSolver;
    return any_ok ? 0 : kExitInfeasible;
}

Scenario instance(const Common& c, std::uint64_t seed, double beta)
{
    const SweepSpec spec = load_spec(c);
    Scenario scn = generate_scenario(seed, spec.base);
    if (beta >= 0.0)
        scn.hw.beta_pa = beta;
    scn.validate();
    return scn;
}

int run_compare_cmd(const Common& c, std::uint64_t seed, const std::string& schemes)
{
    const Scenario scn = instance(c, seed, -1.0);
    std::vector<SchemeId> ids;
    for (const auto& s : split(schemes))
        ids.push_back(scheme_from_string(s));
    if (ids.empty())
        throw Error(ErrorKind::invalid_argument, "no schemes given");
    const auto results = compare_schemes(scn, ids, load_spec(c).ao);
    std::printf("scheme,status,rf_on,ps_on,%s\n", PowerBreakdown::csv_header().c_str());
    bool any_ok = false, trouble = false;
    for (const auto& r : results) {
        if (r.feasible())
            std::printf("%s,%s,%d,%d,%s\n", to_string(r.scheme), to_string(r.status), active_chains(r),
                        active_phase_shifters(r), r.power.csv_row().c_str());
        else
            std::printf("%s,infeasible,,,,,,,,  # %s\n", to_string(r.scheme), r.binding.c_str());
        any_ok = any_ok || r.feasible();
        trouble = trouble || solver_trouble(r);
    }
    if (trouble)
        return kExitSolver;
    return any_ok ? 0 : kExitInfeasible;
}

int run_dump_cmd(const Common& c, std::uint64_t seed, const std::string& scheme, double beta,
                 const std::string& out_path)
{
    const Scenario scn = instance(c, seed, beta);
    const DesignResult r = dump_design(scn, scheme_from_string(scheme), load_spec(c).ao, out_path);
    if (!r.feasible()) {
        std::cerr << "infeasible (" << (r.binding.empty() ? "unknown" : r.binding) << "); nothing written\n";
        return solver_trouble(r) ? kExitSolver : kExitInfeasible;
    }
    std::cerr << to_string(r.scheme) << ": total " << r.power.total << " W, " << active_chains(r) << " chains, "
              << active_phase_shifters(r) << " PSs\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hybrid beamforming with on-off control: sweeps, comparisons and design dumps"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "JSON sweep/scenario configuration");
        sub->add_flag("--full-scale", common.full_scale, "Full-size system (very slow)");
        sub->add_option("--ps-schedule", common.ps_schedule, "PS search schedule: geometric or exhaustive");
    };

    auto* cfg = app.add_subcommand("config", "Print the default configuration as JSON");
    add_common(cfg);

    std::string axis, values, schemes, seeds, out_path;
    bool no_inherit = false, no_timestamp = false;
    auto* sweep = app.add_subcommand("sweep", "Threshold sweep to CSV");
    add_common(sweep);
    sweep->add_option("--axis", axis, "sinr_db, crb_max or eh_dbm");
    sweep->add_option("--values", values, "Comma-separated, strictly monotone");
    auto* schemes_opt = sweep->add_option("--schemes", schemes, "Comma-separated scheme names");
    sweep->add_option("--seeds", seeds, "Comma-separated seeds");
    sweep->add_flag("--no-inherit", no_inherit, "Do not reuse designs from tighter points");
    sweep->add_flag("--no-timestamp", no_timestamp, "Omit the timestamp comment line");
    sweep->add_option("--out", out_path, "Output CSV")->required();

    std::uint64_t seed = 1;
    std::string compare_schemes_arg = "joint,no_onoff,ps_only,rf_only,digital_full,fixed_pa";
    auto* cmp = app.add_subcommand("compare", "Run schemes on one instance, CSV to stdout");
    add_common(cmp);
    cmp->add_option("--seed", seed, "Instance seed");
    cmp->add_option("--schemes", compare_schemes_arg, "Comma-separated scheme names");

    std::string scheme = "joint", dump_out;
    double beta = -1.0;
    auto* dump = app.add_subcommand("dump", "Per-antenna power and PS grid of one design");
    add_common(dump);
    dump->add_option("--seed", seed, "Instance seed");
    dump->add_option("--scheme", scheme, "Scheme name");
    dump->add_option("--beta", beta, "Override the PA exponent (0 = fixed efficiency)");
    dump->add_option("--out", dump_out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (cfg->parsed()) {
            std::cout << to_json(load_spec(common)).dump(2) << '\n';
            return 0;
        }
        if (sweep->parsed())
            return run_sweep_cmd(common, axis, values, schemes, seeds, schemes_opt->count() > 0, no_inherit,
                                 no_timestamp, out_path);
        if (cmp->parsed())
            return run_compare_cmd(common, seed, compare_schemes_arg);
        if (dump->parsed())
            return run_dump_cmd(common, seed, scheme, beta, dump_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (e.kind() == ErrorKind::invalid_argument || e.kind() == ErrorKind::io)
            return kExitUsage;
        return e.kind() == ErrorKind::solver_failure ? kExitSolver : kExitInfeasible;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: bad number: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
