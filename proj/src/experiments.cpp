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

#include "iscap/experiments.hpp"

#include "iscap/power_models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>

namespace iscap {

const char* to_string(SweepAxis a)
{
    switch (a) {
    case SweepAxis::sinr_db: return "sinr_db";
    case SweepAxis::crb_max: return "crb_max";
    case SweepAxis::eh_dbm: return "eh_dbm";
    }
    return "?";
}

SweepAxis axis_from_string(const std::string& s)
{
    for (SweepAxis a : {SweepAxis::sinr_db, SweepAxis::crb_max, SweepAxis::eh_dbm})
        if (s == to_string(a))
            return a;
    throw Error(ErrorKind::invalid_argument, "unknown sweep axis '" + s + "'");
}

bool tighter(SweepAxis axis, double a, double b)
{
    return axis == SweepAxis::crb_max ? a < b : a > b;
}

void SweepSpec::validate() const
{
    if (schemes.empty())
        throw Error(ErrorKind::invalid_argument, "sweep needs at least one scheme");
    if (seeds.empty())
        throw Error(ErrorKind::invalid_argument, "sweep needs at least one seed");
    if (values.empty())
        throw Error(ErrorKind::invalid_argument, "sweep needs at least one axis value");
    bool up = true, down = true;
    for (std::size_t i = 1; i < values.size(); ++i) {
        up = up && values[i] > values[i - 1];
        down = down && values[i] < values[i - 1];
    }
    if (!up && !down)
        throw Error(ErrorKind::invalid_argument, "sweep values must be strictly monotone");
    if (axis == SweepAxis::crb_max)
        for (double v : values)
            if (!(v > 0.0))
                throw Error(ErrorKind::invalid_argument, "crb_max values must be positive");
}

SweepSpec sweep_from_json(const nlohmann::json& j, const SweepSpec& defaults)
{
    SweepSpec s = defaults;
    try {
        if (j.contains("axis"))
            s.axis = axis_from_string(j["axis"].get<std::string>());
        if (j.contains("values"))
            s.values = j["values"].get<std::vector<double>>();
        if (j.contains("schemes")) {
            s.schemes.clear();
            for (const auto& name : j["schemes"])
                s.schemes.push_back(scheme_from_string(name.get<std::string>()));
        }
        if (j.contains("seeds"))
            s.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        s.inherit_tighter = j.value("inherit_tighter", s.inherit_tighter);
        if (j.contains("ps_schedule")) {
            const auto name = j["ps_schedule"].get<std::string>();
            if (name == "geometric")
                s.ao.ps_schedule = PsSchedule::geometric;
            else if (name == "exhaustive")
                s.ao.ps_schedule = PsSchedule::exhaustive;
            else
                throw Error(ErrorKind::invalid_argument, "unknown ps_schedule '" + name + "'");
        }
        if (j.contains("scenario")) {
            nlohmann::json merged = to_json(s.base);
            merged.merge_patch(j["scenario"]);
            s.base = config_from_json(merged);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::invalid_argument, std::string("sweep config: ") + e.what());
    }
    return s;
}

nlohmann::json to_json(const SweepSpec& spec)
{
    nlohmann::json j;
    j["axis"] = to_string(spec.axis);
    j["values"] = spec.values;
    j["schemes"] = nlohmann::json::array();
    for (SchemeId s : spec.schemes)
        j["schemes"].push_back(to_string(s));
    j["seeds"] = spec.seeds;
    j["inherit_tighter"] = spec.inherit_tighter;
    j["ps_schedule"] = spec.ao.ps_schedule == PsSchedule::geometric ? "geometric" : "exhaustive";
    j["scenario"] = to_json(spec.base);
    return j;
}

double SweepTable::mean_total(double value, SchemeId scheme) const
{
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rows)
        if (r.value == value && r.scheme == scheme && r.result.feasible()) {
            sum += r.result.power.total;
            ++n;
        }
    return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

int SweepTable::feasible_seeds(double value, SchemeId scheme) const
{
    int n = 0;
    for (const auto& r : rows)
        n += r.value == value && r.scheme == scheme && r.result.feasible();
    return n;
}

Scenario sweep_scenario(const Scenario& seeded, const SweepSpec& spec, double value)
{
    double sinr_db = spec.base.sinr_db, crb = spec.base.crb_max, eh_dbm = spec.base.eh_dc_dbm;
    switch (spec.axis) {
    case SweepAxis::sinr_db: sinr_db = value; break;
    case SweepAxis::crb_max: crb = value; break;
    case SweepAxis::eh_dbm: eh_dbm = value; break;
    }
    return with_thresholds(seeded, db_to_linear(sinr_db), crb, dbm_to_watt(eh_dbm));
}

namespace {

// Power a scheme ranks its own designs by; fixed_pa ranks with the PA
// efficiency held fixed.
double selection_total(const Scenario& scn, const DesignResult& r)
{
    if (!r.feasible())
        return std::numeric_limits<double>::infinity();
    if (r.scheme != SchemeId::fixed_pa)
        return r.power.total;
    Scenario lin = scn;
    lin.hw.beta_pa = 0.0;
    return scheme_power(lin, r.design(), r.scheme).total;
}

// `r` re-evaluated on `scn` (thresholds may differ) under `scheme`.
DesignResult reprice(const Scenario& scn, const DesignResult& r, SchemeId scheme)
{
    DesignResult out = r;
    out.scheme = scheme;
    out.slacks = check_constraints(scn, r.design());
    out.power = scheme_power(scn, r.design(), scheme);
    if (!out.slacks.feasible(1e-6)) {
        out.status = DesignStatus::infeasible;
        out.power.total = std::numeric_limits<double>::infinity();
    }
    return out;
}

} // namespace

SweepTable run_sweep(const SweepSpec& spec, const SweepProgress& progress)
{
    spec.validate();
    SweepTable table;
    table.spec = spec;
    const std::size_t nv = spec.values.size(), ns = spec.schemes.size(), nseed = spec.seeds.size();
    std::vector<SweepRow> grid(nv * ns * nseed);
    auto at = [&](std::size_t v, std::size_t s, std::size_t k) -> SweepRow& { return grid[(v * ns + s) * nseed + k]; };

    std::vector<std::size_t> order(nv);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return tighter(spec.axis, spec.values[a], spec.values[b]);
    });

    for (std::size_t k = 0; k < nseed; ++k) {
        const Scenario seeded = generate_scenario(spec.seeds[k], spec.base);
        std::vector<std::optional<DesignResult>> prev(ns);
        for (std::size_t v : order) {
            const Scenario scn = sweep_scenario(seeded, spec, spec.values[v]);
            std::vector<DesignResult> res = compare_schemes(scn, spec.schemes, spec.ao);
            std::vector<bool> inherited(ns, false);
            if (spec.inherit_tighter)
                for (std::size_t s = 0; s < ns; ++s) {
                    if (!prev[s] || !prev[s]->feasible())
                        continue;
                    const DesignResult cand = reprice(scn, *prev[s], spec.schemes[s]);
                    if (cand.feasible() && selection_total(scn, cand) < selection_total(scn, res[s])) {
                        res[s] = cand;
                        inherited[s] = true;
                    }
                }
            // Joint also takes any cheaper partial-scheme design of this cell.
            for (std::size_t j = 0; j < ns; ++j) {
                if (spec.schemes[j] != SchemeId::joint)
                    continue;
                for (std::size_t s = 0; s < ns; ++s) {
                    const SchemeId other = spec.schemes[s];
                    if (other != SchemeId::no_onoff && other != SchemeId::ps_only && other != SchemeId::rf_only)
                        continue;
                    if (!res[s].feasible())
                        continue;
                    const DesignResult cand = reprice(scn, res[s], SchemeId::joint);
                    if (cand.feasible() && (!res[j].feasible() || cand.power.total < res[j].power.total)) {
                        res[j] = cand;
                        inherited[j] = inherited[s];
                    }
                }
            }
            for (std::size_t s = 0; s < ns; ++s) {
                SweepRow& row = at(v, s, k);
                row.value = spec.values[v];
                row.scheme = spec.schemes[s];
                row.seed = spec.seeds[k];
                row.result = res[s];
                row.inherited = inherited[s];
                prev[s] = res[s];
                if (progress)
                    progress(row);
            }
        }
    }
    table.rows = std::move(grid);
    return table;
}

int active_chains(const DesignResult& r)
{
    if (!r.feasible())
        return 0;
    return scheme_hardware(r.design(), r.scheme).rf;
}

int active_phase_shifters(const DesignResult& r)
{
    if (!r.feasible())
        return 0;
    return scheme_hardware(r.design(), r.scheme).ps;
}

namespace {

std::string num(double x)
{
    if (!std::isfinite(x))
        return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

} // namespace

void write_sweep_csv(const SweepTable& table, std::ostream& out, bool timestamp)
{
    if (timestamp) {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[64];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        out << "# generated " << buf << '\n';
    }
    out << "axis,value,scheme,seed,status,inherited,rf_on,ps_on," << PowerBreakdown::csv_header()
        << ",mean_total_w,feasible_seeds\n";
    for (const auto& row : table.rows) {
        const DesignResult& r = row.result;
        const bool ok = r.feasible();
        out << to_string(table.spec.axis) << ',' << num(row.value) << ',' << to_string(row.scheme) << ',' << row.seed
            << ',' << (ok ? to_string(r.status) : "infeasible") << ',' << (row.inherited ? 1 : 0) << ',';
        if (ok)
            out << active_chains(r) << ',' << active_phase_shifters(r) << ',' << r.power.csv_row();
        else
            out << ",,,,,,,";
        out << ',' << num(table.mean_total(row.value, row.scheme)) << ','
            << table.feasible_seeds(row.value, row.scheme) << '\n';
    }
}

void write_design_csv(const DesignResult& r, std::ostream& out)
{
    const VecR p = antenna_powers(r.F, r.w, r.S);
    out << "antenna,p_out_w\n";
    for (Eigen::Index i = 0; i < p.size(); ++i)
        out << i << ',' << num(std::max(p(i), 0.0)) << '\n';
    out << '\n' << "antenna,ps_on\n";
    const std::string grid = mask_grid(r.effective_ps());
    std::size_t start = 0;
    for (Eigen::Index i = 0; i < r.F.rows(); ++i) {
        const std::size_t end = grid.find('\n', start);
        out << i << ',' << grid.substr(start, end - start) << '\n';
        start = end + 1;
    }
}

DesignResult dump_design(const Scenario& scn, SchemeId scheme, const AoOptions& opt, const std::string& out_path)
{
    DesignResult r = solve_instance(scn, scheme, opt);
    if (!r.feasible())
        return r;
    std::ofstream f(out_path);
    if (!f)
        throw Error(ErrorKind::io, "cannot write " + out_path);
    write_design_csv(r, f);
    if (!f)
        throw Error(ErrorKind::io, "write failed: " + out_path);
    return r;
}

} // namespace iscap
