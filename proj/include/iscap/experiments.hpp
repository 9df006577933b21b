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

#ifndef ISCAP_EXPERIMENTS_HPP
#define ISCAP_EXPERIMENTS_HPP

#include "iscap/ao_driver.hpp"
#include "iscap/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace iscap {

enum class SweepAxis { sinr_db, crb_max, eh_dbm };

const char* to_string(SweepAxis a);
SweepAxis axis_from_string(const std::string& s);

/// True when `a` is a stricter requirement than `b` on this axis.
bool tighter(SweepAxis axis, double a, double b);

struct SweepSpec {
    SweepAxis axis = SweepAxis::sinr_db;
    std::vector<double> values;
    ScenarioConfig base = desk_config(); ///< dimensions and the fixed thresholds
    std::vector<SchemeId> schemes;
    std::vector<std::uint64_t> seeds;
    /// Keep the design found at the next tighter point when it is cheaper
    /// (it stays feasible when the requirement is relaxed).
    bool inherit_tighter = true;
    AoOptions ao;

    /// Throws Error(invalid_argument): empty schemes/seeds/values or values
    /// not strictly monotone.
    void validate() const;
};

/// Keys: axis, values, schemes, seeds, inherit_tighter, ps_schedule and
/// scenario (a ScenarioConfig object). Missing keys keep `defaults`.
SweepSpec sweep_from_json(const nlohmann::json& j, const SweepSpec& defaults = {});
nlohmann::json to_json(const SweepSpec& spec);

struct SweepRow {
    double value = 0.0;
    SchemeId scheme = SchemeId::joint;
    std::uint64_t seed = 0;
    DesignResult result;
    bool inherited = false;
};

struct SweepTable {
    SweepSpec spec;
    std::vector<SweepRow> rows; ///< value-major in the order of spec.values, then scheme, then seed

    /// Mean total power over the feasible seeds; NaN when none is feasible.
    double mean_total(double value, SchemeId scheme) const;
    int feasible_seeds(double value, SchemeId scheme) const;
};

using SweepProgress = std::function<void(const SweepRow&)>;

/// Scenario of one sweep cell: the seed's channels with the axis threshold
/// replaced.
Scenario sweep_scenario(const Scenario& seeded, const SweepSpec& spec, double value);

SweepTable run_sweep(const SweepSpec& spec, const SweepProgress& progress = {});

/// CSV columns: axis,value,scheme,seed,status,inherited,rf_on,ps_on,
/// p_pa_w,p_rf_w,p_ps_w,p_sw_w,p_static_w,total_w,mean_total_w,feasible_seeds.
/// Power fields are empty for infeasible rows. The optional first line is a
/// '#' comment with the generation time.
void write_sweep_csv(const SweepTable& table, std::ostream& out, bool timestamp = true);

/// Active RF chains and PSs of a result as counted by its scheme.
int active_chains(const DesignResult& r);
int active_phase_shifters(const DesignResult& r);

/// Writes `antenna,p_out_w` rows then the PS on/off grid (rows antennas,
/// columns RF chains) as '#'-prefixed lines. Nothing is written for an
/// infeasible design; returns the result either way.
DesignResult dump_design(const Scenario& scn, SchemeId scheme, const AoOptions& opt, const std::string& out_path);
void write_design_csv(const DesignResult& r, std::ostream& out);

} // namespace iscap

#endif
