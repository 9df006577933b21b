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

#ifndef ISCAP_AO_DRIVER_HPP
#define ISCAP_AO_DRIVER_HPP

#include "iscap/analog_stage.hpp"
#include "iscap/design.hpp"
#include "iscap/digital_stage.hpp"
#include "iscap/onoff_control.hpp"
#include "iscap/scenario.hpp"

#include <vector>

namespace iscap {

struct AoOptions {
    int max_outer = 20;
    double rel_tol = 1e-4;
    StageOptions digital;
    /// Randomization discards most late refinement of the analog SCA, so
    /// inside the loop it runs on a shorter budget.
    StageOptions analog = [] {
        StageOptions s;
        s.max_iter = 10;
        s.rel_tol = 1e-3;
        return s;
    }();
    RandomizeOptions randomize; ///< seed is derived per call from the scenario seed and mask
    PsSchedule ps_schedule = PsSchedule::geometric;
};

/// Alternating digital/analog optimization under a fixed mask. Starts from
/// `warm` (masked) or from a full-on random-phase F. Power is not filled in.
/// Without `ps_switching` every unmasked PS keeps constant modulus.
DesignResult run_ao(const Scenario& scn, const OnOffMask& mask, const Design* warm, const AoOptions& opt,
                    bool ps_switching = true);

struct HardwareCount {
    int rf = 0;
    int ps = 0;
};

/// RF chains and PSs a scheme keeps powered for design `d`.
HardwareCount scheme_hardware(const Design& d, SchemeId scheme);

/// Exact power of a design under a scheme's hardware accounting:
/// joint/fixed_pa count active chains and nonzero PSs, no_onoff counts all,
/// rf_only counts all PSs, ps_only derives chains from PS columns,
/// digital_full has one chain and one switch per antenna and no PSs.
PowerBreakdown scheme_power(const Scenario& scn, const Design& d, SchemeId scheme);

/// The re-optimization the on-off searches call for `scheme`: the scheme's
/// beamforming under a fixed mask, started from the same all-on baseline, so
/// re-running it on a returned mask reproduces the returned design.
DesignResult reoptimize(const Scenario& scn, SchemeId scheme, const OnOffMask& mask, const AoOptions& opt = {},
                        bool ps_switching = true);

DesignResult solve_instance(const Scenario& scn, SchemeId scheme, const AoOptions& opt = {});

/// Runs every scheme on the same scenario, sharing the AO solves between
/// them. Results are in the order of `schemes`; failures stay per scheme.
std::vector<DesignResult> compare_schemes(const Scenario& scn, const std::vector<SchemeId>& schemes,
                                          const AoOptions& opt = {});

} // namespace iscap

#endif
