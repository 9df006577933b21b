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

#ifndef ISCAP_ONOFF_CONTROL_HPP
#define ISCAP_ONOFF_CONTROL_HPP

#include "iscap/design.hpp"
#include "iscap/scenario.hpp"

#include <functional>
#include <vector>

namespace iscap {

/// Re-runs beamforming under a mask; must be deterministic in the mask.
using Reoptimizer = std::function<DesignResult(const OnOffMask&)>;

enum class PsSchedule { geometric, exhaustive };

struct SearchTrial {
    int switched_off = 0;
    bool feasible = false;
    double total = 0.0;
};

struct SearchResult {
    DesignResult best;
    std::vector<SearchTrial> trials; ///< baseline first
};

/// Indices of the on elements of `on`, sorted by ascending weight (stable in index).
std::vector<int> ascending_order(const VecR& weights, const std::vector<int>& candidates);

/// Switches off 1, 2, ... chains in ascending v_n order (never below K_IR
/// active chains), re-optimizing each; returns the minimum-power feasible
/// configuration, the baseline included. An infeasible baseline is returned
/// untouched.
SearchResult rf_onoff_search(const Scenario& scn, const DesignResult& baseline, const Reoptimizer& reopt);

/// Prefix sizes the PS search evaluates before refinement.
std::vector<int> ps_prefix_grid(int n_elements, PsSchedule schedule);

/// Switches off the PS elements of `base` in ascending |f_bar_ij| order on a
/// prefix schedule. The geometric schedule doubles the prefix until a trial
/// is infeasible, then refines around the best size by halving steps.
SearchResult ps_onoff_search(const Scenario& scn, const DesignResult& base, const Reoptimizer& reopt,
                             PsSchedule schedule = PsSchedule::geometric);

} // namespace iscap

#endif
