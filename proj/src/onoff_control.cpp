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

#include "iscap/onoff_control.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace iscap {

std::vector<int> ascending_order(const VecR& weights, const std::vector<int>& candidates)
{
    std::vector<int> order = candidates;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return weights(a) < weights(b); });
    return order;
}

namespace {

bool better(const DesignResult& cand, const DesignResult& best)
{
    return cand.feasible() && (!best.feasible() || cand.power.total < best.power.total);
}

} // namespace

SearchResult rf_onoff_search(const Scenario& scn, const DesignResult& baseline, const Reoptimizer& reopt)
{
    SearchResult out;
    out.best = baseline;
    out.trials.push_back({0, baseline.feasible(), baseline.power.total});
    if (!baseline.feasible())
        return out;
    const VecR v = design_chain_weights(baseline.design());
    std::vector<int> on;
    for (Eigen::Index j = 0; j < baseline.mask.rf_on.size(); ++j)
        if (baseline.mask.rf_on(j))
            on.push_back(static_cast<int>(j));
    const std::vector<int> order = ascending_order(v, on);
    const int max_off = static_cast<int>(on.size()) - scn.dims.k_ir;
    OnOffMask mask = baseline.mask;
    mask.rf_weights = v;
    for (int m = 1; m <= max_off; ++m) {
        mask.rf_on(order[m - 1]) = false;
        const DesignResult r = reopt(mask.normalized());
        out.trials.push_back({m, r.feasible(), r.power.total});
        if (better(r, out.best))
            out.best = r;
    }
    out.best.mask.rf_weights = v;
    return out;
}

std::vector<int> ps_prefix_grid(int n_elements, PsSchedule schedule)
{
    std::vector<int> g;
    if (schedule == PsSchedule::exhaustive) {
        for (int m = 1; m < n_elements; ++m)
            g.push_back(m);
        return g;
    }
    for (int m = 1; m < n_elements; m *= 2)
        g.push_back(m);
    return g;
}

SearchResult ps_onoff_search(const Scenario& scn, const DesignResult& base, const Reoptimizer& reopt,
                             PsSchedule schedule)
{
    SearchResult out;
    out.best = base;
    out.trials.push_back({0, base.feasible(), base.power.total});
    if (!base.feasible())
        return out;
    const int nt = static_cast<int>(base.F.rows());
    const int nrf = static_cast<int>(base.F.cols());
    const bool have_bar = base.f_bar.size() == base.F.size();
    MatR c(nt, nrf);
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nrf; ++j)
            c(i, j) = have_bar ? std::abs(base.f_bar(i * nrf + j)) : std::abs(base.F(i, j));

    const OnOffMask start = base.mask.normalized();
    std::vector<int> on;
    VecR flat(nt * nrf);
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nrf; ++j) {
            flat(i * nrf + j) = c(i, j);
            if (start.ps_on(i, j))
                on.push_back(i * nrf + j);
        }
    const std::vector<int> order = ascending_order(flat, on);
    const int n_on = static_cast<int>(order.size());

    std::map<int, DesignResult> done;
    auto trial = [&](int m) -> const DesignResult* {
        if (m <= 0 || m >= n_on)
            return nullptr;
        if (auto it = done.find(m); it != done.end())
            return &it->second;
        OnOffMask mask = start;
        mask.ps_weights = c;
        for (int t = 0; t < m; ++t)
            mask.ps_on(order[t] / nrf, order[t] % nrf) = false;
        mask = mask.normalized();
        if (mask.rf_count() < scn.dims.k_ir)
            return nullptr;
        const DesignResult& r = done.emplace(m, reopt(mask)).first->second;
        out.trials.push_back({m, r.feasible(), r.power.total});
        if (better(r, out.best))
            out.best = r;
        return &r;
    };

    const std::vector<int> grid = ps_prefix_grid(n_on, schedule);
    int best_m = 0;
    for (int m : grid) {
        const DesignResult* r = trial(m);
        if (!r)
            break;
        if (r->feasible() && r->power.total == out.best.power.total)
            best_m = m;
        if (schedule == PsSchedule::geometric && !r->feasible())
            break;
    }
    if (schedule == PsSchedule::geometric && best_m > 0) {
        // Halving steps around the best prefix size between grid points.
        for (int step = std::max(1, best_m / 2); step >= 1; step /= 2) {
            for (int m : {best_m - step, best_m + step}) {
                const DesignResult* r = trial(m);
                if (r && r->feasible() && r->power.total == out.best.power.total)
                    best_m = m;
            }
            if (step == 1)
                break;
        }
    }
    out.best.mask.ps_weights = c;
    return out;
}

} // namespace iscap
