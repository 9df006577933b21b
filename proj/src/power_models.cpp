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

#include "iscap/power_models.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace iscap {

std::string PowerBreakdown::csv_header()
{
    return "p_pa_w,p_rf_w,p_ps_w,p_sw_w,p_static_w,total_w";
}

std::string PowerBreakdown::csv_row() const
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g", p_pa, p_rf, p_ps, p_sw, p_static, total);
    return buf;
}

double pa_power(const VecR& p_out, const HardwareConstants& hw)
{
    const double c = std::pow(hw.p_ant_max, hw.beta_pa) / hw.eta_max;
    double s = 0.0;
    for (Eigen::Index n = 0; n < p_out.size(); ++n) {
        const double p = p_out(n);
        if (p < -1e-12 * std::max(1.0, hw.p_ant_max))
            throw Error(ErrorKind::invalid_argument, "negative antenna power at index " + std::to_string(n));
        if (p <= 0.0)
            continue;
        s += std::pow(p, 1.0 - hw.beta_pa);
    }
    return c * s;
}

double indicator_relax(double x, double eps)
{
    if (x < 0.0)
        throw Error(ErrorKind::invalid_argument, "indicator_relax needs x >= 0");
    if (!(eps > 0.0))
        throw Error(ErrorKind::invalid_argument, "indicator_relax needs eps > 0");
    return std::log1p(x / eps) / std::log1p(1.0 / eps);
}

double rf_power_exact(const VecR& v, double p_rf, double tol)
{
    return p_rf * static_cast<double>((v.array() > tol).count());
}

double relaxed_on_off_power(const VecR& weights, double unit_power, double eps)
{
    double s = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        s += indicator_relax(std::max(0.0, weights(i)), eps);
    return unit_power * s;
}

double rf_power_relaxed(const VecR& v, double p_rf, double eps)
{
    return relaxed_on_off_power(v, p_rf, eps);
}

double ps_power_relaxed(const MatC& f, double p_ps, double eps)
{
    const MatR mag = f.cwiseAbs();
    return relaxed_on_off_power(Eigen::Map<const VecR>(mag.data(), mag.size()), p_ps, eps);
}

double ps_power_relaxed_lifted(const MatC& f, double p_ps, double eps)
{
    const MatR sq = f.cwiseAbs2();
    return relaxed_on_off_power(Eigen::Map<const VecR>(sq.data(), sq.size()), p_ps, eps);
}

// With K = exp(a b) the logistic model simplifies to
// M (1 - exp(-a p)) / (1 + K exp(-a p)), which avoids the cancellation in
// Psi - M Omega at small inputs.
double eh_dc(double p_in, const EhParams& eh)
{
    if (p_in < 0.0)
        throw Error(ErrorKind::invalid_argument, "negative RF input power");
    const double u = std::exp(-eh.a * p_in);
    const double k = std::exp(eh.a * eh.b);
    return eh.m * (-std::expm1(-eh.a * p_in)) / (1.0 + k * u);
}

double eh_threshold_invert(double gamma_dc, const EhParams& eh)
{
    if (!(gamma_dc > 0.0))
        throw Error(ErrorKind::invalid_argument, "DC threshold must be positive");
    if (gamma_dc >= eh.m)
        throw Error(ErrorKind::saturation_unreachable, "DC threshold at or above saturation M");
    const double k = std::exp(eh.a * eh.b);
    return std::log1p(gamma_dc * (1.0 + k) / (eh.m - gamma_dc)) / eh.a;
}

double switch_power(const Dimensions& dims, double p_sw)
{
    return p_sw * (dims.n_rf + dims.n_tx * dims.n_rf);
}

VecR antenna_powers(const MatC& f, const std::vector<VecC>& w, const MatC& s)
{
    VecR p = (f * s * f.adjoint()).diagonal().real();
    for (const auto& wk : w)
        p += (f * wk).cwiseAbs2();
    return p.cwiseMax(0.0);
}

VecR chain_weights(const std::vector<VecC>& w, const MatC& s)
{
    VecR v = s.diagonal().real();
    for (const auto& wk : w)
        v += wk.cwiseAbs2();
    return v.cwiseMax(0.0);
}

PowerBreakdown total_power(const VecR& p_out, int rf_count, int ps_count, double p_sw_total,
                           const HardwareConstants& hw)
{
    for (Eigen::Index n = 0; n < p_out.size(); ++n)
        if (p_out(n) > hw.p_ant_max * (1.0 + 1e-6))
            throw Error(ErrorKind::invalid_argument, "antenna " + std::to_string(n) + " exceeds P_max");
    PowerBreakdown b;
    b.p_pa = pa_power(p_out, hw);
    b.p_rf = hw.p_rf * rf_count;
    b.p_ps = hw.p_ps * ps_count;
    b.p_sw = p_sw_total;
    b.p_static = hw.p_static;
    b.total = b.p_pa + b.p_rf + b.p_ps + b.p_sw + b.p_static;
    return b;
}

PowerBreakdown total_power(const MatC& f, const std::vector<VecC>& w, const MatC& s, const Dimensions& dims,
                           const HardwareConstants& hw)
{
    const VecR v = chain_weights(w, s);
    const int rf = static_cast<int>((v.array() > kActivationTol).count());
    const int ps = static_cast<int>((f.array().abs() > 0.0).count());
    return total_power(antenna_powers(f, w, s), rf, ps, switch_power(dims, hw.p_sw), hw);
}

} // namespace iscap
