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

#include "iscap/scenario.hpp"

#include "iscap/array_sensing.hpp"
#include "iscap/rng.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace iscap {

namespace {

// The logistic harvester needs milliwatts of RF input, which the path-loss law
// only delivers at sub-metre range; targets are placed so the CRB bound binds.
constexpr double kDeskErDistance = 0.4;
constexpr double kDeskTargetDistance = 700.0;

} // namespace

void Dimensions::validate() const
{
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::invalid_argument, msg); };
    if (n_tx < 1 || n_rx < 1 || n_rf < 1 || dwell < 1)
        fail("antenna, RF-chain and dwell counts must be >= 1");
    if (k_ir < 0 || k_er < 0 || k_s < 0)
        fail("receiver and target counts must be >= 0");
    if (k_ir + k_er + k_s == 0)
        fail("at least one of K_IR, K_ER, K_S must be positive");
    if (!(k_ir <= n_rf && n_rf <= n_tx && n_tx <= n_rx))
        fail("require K_IR <= N_RF <= N_T <= N_R");
}

void HardwareConstants::validate() const
{
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::invalid_argument, msg); };
    if (p_ant_max < 0 || p_rf < 0 || p_ps < 0 || p_sw < 0 || p_static < 0)
        fail("hardware powers must be nonnegative");
    if (!(eta_max > 0.0 && eta_max <= 1.0))
        fail("eta_max must lie in (0, 1]");
    if (!(beta_pa >= 0.0 && beta_pa <= 1.0))
        fail("beta_pa must lie in [0, 1]");
    if (!(eps_indicator > 0.0))
        fail("eps_indicator must be positive");
}

void Scenario::validate() const
{
    dims.validate();
    hw.validate();
    auto fail = [](ErrorKind k, const std::string& msg) { throw Error(k, msg); };
    if (static_cast<int>(h.size()) != dims.k_ir || static_cast<int>(d.size()) != dims.k_er)
        fail(ErrorKind::dimension_mismatch, "channel count does not match K_IR/K_ER");
    for (const auto& v : h)
        if (v.size() != dims.n_tx)
            fail(ErrorKind::dimension_mismatch, "IR channel length != N_T");
    for (const auto& v : d)
        if (v.size() != dims.n_tx)
            fail(ErrorKind::dimension_mismatch, "ER channel length != N_T");
    if (static_cast<int>(theta.size()) != dims.k_s || static_cast<int>(beta_coeff.size()) != dims.k_s)
        fail(ErrorKind::dimension_mismatch, "target parameter count != K_S");
    if (static_cast<int>(noise_ir.size()) != dims.k_ir)
        fail(ErrorKind::dimension_mismatch, "noise_ir count != K_IR");
    for (double n : noise_ir)
        if (!(n > 0.0))
            fail(ErrorKind::invalid_argument, "noise powers must be positive");
    if (dims.k_s > 0 && !(noise_sense > 0.0))
        fail(ErrorKind::invalid_argument, "noise powers must be positive");
    if (static_cast<int>(thresholds.sinr_min.size()) != dims.k_ir ||
        static_cast<int>(thresholds.eh_dc_min.size()) != dims.k_er ||
        static_cast<int>(eh.size()) != dims.k_er)
        fail(ErrorKind::dimension_mismatch, "threshold/EH parameter counts do not match dimensions");
    for (double x : thresholds.sinr_min)
        if (!(x > 0.0))
            fail(ErrorKind::invalid_argument, "thresholds must be positive");
    for (double x : thresholds.eh_dc_min)
        if (!(x > 0.0))
            fail(ErrorKind::invalid_argument, "thresholds must be positive");
    if (!(thresholds.crb_max > 0.0))
        fail(ErrorKind::invalid_argument, "thresholds must be positive");
}

double path_loss_db(double distance_m)
{
    if (!(distance_m > 0.0))
        throw Error(ErrorKind::invalid_argument, "distance must be positive");
    return 51.2 + 41.2 * std::log10(distance_m);
}

double path_loss_amplitude(double distance_m)
{
    return std::pow(10.0, -path_loss_db(distance_m) / 20.0);
}

Scenario generate_scenario(std::uint64_t seed, const ScenarioConfig& cfg)
{
    cfg.dims.validate();
    cfg.hw.validate();
    const auto& g = cfg.geometry;
    if (!(g.ir_m > 0.0 && g.target_m > 0.0 && g.er_m > 0.0))
        throw Error(ErrorKind::invalid_argument, "distances must be positive");

    Scenario scn;
    scn.dims = cfg.dims;
    scn.hw = cfg.hw;
    scn.seed = seed;
    scn.rng_algorithm = Rng::algorithm;

    const int nt = cfg.dims.n_tx;
    Rng rng(seed);

    // Fixed draw order: IR channels, ER channels, targets.
    const double ir_amp = path_loss_amplitude(g.ir_m);
    for (int k = 0; k < cfg.dims.k_ir; ++k)
        scn.h.push_back(ir_amp * rng.complex_normal(nt));

    const double er_amp = path_loss_amplitude(g.er_m);
    const bool pure_los = std::isinf(cfg.rician_k_db) && cfg.rician_k_db > 0;
    const double kf = pure_los ? 0.0 : db_to_linear(cfg.rician_k_db);
    for (int j = 0; j < cfg.dims.k_er; ++j) {
        const double angle = rng.uniform(-kPi / 2.0, kPi / 2.0);
        const VecC los = steering(angle, nt);
        const VecC nlos = rng.complex_normal(nt);
        if (pure_los)
            scn.d.push_back(er_amp * los);
        else
            scn.d.push_back(er_amp * (std::sqrt(kf / (kf + 1.0)) * los + std::sqrt(1.0 / (kf + 1.0)) * nlos));
    }

    const double tgt_amp = path_loss_amplitude(g.target_m);
    for (int i = 0; i < cfg.dims.k_s; ++i) {
        double angle = rng.uniform(-cfg.max_target_angle, cfg.max_target_angle);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        if (cfg.target_angles) {
            if (static_cast<int>(cfg.target_angles->size()) != cfg.dims.k_s)
                throw Error(ErrorKind::dimension_mismatch, "explicit target angle count != K_S");
            angle = (*cfg.target_angles)[i];
        }
        scn.theta.push_back(angle);
        scn.beta_coeff.push_back(std::polar(tgt_amp, phase));
    }

    scn.noise_ir.assign(cfg.dims.k_ir, dbm_to_watt(cfg.noise_ir_dbm));
    scn.noise_sense = dbm_to_watt(cfg.noise_sense_dbm);
    scn.thresholds.sinr_min.assign(cfg.dims.k_ir, db_to_linear(cfg.sinr_db));
    scn.thresholds.crb_max = cfg.crb_max;
    scn.thresholds.eh_dc_min.assign(cfg.dims.k_er, dbm_to_watt(cfg.eh_dc_dbm));
    scn.eh.assign(cfg.dims.k_er, cfg.eh);
    scn.validate();
    return scn;
}

Scenario generate_scenario(std::uint64_t seed, const Dimensions& dims, const Geometry& geometry,
                           double rician_k_db)
{
    ScenarioConfig cfg = full_scale_config();
    cfg.dims = dims;
    cfg.geometry = geometry;
    cfg.rician_k_db = rician_k_db;
    return generate_scenario(seed, cfg);
}

ScenarioConfig full_scale_config()
{
    ScenarioConfig cfg;
    cfg.dims = Dimensions{32, 32, 16, 6, 5, 5, 30};
    cfg.geometry = Geometry{50.0, 50.0, 10.0};
    cfg.rician_k_db = 3.0;
    cfg.noise_ir_dbm = -103.0;
    cfg.noise_sense_dbm = -103.0;
    cfg.sinr_db = 6.0;
    cfg.crb_max = 0.1;
    cfg.eh_dc_dbm = -2.0;
    cfg.hw = HardwareConstants{};
    cfg.eh = EhParams{};
    return cfg;
}

Scenario full_scale_scenario(std::uint64_t seed)
{
    return generate_scenario(seed, full_scale_config());
}

ScenarioConfig desk_config()
{
    ScenarioConfig cfg = full_scale_config();
    cfg.dims = Dimensions{8, 8, 4, 2, 1, 1, 10};
    cfg.geometry = Geometry{50.0, kDeskTargetDistance, kDeskErDistance};
    return cfg;
}

Scenario with_thresholds(const Scenario& scn, double sinr_linear, double crb_max, double eh_dc_watt)
{
    Scenario out = scn;
    out.thresholds.sinr_min.assign(scn.dims.k_ir, sinr_linear);
    out.thresholds.crb_max = crb_max;
    out.thresholds.eh_dc_min.assign(scn.dims.k_er, eh_dc_watt);
    out.validate();
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using nlohmann::json;

json complex_array(const VecC& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(v(i).real());
        a.push_back(v(i).imag());
    }
    return a;
}

VecC complex_from(const json& a)
{
    if (!a.is_array() || a.size() % 2 != 0)
        throw Error(ErrorKind::io, "complex vectors are stored as interleaved re/im arrays");
    VecC v(static_cast<Eigen::Index>(a.size() / 2));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = cd(a[2 * i].get<double>(), a[2 * i + 1].get<double>());
    return v;
}

json dims_json(const Dimensions& d)
{
    return {{"n_tx", d.n_tx}, {"n_rx", d.n_rx}, {"n_rf", d.n_rf}, {"k_ir", d.k_ir},
            {"k_er", d.k_er}, {"k_s", d.k_s},   {"dwell", d.dwell}};
}

Dimensions dims_from(const json& j, Dimensions d)
{
    d.n_tx = j.value("n_tx", d.n_tx);
    d.n_rx = j.value("n_rx", d.n_rx);
    d.n_rf = j.value("n_rf", d.n_rf);
    d.k_ir = j.value("k_ir", d.k_ir);
    d.k_er = j.value("k_er", d.k_er);
    d.k_s = j.value("k_s", d.k_s);
    d.dwell = j.value("dwell", d.dwell);
    return d;
}

json hw_json(const HardwareConstants& hw)
{
    return {{"p_ant_max", hw.p_ant_max}, {"eta_max", hw.eta_max}, {"beta_pa", hw.beta_pa},
            {"p_rf", hw.p_rf},           {"p_ps", hw.p_ps},       {"p_sw", hw.p_sw},
            {"p_static", hw.p_static},   {"eps_indicator", hw.eps_indicator}};
}

HardwareConstants hw_from(const json& j, HardwareConstants hw)
{
    hw.p_ant_max = j.value("p_ant_max", hw.p_ant_max);
    hw.eta_max = j.value("eta_max", hw.eta_max);
    hw.beta_pa = j.value("beta_pa", hw.beta_pa);
    hw.p_rf = j.value("p_rf", hw.p_rf);
    hw.p_ps = j.value("p_ps", hw.p_ps);
    hw.p_sw = j.value("p_sw", hw.p_sw);
    hw.p_static = j.value("p_static", hw.p_static);
    hw.eps_indicator = j.value("eps_indicator", hw.eps_indicator);
    return hw;
}

} // namespace

nlohmann::json to_json(const Scenario& scn)
{
    json j;
    j["dims"] = dims_json(scn.dims);
    j["seed"] = scn.seed;
    j["rng_algorithm"] = scn.rng_algorithm;
    j["channels"]["ir"] = json::array();
    for (const auto& v : scn.h)
        j["channels"]["ir"].push_back(complex_array(v));
    j["channels"]["er"] = json::array();
    for (const auto& v : scn.d)
        j["channels"]["er"].push_back(complex_array(v));
    j["targets"]["theta_rad"] = scn.theta;
    VecC b(static_cast<Eigen::Index>(scn.beta_coeff.size()));
    for (std::size_t i = 0; i < scn.beta_coeff.size(); ++i)
        b(static_cast<Eigen::Index>(i)) = scn.beta_coeff[i];
    j["targets"]["beta"] = complex_array(b);
    j["noise"]["ir_w"] = scn.noise_ir;
    j["noise"]["sense_w"] = scn.noise_sense;
    j["thresholds"]["sinr_min"] = scn.thresholds.sinr_min;
    j["thresholds"]["crb_max"] = scn.thresholds.crb_max;
    j["thresholds"]["eh_dc_min_w"] = scn.thresholds.eh_dc_min;
    j["hardware"] = hw_json(scn.hw);
    j["eh_params"] = json::array();
    for (const auto& e : scn.eh)
        j["eh_params"].push_back({{"m_w", e.m}, {"a_per_w", e.a}, {"b_w", e.b}});
    return j;
}

Scenario scenario_from_json(const nlohmann::json& j)
{
    try {
        Scenario scn;
        scn.dims = dims_from(j.at("dims"), Dimensions{});
        scn.seed = j.value("seed", std::uint64_t{0});
        scn.rng_algorithm = j.value("rng_algorithm", std::string{});
        for (const auto& v : j.at("channels").at("ir"))
            scn.h.push_back(complex_from(v));
        for (const auto& v : j.at("channels").at("er"))
            scn.d.push_back(complex_from(v));
        scn.theta = j.at("targets").at("theta_rad").get<std::vector<double>>();
        const VecC b = complex_from(j.at("targets").at("beta"));
        scn.beta_coeff.assign(b.data(), b.data() + b.size());
        scn.noise_ir = j.at("noise").at("ir_w").get<std::vector<double>>();
        scn.noise_sense = j.at("noise").at("sense_w").get<double>();
        scn.thresholds.sinr_min = j.at("thresholds").at("sinr_min").get<std::vector<double>>();
        scn.thresholds.crb_max = j.at("thresholds").at("crb_max").get<double>();
        scn.thresholds.eh_dc_min = j.at("thresholds").at("eh_dc_min_w").get<std::vector<double>>();
        scn.hw = hw_from(j.at("hardware"), HardwareConstants{});
        for (const auto& e : j.at("eh_params"))
            scn.eh.push_back(EhParams{e.at("m_w").get<double>(), e.at("a_per_w").get<double>(),
                                      e.at("b_w").get<double>()});
        scn.validate();
        return scn;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::io, std::string("malformed scenario: ") + e.what());
    }
}

nlohmann::json to_json(const ScenarioConfig& cfg)
{
    json j;
    j["dims"] = dims_json(cfg.dims);
    j["geometry"] = {{"ir_m", cfg.geometry.ir_m}, {"target_m", cfg.geometry.target_m},
                     {"er_m", cfg.geometry.er_m}};
    j["rician_k_db"] = cfg.rician_k_db;
    j["noise"] = {{"ir_dbm", cfg.noise_ir_dbm}, {"sense_dbm", cfg.noise_sense_dbm}};
    j["thresholds"] = {{"sinr_db", cfg.sinr_db}, {"crb_max", cfg.crb_max}, {"eh_dc_dbm", cfg.eh_dc_dbm}};
    j["hardware"] = hw_json(cfg.hw);
    j["eh_params"] = {{"m_w", cfg.eh.m}, {"a_per_w", cfg.eh.a}, {"b_w", cfg.eh.b}};
    j["max_target_angle_rad"] = cfg.max_target_angle;
    if (cfg.target_angles)
        j["target_angles_rad"] = *cfg.target_angles;
    return j;
}

ScenarioConfig config_from_json(const nlohmann::json& j)
{
    try {
        ScenarioConfig cfg = desk_config();
        if (j.contains("dims"))
            cfg.dims = dims_from(j["dims"], cfg.dims);
        if (j.contains("geometry")) {
            const auto& g = j["geometry"];
            cfg.geometry.ir_m = g.value("ir_m", cfg.geometry.ir_m);
            cfg.geometry.target_m = g.value("target_m", cfg.geometry.target_m);
            cfg.geometry.er_m = g.value("er_m", cfg.geometry.er_m);
        }
        cfg.rician_k_db = j.value("rician_k_db", cfg.rician_k_db);
        if (j.contains("noise")) {
            cfg.noise_ir_dbm = j["noise"].value("ir_dbm", cfg.noise_ir_dbm);
            cfg.noise_sense_dbm = j["noise"].value("sense_dbm", cfg.noise_sense_dbm);
        }
        if (j.contains("thresholds")) {
            const auto& t = j["thresholds"];
            cfg.sinr_db = t.value("sinr_db", cfg.sinr_db);
            cfg.crb_max = t.value("crb_max", cfg.crb_max);
            cfg.eh_dc_dbm = t.value("eh_dc_dbm", cfg.eh_dc_dbm);
        }
        if (j.contains("hardware"))
            cfg.hw = hw_from(j["hardware"], cfg.hw);
        if (j.contains("eh_params")) {
            const auto& e = j["eh_params"];
            cfg.eh.m = e.value("m_w", cfg.eh.m);
            cfg.eh.a = e.value("a_per_w", cfg.eh.a);
            cfg.eh.b = e.value("b_w", cfg.eh.b);
        }
        cfg.max_target_angle = j.value("max_target_angle_rad", cfg.max_target_angle);
        if (j.contains("target_angles_rad"))
            cfg.target_angles = j["target_angles_rad"].get<std::vector<double>>();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::io, std::string("malformed config: ") + e.what());
    }
}

void save_scenario(const Scenario& scn, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::io, "cannot write " + path);
    out << to_json(scn).dump(2) << "\n";
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::io, "cannot read " + path);
    try {
        return scenario_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::io, std::string("parse error: ") + e.what());
    }
}

} // namespace iscap
