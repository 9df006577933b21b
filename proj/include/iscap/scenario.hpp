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

#ifndef ISCAP_SCENARIO_HPP
#define ISCAP_SCENARIO_HPP

#include "iscap/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace iscap {

/// System dimensions. Counts of receivers/targets may individually be zero.
struct Dimensions {
    int n_tx = 8;  ///< transmit antennas
    int n_rx = 8;  ///< sensing-receiver antennas
    int n_rf = 4;  ///< RF chains
    int k_ir = 2;  ///< information receivers
    int k_er = 1;  ///< energy receivers
    int k_s = 1;   ///< sensing targets
    int dwell = 10; ///< radar dwell, symbols

    /// Throws Error(invalid_argument) unless K_IR <= N_RF <= N_T <= N_R etc.
    void validate() const;

    bool operator==(const Dimensions&) const = default;
};

struct Thresholds {
    std::vector<double> sinr_min;  ///< per-IR SINR floor, linear
    double crb_max = 0.1;          ///< bound on tr(CRB)
    std::vector<double> eh_dc_min; ///< per-ER harvested DC floor, watts
};

struct HardwareConstants {
    double p_ant_max = 1.5;       ///< per-antenna output limit, W
    double eta_max = 0.38;        ///< PA efficiency at saturation
    double beta_pa = 0.5;         ///< PA efficiency exponent; 0 = fixed efficiency
    double p_rf = 0.5;            ///< one RF chain, W
    double p_ps = 0.042;          ///< one phase shifter, W
    double p_sw = 1e-3;           ///< one switch, W
    double p_static = 10.0;       ///< everything else, W
    double eps_indicator = 1e-4;  ///< indicator-relaxation smoothing

    void validate() const;
};

/// Logistic energy-harvesting parameters (saturation M in W, slope a in 1/W, offset b in W).
struct EhParams {
    double m = 0.02;
    double a = 6400.0;
    double b = 0.003;
};

struct Scenario {
    Dimensions dims;
    std::vector<VecC> h;              ///< IR channels, length N_T each
    std::vector<VecC> d;              ///< ER channels, length N_T each
    std::vector<double> theta;        ///< target directions, rad
    std::vector<cd> beta_coeff;       ///< target reflection coefficients
    std::vector<double> noise_ir;     ///< per-IR noise power, W
    double noise_sense = 0.0;         ///< sensing-receiver noise power, W
    Thresholds thresholds;
    HardwareConstants hw;
    std::vector<EhParams> eh;         ///< per ER
    std::uint64_t seed = 0;
    std::string rng_algorithm;

    void validate() const;
};

/// Distances (m) from the transmitter per receiver class.
struct Geometry {
    double ir_m = 50.0;
    double target_m = 50.0;
    double er_m = 10.0;
};

/// Everything needed to draw a Scenario. Threshold and noise fields are in
/// dB/dBm; generate_scenario converts them to linear SI once.
struct ScenarioConfig {
    Dimensions dims;
    Geometry geometry;
    double rician_k_db = 3.0;
    double noise_ir_dbm = -103.0;
    double noise_sense_dbm = -103.0;
    double sinr_db = 6.0;
    double crb_max = 0.1;
    double eh_dc_dbm = -2.0;
    HardwareConstants hw;
    EhParams eh;
    /// Explicit target directions (rad); drawn uniformly in +-max_target_angle otherwise.
    std::optional<std::vector<double>> target_angles;
    double max_target_angle = kPi / 3.0;
};

/// 51.2 + 41.2 log10(r) dB.
double path_loss_db(double distance_m);

/// Amplitude factor 10^(-PL/20).
double path_loss_amplitude(double distance_m);

Scenario generate_scenario(std::uint64_t seed, const ScenarioConfig& config);

/// Full-scale default constants with the requested dimensions/geometry/K-factor.
Scenario generate_scenario(std::uint64_t seed, const Dimensions& dims, const Geometry& geometry,
                           double rician_k_db);

/// Full-scale configuration (32/32/16 antennas/chains, 6 IRs, 5 ERs, 5 targets).
ScenarioConfig full_scale_config();
Scenario full_scale_scenario(std::uint64_t seed);

/// Desk-scale configuration used by the CLI and the test suites.
ScenarioConfig desk_config();

/// Copy of scn with every threshold replaced (channels untouched).
Scenario with_thresholds(const Scenario& scn, double sinr_linear, double crb_max, double eh_dc_watt);

nlohmann::json to_json(const Scenario& scn);
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScenarioConfig& cfg);
/// Missing keys keep the desk_config() default.
ScenarioConfig config_from_json(const nlohmann::json& j);

void save_scenario(const Scenario& scn, const std::string& path);
Scenario load_scenario(const std::string& path);

} // namespace iscap

#endif
