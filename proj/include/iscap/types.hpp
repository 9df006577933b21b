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

#ifndef ISCAP_TYPES_HPP
#define ISCAP_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace iscap {

using cd = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;
using MatR = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Activity threshold (watts) separating "on" from solver roundoff.
inline constexpr double kActivationTol = 1e-9;

enum class ErrorKind {
    invalid_argument,
    dimension_mismatch,
    unidentifiable,
    saturation_unreachable,
    degenerate_recovery,
    infeasible,
    randomization_failure,
    solver_failure,
    io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// Hermitian part (A + A^H) / 2.
inline MatC hermitian_part(const MatC& a) { return 0.5 * (a + a.adjoint()); }

} // namespace iscap

#endif
