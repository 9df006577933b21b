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

#include "iscap/types.hpp"

namespace iscap {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::dimension_mismatch: return "dimension mismatch";
    case ErrorKind::unidentifiable: return "unidentifiable parameters";
    case ErrorKind::saturation_unreachable: return "saturation unreachable";
    case ErrorKind::degenerate_recovery: return "degenerate recovery";
    case ErrorKind::infeasible: return "infeasible instance";
    case ErrorKind::randomization_failure: return "randomization failure";
    case ErrorKind::solver_failure: return "solver failure";
    case ErrorKind::io: return "i/o error";
    }
    return "error";
}

} // namespace iscap
