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

#ifndef ISCAP_RNG_HPP
#define ISCAP_RNG_HPP

#include "iscap/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace iscap {

/// Portable random source: std::mt19937_64 (fully specified by the standard)
/// with hand-rolled uniform and Box-Muller transforms, so draws are identical
/// on every platform. std::normal_distribution is implementation-defined and
/// therefore avoided.
class Rng {
public:
    static constexpr const char* algorithm = "mt19937_64/box-muller";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    /// Circularly symmetric CN(0, 1).
    cd complex_normal()
    {
        const double re = normal();
        const double im = normal();
        return {re * std::sqrt(0.5), im * std::sqrt(0.5)};
    }

    VecC complex_normal(Eigen::Index n)
    {
        VecC v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v(i) = complex_normal();
        return v;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer; derives independent stream seeds from (seed, tag).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace iscap

#endif
