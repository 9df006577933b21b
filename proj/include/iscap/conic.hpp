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

#ifndef ISCAP_CONIC_HPP
#define ISCAP_CONIC_HPP

#include "iscap/types.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace iscap {

/// Affine real functional  constant + sum Re tr(C_v X_v) + sum c_s x_s.
struct AffineExpr {
    struct HermTerm {
        int var;
        MatC coeff;
    };

    double constant = 0.0;
    std::vector<HermTerm> herm;
    std::vector<std::pair<int, double>> scalar;

    AffineExpr() = default;
    explicit AffineExpr(double c) : constant(c) {}

    AffineExpr& add_herm(int var, MatC coeff)
    {
        herm.push_back({var, std::move(coeff)});
        return *this;
    }
    AffineExpr& add_scalar(int var, double coeff)
    {
        scalar.emplace_back(var, coeff);
        return *this;
    }
    AffineExpr& add_constant(double c)
    {
        constant += c;
        return *this;
    }
    AffineExpr& operator+=(const AffineExpr& o);
    AffineExpr& operator*=(double s);
};

enum class ScalarKind { free, nonneg };

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure, max_iter };

const char* to_string(SolveStatus s);

struct SolverSettings {
    double tol = 1e-7;
    int max_iter = 120;
    double step_fraction = 0.98;
    bool verbose = false;
};

struct Solution {
    SolveStatus status = SolveStatus::numerical_failure;
    std::vector<MatC> herm;      ///< one per Hermitian variable
    std::vector<double> scalar;  ///< one per scalar variable
    double objective_value = 0.0;
    /// Largest constraint violation, each constraint divided by its coefficient norm.
    double max_violation = 0.0;
    int iterations = 0;
    double rel_gap = 0.0;
    double primal_infeas = 0.0;
    double dual_infeas = 0.0;
};

/// Real conic program over Hermitian PSD matrices and real scalars:
///   minimize objective  s.t.  eq(x) = 0,  ineq(x) >= 0,  LMI(x) >= 0 (PSD).
/// Hermitian variables are handled through the real embedding internally.
class ConicProgram {
public:
    struct Var {
        std::string name;
        int dim; ///< 0 for scalars
        ScalarKind kind;
    };
    struct Lmi {
        int size;
        std::vector<AffineExpr> entries; ///< upper triangle, row-major: (0,0),(0,1),..,(1,1),..
        std::string tag;
    };
    struct Linear {
        AffineExpr expr;
        std::string tag;
    };

    int add_hermitian(const std::string& name, int n);
    int add_scalar(const std::string& name, ScalarKind kind = ScalarKind::free);

    void add_equality(AffineExpr e, const std::string& tag = "eq");
    void add_inequality(AffineExpr e, const std::string& tag = "ineq");
    /// entries must be size x size and symmetric in structure; only the upper triangle is read.
    void add_lmi(const std::vector<std::vector<AffineExpr>>& entries, const std::string& tag = "lmi");
    void set_objective(AffineExpr e) { objective_ = std::move(e); }

    const std::vector<Var>& vars() const { return vars_; }
    int herm_count() const { return static_cast<int>(herm_ids_.size()); }
    int scalar_count() const { return static_cast<int>(scalar_ids_.size()); }
    const std::vector<Linear>& equalities() const { return eqs_; }
    const std::vector<Linear>& inequalities() const { return ineqs_; }
    const std::vector<Lmi>& lmis() const { return lmis_; }
    const AffineExpr& objective() const { return objective_; }

    /// Variable index -> position among Hermitian (or scalar) variables.
    int herm_slot(int var) const;
    int scalar_slot(int var) const;

    double evaluate(const AffineExpr& e, const std::vector<MatC>& herm, const std::vector<double>& scalar) const;

    /// Largest normalized violation of all constraints and variable cones.
    double max_violation(const std::vector<MatC>& herm, const std::vector<double>& scalar) const;

    /// Text dump: variables, then every affine expression as triplet lists.
    void dump(std::ostream& os) const;

private:
    void check_expr(const AffineExpr& e) const;

    std::vector<Var> vars_;
    std::vector<int> herm_ids_, scalar_ids_;
    std::vector<int> slot_;
    std::vector<Linear> eqs_, ineqs_;
    std::vector<Lmi> lmis_;
    AffineExpr objective_;
};

/// [[Re H, -Im H], [Im H, Re H]]; throws on non-Hermitian input.
MatR embed_complex(const MatC& h);

/// Inverse of embed_complex, averaging the redundant blocks.
MatC extract_complex(const MatR& x);

Solution solve(const ConicProgram& p, const SolverSettings& settings = {});

} // namespace iscap

#endif
