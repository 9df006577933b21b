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

#include "iscap/conic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <cstdio>
#include <ostream>

namespace iscap {

AffineExpr& AffineExpr::operator+=(const AffineExpr& o)
{
    constant += o.constant;
    herm.insert(herm.end(), o.herm.begin(), o.herm.end());
    scalar.insert(scalar.end(), o.scalar.begin(), o.scalar.end());
    return *this;
}

AffineExpr& AffineExpr::operator*=(double s)
{
    constant *= s;
    for (auto& t : herm)
        t.coeff *= s;
    for (auto& t : scalar)
        t.second *= s;
    return *this;
}

const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical_failure";
    case SolveStatus::max_iter: return "max_iter";
    }
    return "unknown";
}

MatR embed_complex(const MatC& h)
{
    if (h.rows() != h.cols())
        throw Error(ErrorKind::dimension_mismatch, "embed_complex needs a square matrix");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw Error(ErrorKind::invalid_argument, "embed_complex input is not Hermitian");
    const Eigen::Index n = h.rows();
    MatR out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = h.real();
    out.topRightCorner(n, n) = -h.imag();
    out.bottomLeftCorner(n, n) = h.imag();
    out.bottomRightCorner(n, n) = h.real();
    return out;
}

MatC extract_complex(const MatR& x)
{
    const Eigen::Index n = x.rows() / 2;
    MatR re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
    MatR im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
    MatC out(n, n);
    out.real() = 0.5 * (re + re.transpose());
    out.imag() = 0.5 * (im - im.transpose());
    return out;
}

// ---------------------------------------------------------------------------
// ConicProgram

int ConicProgram::add_hermitian(const std::string& name, int n)
{
    if (n < 1)
        throw Error(ErrorKind::invalid_argument, "Hermitian variable needs n >= 1");
    vars_.push_back({name, n, ScalarKind::free});
    slot_.push_back(static_cast<int>(herm_ids_.size()));
    herm_ids_.push_back(static_cast<int>(vars_.size()) - 1);
    return static_cast<int>(vars_.size()) - 1;
}

int ConicProgram::add_scalar(const std::string& name, ScalarKind kind)
{
    vars_.push_back({name, 0, kind});
    slot_.push_back(static_cast<int>(scalar_ids_.size()));
    scalar_ids_.push_back(static_cast<int>(vars_.size()) - 1);
    return static_cast<int>(vars_.size()) - 1;
}

int ConicProgram::herm_slot(int var) const
{
    if (var < 0 || var >= static_cast<int>(vars_.size()) || vars_[var].dim == 0)
        throw Error(ErrorKind::invalid_argument, "not a Hermitian variable");
    return slot_[var];
}

int ConicProgram::scalar_slot(int var) const
{
    if (var < 0 || var >= static_cast<int>(vars_.size()) || vars_[var].dim != 0)
        throw Error(ErrorKind::invalid_argument, "not a scalar variable");
    return slot_[var];
}

void ConicProgram::check_expr(const AffineExpr& e) const
{
    for (const auto& t : e.herm) {
        const int s = herm_slot(t.var);
        (void)s;
        if (t.coeff.rows() != vars_[t.var].dim || t.coeff.cols() != vars_[t.var].dim)
            throw Error(ErrorKind::dimension_mismatch, "coefficient size does not match " + vars_[t.var].name);
    }
    for (const auto& t : e.scalar)
        scalar_slot(t.first);
}

void ConicProgram::add_equality(AffineExpr e, const std::string& tag)
{
    check_expr(e);
    eqs_.push_back({std::move(e), tag});
}

void ConicProgram::add_inequality(AffineExpr e, const std::string& tag)
{
    check_expr(e);
    ineqs_.push_back({std::move(e), tag});
}

void ConicProgram::add_lmi(const std::vector<std::vector<AffineExpr>>& entries, const std::string& tag)
{
    const int n = static_cast<int>(entries.size());
    if (n == 0)
        throw Error(ErrorKind::invalid_argument, "empty LMI");
    Lmi lmi{n, {}, tag};
    for (int p = 0; p < n; ++p) {
        if (static_cast<int>(entries[p].size()) != n)
            throw Error(ErrorKind::dimension_mismatch, "LMI must be square");
        for (int q = p; q < n; ++q) {
            check_expr(entries[p][q]);
            lmi.entries.push_back(entries[p][q]);
        }
    }
    lmis_.push_back(std::move(lmi));
}

double ConicProgram::evaluate(const AffineExpr& e, const std::vector<MatC>& herm,
                              const std::vector<double>& scalar) const
{
    double v = e.constant;
    for (const auto& t : e.herm)
        v += (t.coeff.cwiseProduct(herm[slot_[t.var]].transpose())).sum().real();
    for (const auto& t : e.scalar)
        v += t.second * scalar[slot_[t.first]];
    return v;
}

namespace {

double coeff_norm(const AffineExpr& e)
{
    double s = 0.0;
    for (const auto& t : e.herm)
        s += t.coeff.squaredNorm();
    for (const auto& t : e.scalar)
        s += t.second * t.second;
    return std::sqrt(s);
}

} // namespace

double ConicProgram::max_violation(const std::vector<MatC>& herm, const std::vector<double>& scalar) const
{
    double worst = 0.0;
    for (const auto& c : eqs_) {
        const double nrm = coeff_norm(c.expr);
        if (nrm > 0)
            worst = std::max(worst, std::abs(evaluate(c.expr, herm, scalar)) / nrm);
    }
    for (const auto& c : ineqs_) {
        const double nrm = coeff_norm(c.expr);
        if (nrm > 0)
            worst = std::max(worst, std::max(0.0, -evaluate(c.expr, herm, scalar)) / nrm);
    }
    for (const auto& l : lmis_) {
        MatR m(l.size, l.size);
        double nrm = 0.0;
        int k = 0;
        for (int p = 0; p < l.size; ++p)
            for (int q = p; q < l.size; ++q, ++k) {
                m(p, q) = m(q, p) = evaluate(l.entries[k], herm, scalar);
                nrm = std::max(nrm, coeff_norm(l.entries[k]));
            }
        const double lmin = Eigen::SelfAdjointEigenSolver<MatR>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
        if (nrm > 0)
            worst = std::max(worst, std::max(0.0, -lmin) / nrm);
    }
    for (int s = 0; s < herm_count(); ++s) {
        const MatC& x = herm[s];
        const double tr = std::max(x.trace().real(), 1e-300);
        const double lmin = Eigen::SelfAdjointEigenSolver<MatC>(x, Eigen::EigenvaluesOnly).eigenvalues()(0);
        worst = std::max(worst, std::max(0.0, -lmin) / tr);
    }
    for (int s = 0; s < scalar_count(); ++s)
        if (vars_[scalar_ids_[s]].kind == ScalarKind::nonneg)
            worst = std::max(worst, std::max(0.0, -scalar[s]));
    return worst;
}

void ConicProgram::dump(std::ostream& os) const
{
    // Format: one header line per object, then "i j re im" (Hermitian) or
    // "s coeff" (scalar) triplet lines.
    os << std::setprecision(17);
    os << "vars " << vars_.size() << "\n";
    for (const auto& v : vars_) {
        if (v.dim > 0)
            os << "hermitian " << v.name << " " << v.dim << "\n";
        else
            os << "scalar " << v.name << " " << (v.kind == ScalarKind::nonneg ? "nonneg" : "free") << "\n";
    }
    auto expr = [&](const AffineExpr& e) {
        std::size_t nt = 0;
        for (const auto& t : e.herm)
            for (Eigen::Index i = 0; i < t.coeff.rows(); ++i)
                for (Eigen::Index j = 0; j < t.coeff.cols(); ++j)
                    nt += t.coeff(i, j) != cd(0.0);
        os << "  constant " << e.constant << " triplets " << nt << " scalars " << e.scalar.size() << "\n";
        for (const auto& t : e.herm)
            for (Eigen::Index i = 0; i < t.coeff.rows(); ++i)
                for (Eigen::Index j = 0; j < t.coeff.cols(); ++j)
                    if (t.coeff(i, j) != cd(0.0))
                        os << "  " << vars_[t.var].name << " " << i << " " << j << " " << t.coeff(i, j).real()
                           << " " << t.coeff(i, j).imag() << "\n";
        for (const auto& t : e.scalar)
            os << "  " << vars_[t.first].name << " " << t.second << "\n";
    };
    os << "objective\n";
    expr(objective_);
    for (const auto& c : eqs_) {
        os << "equality " << c.tag << "\n";
        expr(c.expr);
    }
    for (const auto& c : ineqs_) {
        os << "inequality " << c.tag << "\n";
        expr(c.expr);
    }
    for (const auto& l : lmis_) {
        os << "lmi " << l.tag << " " << l.size << "\n";
        int k = 0;
        for (int p = 0; p < l.size; ++p)
            for (int q = p; q < l.size; ++q, ++k) {
                os << " entry " << p << " " << q << "\n";
                expr(l.entries[k]);
            }
    }
}

// ---------------------------------------------------------------------------
// Standard form and interior-point method

namespace {

void symmetrize(MatR& m)
{
    m = (0.5 * (m + m.transpose())).eval();
}

struct Trip {
    int r, c;
    double v;
};

struct BlockCoef {
    int block;
    bool dense;
    MatR d;
    std::vector<Trip> t;
};

struct Row {
    std::vector<BlockCoef> blocks;
    std::vector<std::pair<int, double>> lp;
    double b = 0.0;
};

struct StdForm {
    std::vector<int> dims;
    int n_lp = 0;
    std::vector<Row> rows;
    std::vector<MatR> c;
    VecR c_lp;
    double c_scale = 1.0;
    // mapping back
    std::vector<int> herm_block;
    std::vector<std::pair<int, int>> scalar_lp; // (pos, neg or -1)
};

double inner(const BlockCoef& a, const MatR& x)
{
    if (a.dense)
        return (a.d.array() * x.array()).sum();
    double s = 0.0;
    for (const auto& t : a.t)
        s += t.v * x(t.r, t.c);
    return s;
}

void axpy(const BlockCoef& a, double y, MatR& out)
{
    if (a.dense)
        out.noalias() += y * a.d;
    else
        for (const auto& t : a.t)
            out(t.r, t.c) += y * t.v;
}

BlockCoef make_coef(int block, MatR m)
{
    BlockCoef bc{block, true, {}, {}};
    const Eigen::Index n = m.rows();
    Eigen::Index nnz = 0;
    for (Eigen::Index i = 0; i < m.size(); ++i)
        nnz += m.data()[i] != 0.0;
    if (nnz <= std::max<Eigen::Index>(4, n * n / 16)) {
        bc.dense = false;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                if (m(i, j) != 0.0)
                    bc.t.push_back({static_cast<int>(i), static_cast<int>(j), m(i, j)});
    } else {
        bc.d = std::move(m);
    }
    return bc;
}

class Builder {
public:
    explicit Builder(const ConicProgram& p) : p_(p)
    {
        for (const auto& v : p.vars()) {
            if (v.dim > 0) {
                sf_.herm_block.push_back(static_cast<int>(sf_.dims.size()));
                sf_.dims.push_back(2 * v.dim);
            } else if (v.kind == ScalarKind::nonneg) {
                sf_.scalar_lp.emplace_back(sf_.n_lp++, -1);
            } else {
                sf_.scalar_lp.emplace_back(sf_.n_lp, sf_.n_lp + 1);
                sf_.n_lp += 2;
            }
        }
    }

    StdForm build()
    {
        for (const auto& e : p_.equalities())
            add_row(e.expr, {}, {});
        for (const auto& e : p_.inequalities()) {
            const int s = sf_.n_lp++;
            add_row(e.expr, {}, {{s, -1.0}});
        }
        for (const auto& l : p_.lmis()) {
            const int blk = static_cast<int>(sf_.dims.size());
            sf_.dims.push_back(l.size);
            int k = 0;
            for (int pi = 0; pi < l.size; ++pi)
                for (int qi = pi; qi < l.size; ++qi, ++k) {
                    BlockCoef slack{blk, false, {}, {}};
                    if (pi == qi)
                        slack.t.push_back({pi, pi, -1.0});
                    else {
                        slack.t.push_back({pi, qi, -0.5});
                        slack.t.push_back({qi, pi, -0.5});
                    }
                    add_row(l.entries[k], std::move(slack), {});
                }
        }
        // objective
        sf_.c.resize(sf_.dims.size());
        for (std::size_t b = 0; b < sf_.dims.size(); ++b)
            sf_.c[b] = MatR::Zero(sf_.dims[b], sf_.dims[b]);
        sf_.c_lp = VecR::Zero(sf_.n_lp);
        for (const auto& t : p_.objective().herm)
            sf_.c[sf_.herm_block[p_.herm_slot(t.var)]] += 0.5 * embed_complex(hermitian_part(t.coeff));
        for (const auto& t : p_.objective().scalar) {
            const auto [pos, neg] = sf_.scalar_lp[p_.scalar_slot(t.first)];
            sf_.c_lp(pos) += t.second;
            if (neg >= 0)
                sf_.c_lp(neg) -= t.second;
        }
        double cn = sf_.c_lp.squaredNorm();
        for (const auto& c : sf_.c)
            cn += c.squaredNorm();
        cn = std::sqrt(cn);
        if (cn > 0) {
            sf_.c_scale = cn;
            for (auto& c : sf_.c)
                c /= cn;
            sf_.c_lp /= cn;
        }
        return std::move(sf_);
    }

    bool inconsistent = false;

private:
    void add_row(const AffineExpr& e, std::optional<BlockCoef> extra, std::vector<std::pair<int, double>> lp)
    {
        std::map<int, MatR> acc;
        for (const auto& t : e.herm) {
            const int blk = sf_.herm_block[p_.herm_slot(t.var)];
            MatR m = 0.5 * embed_complex(hermitian_part(t.coeff));
            auto it = acc.find(blk);
            if (it == acc.end())
                acc.emplace(blk, std::move(m));
            else
                it->second += m;
        }
        std::map<int, double> lpacc;
        for (const auto& [i, v] : lp)
            lpacc[i] += v;
        for (const auto& t : e.scalar) {
            const auto [pos, neg] = sf_.scalar_lp[p_.scalar_slot(t.first)];
            lpacc[pos] += t.second;
            if (neg >= 0)
                lpacc[neg] -= t.second;
        }
        Row row;
        double nrm2 = 0.0;
        for (auto& [blk, m] : acc) {
            const double s = m.squaredNorm();
            if (s == 0.0)
                continue;
            nrm2 += s;
            row.blocks.push_back(make_coef(blk, std::move(m)));
        }
        if (extra) {
            for (const auto& t : extra->t)
                nrm2 += t.v * t.v;
            row.blocks.push_back(std::move(*extra));
        }
        for (const auto& [i, v] : lpacc)
            if (v != 0.0) {
                row.lp.emplace_back(i, v);
                nrm2 += v * v;
            }
        row.b = -e.constant;
        if (nrm2 == 0.0) {
            if (std::abs(row.b) > 1e-12)
                inconsistent = true;
            return;
        }
        const double inv = 1.0 / std::sqrt(nrm2);
        for (auto& bc : row.blocks) {
            if (bc.dense)
                bc.d *= inv;
            else
                for (auto& t : bc.t)
                    t.v *= inv;
        }
        for (auto& [i, v] : row.lp)
            v *= inv;
        row.b *= inv;
        sf_.rows.push_back(std::move(row));
    }

    const ConicProgram& p_;
    StdForm sf_;
};

struct Point {
    std::vector<MatR> x, z;
    VecR xl, zl, y;
};

double min_eig_step(const Eigen::LLT<MatR>& chol, const MatR& dx)
{
    // Largest alpha with X + alpha dX >= 0.
    MatR w = chol.matrixL().solve(dx);
    w = chol.matrixL().solve(MatR(w.transpose())).transpose().eval();
    symmetrize(w);
    const double lmin = Eigen::SelfAdjointEigenSolver<MatR>(w, Eigen::EigenvaluesOnly).eigenvalues()(0);
    return lmin < 0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

class Ipm {
public:
    Ipm(const StdForm& sf, const SolverSettings& st) : sf_(sf), st_(st), m_(static_cast<int>(sf.rows.size()))
    {
        nb_ = static_cast<int>(sf.dims.size());
        b_ = VecR(m_);
        for (int i = 0; i < m_; ++i)
            b_(i) = sf.rows[i].b;
        alp_ = MatR::Zero(m_, sf.n_lp);
        for (int i = 0; i < m_; ++i)
            for (const auto& [k, v] : sf.rows[i].lp)
                alp_(i, k) = v;
        by_block_.resize(nb_);
        for (int i = 0; i < m_; ++i)
            for (std::size_t c = 0; c < sf.rows[i].blocks.size(); ++c)
                by_block_[sf.rows[i].blocks[c].block].push_back({i, static_cast<int>(c)});
        ntot_ = sf.n_lp;
        for (int d : sf.dims)
            ntot_ += d;

        // Gram matrix A A^T of the (normalised) constraint rows.
        MatR g = alp_ * alp_.transpose();
        for (int b = 0; b < nb_; ++b) {
            const auto& list = by_block_[b];
            for (std::size_t x = 0; x < list.size(); ++x)
                for (std::size_t y = x; y < list.size(); ++y) {
                    const auto& bi = sf.rows[list[x].first].blocks[list[x].second];
                    const auto& bj = sf.rows[list[y].first].blocks[list[y].second];
                    const double v = coef_dot(bi, bj, sf.dims[b]);
                    g(list[x].first, list[y].first) += v;
                    if (x != y)
                        g(list[y].first, list[x].first) += v;
                }
        }
        g.diagonal().array() += 1e-14;
        gram_.compute(g);
    }

    SolveStatus run(Point& pt, int& iters, double& gap, double& pinf, double& dinf)
    {
        init(pt);
        const double bnorm = b_.norm();
        double cnorm = sf_.c_lp.squaredNorm();
        for (const auto& c : sf_.c)
            cnorm += c.squaredNorm();
        cnorm = std::sqrt(cnorm);

        for (iters = 0; iters <= st_.max_iter; ++iters) {
            const VecR rp = b_ - a_op(pt.x, pt.xl);
            std::vector<MatR> rd;
            VecR rdl;
            dual_residual(pt, rd, rdl);
            double pobj = sf_.c_lp.dot(pt.xl), xz = pt.xl.dot(pt.zl);
            for (int b = 0; b < nb_; ++b) {
                pobj += (sf_.c[b].array() * pt.x[b].array()).sum();
                xz += (pt.x[b].array() * pt.z[b].array()).sum();
            }
            const double dobj = b_.dot(pt.y);
            double rdn = rdl.squaredNorm();
            for (const auto& r : rd)
                rdn += r.squaredNorm();
            rdn = std::sqrt(rdn);
            const double mu = xz / ntot_;
            gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
            pinf = rp.norm() / (1.0 + bnorm);
            dinf = rdn / (1.0 + cnorm);
            if (st_.verbose)
                std::fprintf(stderr, "ipm %3d pobj %+.6e dobj %+.6e gap %.2e pinf %.2e dinf %.2e mu %.2e\n", iters,
                             pobj, dobj, gap, pinf, dinf, mu);
            if (gap < st_.tol && pinf < st_.tol && dinf < st_.tol)
                return SolveStatus::optimal;
            if (primal_infeasible(pt.y, dobj))
                return SolveStatus::infeasible;
            if (dual_infeasible(pt, pobj))
                return SolveStatus::unbounded;
            if (iters == st_.max_iter)
                return SolveStatus::max_iter;

            // Factorizations.
            std::vector<Eigen::LLT<MatR>> cx(nb_), cz(nb_);
            std::vector<MatR> zinv(nb_);
            for (int b = 0; b < nb_; ++b) {
                cx[b].compute(pt.x[b]);
                cz[b].compute(pt.z[b]);
                if (cx[b].info() != Eigen::Success || cz[b].info() != Eigen::Success)
                    return SolveStatus::numerical_failure;
                zinv[b] = cz[b].solve(MatR::Identity(sf_.dims[b], sf_.dims[b]));
                symmetrize(zinv[b]);
            }
            if ((pt.xl.array() <= 0).any() || (pt.zl.array() <= 0).any())
                return SolveStatus::numerical_failure;

            MatR schur = schur_matrix(pt, zinv);
            Eigen::LDLT<MatR> ldlt;
            Eigen::LLT<MatR> llt(schur);
            bool use_llt = llt.info() == Eigen::Success;
            if (!use_llt) {
                const double reg = 1e-13 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
                schur.diagonal().array() += reg;
                ldlt.compute(schur);
                if (ldlt.info() != Eigen::Success)
                    return SolveStatus::numerical_failure;
            }
            auto solve_schur = [&](const VecR& r) -> VecR { return use_llt ? VecR(llt.solve(r)) : VecR(ldlt.solve(r)); };

            // Predictor.
            Dir pred = direction(pt, rp, rd, rdl, zinv, 0.0, mu, nullptr, schur, solve_schur);
            double ap = step_length(pt.x, pt.xl, pred.dx, pred.dxl, cx);
            double ad = step_length(pt.z, pt.zl, pred.dz, pred.dzl, cz);
            ap = std::min(1.0, ap);
            ad = std::min(1.0, ad);
            double xz_aff = (pt.xl + ap * pred.dxl).dot(pt.zl + ad * pred.dzl);
            for (int b = 0; b < nb_; ++b)
                xz_aff += ((pt.x[b] + ap * pred.dx[b]).array() * (pt.z[b] + ad * pred.dz[b]).array()).sum();
            const double mu_aff = xz_aff / ntot_;
            double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
            sigma = std::clamp(sigma, 0.0, 1.0);

            // Corrector.
            Dir cor = direction(pt, rp, rd, rdl, zinv, sigma, mu, &pred, schur, solve_schur);
            ap = step_length(pt.x, pt.xl, cor.dx, cor.dxl, cx);
            ad = step_length(pt.z, pt.zl, cor.dz, cor.dzl, cz);
            const double tau = st_.step_fraction;
            ap = std::min(1.0, tau * ap);
            ad = std::min(1.0, tau * ad);
            if (st_.verbose)
                std::fprintf(stderr, "    sigma %.2e ap %.3e ad %.3e\n", sigma, ap, ad);
            for (int b = 0; b < nb_; ++b) {
                pt.x[b] += ap * cor.dx[b];
                pt.z[b] += ad * cor.dz[b];
                symmetrize(pt.x[b]);
                symmetrize(pt.z[b]);
            }
            pt.xl += ap * cor.dxl;
            pt.zl += ad * cor.dzl;
            pt.y += ad * cor.dy;
        }
        return SolveStatus::max_iter;
    }

private:
    struct Dir {
        std::vector<MatR> dx, dz;
        VecR dxl, dzl, dy;
    };

    void init(Point& pt)
    {
        double xi = 10.0, eta = 10.0;
        for (int b = 0; b < nb_; ++b) {
            xi = std::max(xi, std::sqrt(static_cast<double>(sf_.dims[b])));
            eta = std::max(eta, std::sqrt(static_cast<double>(sf_.dims[b])));
        }
        for (int i = 0; i < m_; ++i)
            xi = std::max(xi, std::sqrt(static_cast<double>(ntot_)) * (1.0 + std::abs(b_(i))) / 2.0);
        pt.x.resize(nb_);
        pt.z.resize(nb_);
        for (int b = 0; b < nb_; ++b) {
            pt.x[b] = xi * MatR::Identity(sf_.dims[b], sf_.dims[b]);
            pt.z[b] = eta * MatR::Identity(sf_.dims[b], sf_.dims[b]);
        }
        pt.xl = VecR::Constant(sf_.n_lp, xi);
        pt.zl = VecR::Constant(sf_.n_lp, eta);
        pt.y = VecR::Zero(m_);
    }

    VecR a_op(const std::vector<MatR>& x, const VecR& xl) const
    {
        VecR out = alp_ * xl;
        for (int i = 0; i < m_; ++i)
            for (const auto& bc : sf_.rows[i].blocks)
                out(i) += inner(bc, x[bc.block]);
        return out;
    }

    void at_op(const VecR& y, std::vector<MatR>& out, VecR& outl) const
    {
        out.resize(nb_);
        for (int b = 0; b < nb_; ++b)
            out[b] = MatR::Zero(sf_.dims[b], sf_.dims[b]);
        for (int i = 0; i < m_; ++i)
            for (const auto& bc : sf_.rows[i].blocks)
                axpy(bc, y(i), out[bc.block]);
        outl = alp_.transpose() * y;
    }

    void dual_residual(const Point& pt, std::vector<MatR>& rd, VecR& rdl) const
    {
        at_op(pt.y, rd, rdl);
        for (int b = 0; b < nb_; ++b)
            rd[b] = sf_.c[b] - rd[b] - pt.z[b];
        rdl = sf_.c_lp - rdl - pt.zl;
    }

    MatR schur_matrix(const Point& pt, const std::vector<MatR>& zinv) const
    {
        MatR s = alp_ * (pt.xl.array() / pt.zl.array()).matrix().asDiagonal() * alp_.transpose();
        for (int b = 0; b < nb_; ++b) {
            const auto& list = by_block_[b];
            const MatR& x = pt.x[b];
            const MatR& zi = zinv[b];
            std::vector<MatR> g(list.size());
            for (std::size_t a = 0; a < list.size(); ++a) {
                const auto& bc = sf_.rows[list[a].first].blocks[list[a].second];
                if (bc.dense)
                    g[a] = x * bc.d * zi;
            }
            for (std::size_t a = 0; a < list.size(); ++a) {
                const int i = list[a].first;
                const auto& bi = sf_.rows[i].blocks[list[a].second];
                for (std::size_t c = a; c < list.size(); ++c) {
                    const int j = list[c].first;
                    const auto& bj = sf_.rows[j].blocks[list[c].second];
                    double v = 0.0;
                    if (bj.dense)
                        v = inner_g(bi, g[c]);
                    else if (bi.dense)
                        v = inner_g(bj, g[a]);
                    else
                        for (const auto& p : bi.t)
                            for (const auto& q : bj.t)
                                v += p.v * q.v * x(p.c, q.r) * zi(q.c, p.r);
                    s(i, j) += v;
                    if (i != j)
                        s(j, i) += v;
                }
            }
        }
        return s;
    }

    // tr(A G) for symmetric A.
    static double inner_g(const BlockCoef& a, const MatR& g)
    {
        if (a.dense)
            return (a.d.array() * g.array()).sum();
        double s = 0.0;
        for (const auto& t : a.t)
            s += t.v * g(t.c, t.r);
        return s;
    }

    template <class Solver>
    Dir direction(const Point& pt, const VecR& rp, const std::vector<MatR>& rd, const VecR& rdl, const std::vector<MatR>& zinv,
                  double sigma, double mu, const Dir* pred, const MatR& schur, Solver&& solve_schur) const
    {
        // T = (X Rd + dXa dZa) Z^-1 - sigma mu Z^-1;  M dy = b + A(T).
        std::vector<MatR> t(nb_);
        for (int b = 0; b < nb_; ++b) {
            MatR inner_m = pt.x[b] * rd[b];
            if (pred)
                inner_m += pred->dx[b] * pred->dz[b];
            t[b] = inner_m * zinv[b] - sigma * mu * zinv[b];
            symmetrize(t[b]);
        }
        VecR tl = (pt.xl.array() * rdl.array() - sigma * mu) / pt.zl.array();
        if (pred)
            tl.array() += pred->dxl.array() * pred->dzl.array() / pt.zl.array();
        const VecR rhs = b_ + a_op(t, tl);
        Dir d;
        d.dy = solve_schur(rhs);
        d.dy += solve_schur(rhs - schur * d.dy);
        std::vector<MatR> aty;
        VecR atyl;
        at_op(d.dy, aty, atyl);
        d.dz.resize(nb_);
        d.dx.resize(nb_);
        for (int b = 0; b < nb_; ++b) {
            d.dz[b] = rd[b] - aty[b];
            MatR q = pt.x[b] * d.dz[b];
            if (pred)
                q += pred->dx[b] * pred->dz[b];
            q = q * zinv[b];
            d.dx[b] = sigma * mu * zinv[b] - pt.x[b] - 0.5 * (q + q.transpose());
        }
        d.dzl = rdl - atyl;
        VecR ql = pt.xl.array() * d.dzl.array();
        if (pred)
            ql.array() += pred->dxl.array() * pred->dzl.array();
        d.dxl = (sigma * mu - ql.array()) / pt.zl.array() - pt.xl.array();

        // The Z^-1 products lose digits late in the run; project the primal
        // direction back onto A(dX) = rp so infeasibility keeps shrinking.
        const VecR err = rp - a_op(d.dx, d.dxl);
        if (st_.verbose)
            std::fprintf(stderr, "    direction residual %.3e\n", err.norm());
        if (err.norm() > 1e-14 * (1.0 + rp.norm())) {
            std::vector<MatR> corr;
            VecR corrl;
            at_op(gram_.solve(err), corr, corrl);
            for (int b = 0; b < nb_; ++b)
                d.dx[b] += corr[b];
            d.dxl += corrl;
        }
        return d;
    }

    double step_length(const std::vector<MatR>& /*x*/, const VecR& xl, const std::vector<MatR>& dx, const VecR& dxl,
                       const std::vector<Eigen::LLT<MatR>>& chol) const
    {
        double a = std::numeric_limits<double>::infinity();
        for (int b = 0; b < nb_; ++b)
            a = std::min(a, min_eig_step(chol[b], dx[b]));
        for (Eigen::Index k = 0; k < xl.size(); ++k)
            if (dxl(k) < 0)
                a = std::min(a, -xl(k) / dxl(k));
        return a;
    }

    bool primal_infeasible(const VecR& y, double dobj) const
    {
        // Farkas: A^T y <= 0 with b^T y > 0 certifies that A(X) = b has no X >= 0.
        if (!(dobj > 1e6))
            return false;
        std::vector<MatR> aty;
        VecR atyl;
        at_op(y, aty, atyl);
        double lmax = atyl.size() ? atyl.maxCoeff() : -std::numeric_limits<double>::infinity();
        for (int b = 0; b < nb_; ++b)
            lmax = std::max(lmax, Eigen::SelfAdjointEigenSolver<MatR>(aty[b], Eigen::EigenvaluesOnly).eigenvalues()(
                                      sf_.dims[b] - 1));
        return lmax / dobj < 1e-6;
    }

    bool dual_infeasible(const Point& pt, double pobj) const
    {
        if (!(pobj < -1e6))
            return false;
        const VecR ax = a_op(pt.x, pt.xl);
        return ax.norm() / -pobj < 1e-6 + b_.norm() / -pobj;
    }

    static double coef_dot(const BlockCoef& a, const BlockCoef& b, int dim)
    {
        if (a.dense && b.dense)
            return (a.d.array() * b.d.array()).sum();
        if (a.dense || b.dense) {
            const BlockCoef& s = a.dense ? b : a;
            const MatR& d = a.dense ? a.d : b.d;
            return inner(s, d);
        }
        MatR tmp = MatR::Zero(dim, dim);
        axpy(a, 1.0, tmp);
        return inner(b, tmp);
    }

    const StdForm& sf_;
    const SolverSettings& st_;
    Eigen::LDLT<MatR> gram_;
    int m_;
    int nb_ = 0;
    int ntot_ = 0;
    VecR b_;
    MatR alp_;
    std::vector<std::vector<std::pair<int, int>>> by_block_;
};

} // namespace

Solution solve(const ConicProgram& p, const SolverSettings& settings)
{
    Builder builder(p);
    const StdForm sf = builder.build();
    Solution sol;
    if (builder.inconsistent) {
        sol.status = SolveStatus::infeasible;
        return sol;
    }

    Point pt;
    Ipm ipm(sf, settings);
    sol.status = ipm.run(pt, sol.iterations, sol.rel_gap, sol.primal_infeas, sol.dual_infeas);

    sol.herm.resize(p.herm_count());
    for (int s = 0; s < p.herm_count(); ++s)
        sol.herm[s] = pt.x.empty() ? MatC() : extract_complex(pt.x[sf.herm_block[s]]);
    sol.scalar.assign(p.scalar_count(), 0.0);
    for (int s = 0; s < p.scalar_count(); ++s) {
        if (pt.xl.size() == 0)
            break;
        const auto [pos, neg] = sf.scalar_lp[s];
        sol.scalar[s] = pt.xl(pos) - (neg >= 0 ? pt.xl(neg) : 0.0);
    }
    if (!pt.x.empty() || pt.xl.size() > 0) {
        sol.objective_value = p.evaluate(p.objective(), sol.herm, sol.scalar);
        sol.max_violation = p.max_violation(sol.herm, sol.scalar);
    }
    return sol;
}

} // namespace iscap
