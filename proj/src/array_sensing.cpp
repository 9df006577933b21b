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

#include "iscap/array_sensing.hpp"

#include "iscap/scenario.hpp"

#include <cmath>

namespace iscap {

VecC steering(double theta, int n)
{
    if (n < 1)
        throw Error(ErrorKind::invalid_argument, "steering needs n >= 1");
    VecC v(n);
    const double s = kPi * std::sin(theta);
    for (int m = 0; m < n; ++m)
        v(m) = std::polar(1.0, (m - 0.5 * (n - 1)) * s);
    return v;
}

VecC steering_derivative(double theta, int n)
{
    VecC v = steering(theta, n);
    const double c = kPi * std::cos(theta);
    for (int m = 0; m < n; ++m)
        v(m) *= cd(0.0, (m - 0.5 * (n - 1)) * c);
    return v;
}

SteeringSet make_steering_set(const std::vector<double>& theta, const std::vector<cd>& beta, int n_tx, int n_rx)
{
    if (theta.size() != beta.size())
        throw Error(ErrorKind::dimension_mismatch, "theta and beta lengths differ");
    const int k = static_cast<int>(theta.size());
    SteeringSet ss;
    ss.A.resize(n_rx, k);
    ss.A_dot.resize(n_rx, k);
    ss.V.resize(n_tx, k);
    ss.V_dot.resize(n_tx, k);
    ss.b.resize(k);
    for (int i = 0; i < k; ++i) {
        ss.A.col(i) = steering(theta[i], n_rx);
        ss.A_dot.col(i) = steering_derivative(theta[i], n_rx);
        ss.V.col(i) = steering(theta[i], n_tx);
        ss.V_dot.col(i) = steering_derivative(theta[i], n_tx);
        ss.b(i) = beta[i];
    }
    return ss;
}

SteeringSet make_steering_set(const Scenario& scn)
{
    return make_steering_set(scn.theta, scn.beta_coeff, scn.dims.n_tx, scn.dims.n_rx);
}

MatR build_fim(const SteeringSet& ss, const MatC& rx, int dwell, double sigma_s2)
{
    const int k = ss.targets();
    if (rx.rows() != ss.V.rows() || rx.cols() != ss.V.rows())
        throw Error(ErrorKind::dimension_mismatch, "Rx size does not match the transmit array");
    if (dwell < 1 || !(sigma_s2 > 0.0))
        throw Error(ErrorKind::invalid_argument, "need L >= 1 and sigma^2 > 0");

    const MatC rc = rx.conjugate();
    const MatC& a = ss.A;
    const MatC& ad = ss.A_dot;
    const MatC& v = ss.V;
    const MatC& vd = ss.V_dot;
    const auto bc = ss.b.conjugate().asDiagonal();
    const auto b = ss.b.asDiagonal();
    const double l = dwell;

    const MatC aa = a.adjoint() * a;
    const MatC ada = ad.adjoint() * a;
    const MatC aad = a.adjoint() * ad;
    const MatC adad = ad.adjoint() * ad;
    const MatC vrv = v.adjoint() * rc * v;
    const MatC vrvd = v.adjoint() * rc * vd;
    const MatC vdrv = vd.adjoint() * rc * v;
    const MatC vdrvd = vd.adjoint() * rc * vd;

    const MatC m11 = l * (adad.cwiseProduct(bc * vrv * b) + ada.cwiseProduct(bc * vrvd * b) +
                          aad.cwiseProduct(bc * vdrv * b) + aa.cwiseProduct(bc * vdrvd * b));
    const MatC m12 = l * (ada.cwiseProduct(bc * vrv) + aa.cwiseProduct(bc * vdrv));
    const MatC m22 = l * aa.cwiseProduct(vrv);

    MatR m(3 * k, 3 * k);
    m.block(0, 0, k, k) = m11.real();
    m.block(0, k, k, k) = m12.real();
    m.block(0, 2 * k, k, k) = -m12.imag();
    m.block(k, 0, k, k) = m12.real().transpose();
    m.block(k, k, k, k) = m22.real();
    m.block(k, 2 * k, k, k) = -m22.imag();
    m.block(2 * k, 0, k, k) = -m12.imag().transpose();
    m.block(2 * k, k, k, k) = -m22.imag().transpose();
    m.block(2 * k, 2 * k, k, k) = m22.real();
    m *= 2.0 / sigma_s2;
    return 0.5 * (m + m.transpose());
}

// ---------------------------------------------------------------------------

namespace {

struct Term {
    cd c;
    VecC u, w; // contributes c * u^H Rx^c w
};

// P with tr(P Rx) = conj(sum c u^H Rx^c w).
MatC pullback(const std::vector<Term>& terms, Eigen::Index n)
{
    MatC p = MatC::Zero(n, n);
    for (const auto& t : terms)
        p += std::conj(t.c) * t.w.conjugate() * t.u.transpose();
    return p;
}

} // namespace

FimMap::FimMap(const SteeringSet& ss, int dwell, double sigma_s2)
{
    if (dwell < 1 || !(sigma_s2 > 0.0))
        throw Error(ErrorKind::invalid_argument, "need L >= 1 and sigma^2 > 0");
    const int k = ss.targets();
    n_ = 3 * k;
    const Eigen::Index nt = ss.V.rows();
    const double l = dwell;
    const double scale = 2.0 / sigma_s2;

    auto dotc = [](const MatC& x, int i, const MatC& y, int j) { return x.col(i).dot(y.col(j)); };
    auto m11 = [&](int i, int j) {
        const cd bb = std::conj(ss.b(i)) * ss.b(j) * l;
        return std::vector<Term>{{bb * dotc(ss.A_dot, i, ss.A_dot, j), ss.V.col(i), ss.V.col(j)},
                                 {bb * dotc(ss.A_dot, i, ss.A, j), ss.V.col(i), ss.V_dot.col(j)},
                                 {bb * dotc(ss.A, i, ss.A_dot, j), ss.V_dot.col(i), ss.V.col(j)},
                                 {bb * dotc(ss.A, i, ss.A, j), ss.V_dot.col(i), ss.V_dot.col(j)}};
    };
    auto m12 = [&](int i, int j) {
        const cd bb = std::conj(ss.b(i)) * l;
        return std::vector<Term>{{bb * dotc(ss.A_dot, i, ss.A, j), ss.V.col(i), ss.V.col(j)},
                                 {bb * dotc(ss.A, i, ss.A, j), ss.V_dot.col(i), ss.V.col(j)}};
    };
    auto m22 = [&](int i, int j) {
        return std::vector<Term>{{l * dotc(ss.A, i, ss.A, j), ss.V.col(i), ss.V.col(j)}};
    };
    // Re(z) = Re tr(P Rx); -Im(z) = Re tr(-j P Rx) for z = conj(tr(P Rx)).
    auto re = [&](const std::vector<Term>& t) { return MatC(scale * hermitian_part(pullback(t, nt))); };
    auto neg_im = [&](const std::vector<Term>& t) {
        return MatC(scale * hermitian_part(cd(0.0, -1.0) * pullback(t, nt)));
    };

    q_.resize(static_cast<std::size_t>(n_) * (n_ + 1) / 2);
    for (int a = 0; a < n_; ++a)
        for (int b = a; b < n_; ++b) {
            const int ba = a / k, bb = b / k, i = a % k, j = b % k;
            MatC q;
            if (ba == 0 && bb == 0)
                q = re(m11(i, j));
            else if (ba == 0 && bb == 1)
                q = re(m12(i, j));
            else if (ba == 0 && bb == 2)
                q = neg_im(m12(i, j));
            else if (ba == 1 && bb == 1)
                q = re(m22(i, j));
            else if (ba == 1 && bb == 2)
                q = neg_im(m22(i, j));
            else
                q = re(m22(i, j));
            q_[index(a, b)] = std::move(q);
        }
}

int FimMap::index(int a, int b) const
{
    if (a > b)
        std::swap(a, b);
    return a * n_ - a * (a - 1) / 2 + (b - a);
}

MatR FimMap::apply(const MatC& rx) const
{
    MatR m(n_, n_);
    for (int a = 0; a < n_; ++a)
        for (int b = a; b < n_; ++b)
            m(a, b) = m(b, a) = (at(a, b).cwiseProduct(rx.transpose())).sum().real();
    return m;
}

FimMap FimMap::transformed(const std::function<MatC(const MatC&)>& t) const
{
    FimMap out;
    out.n_ = n_;
    out.q_.reserve(q_.size());
    for (const auto& q : q_)
        out.q_.push_back(hermitian_part(t(q)));
    return out;
}

double crb_trace(const MatR& m)
{
    if (m.rows() != m.cols())
        throw Error(ErrorKind::dimension_mismatch, "FIM must be square");
    if (m.rows() == 0)
        return 0.0;
    // The angle and reflection-coefficient entries differ by |b|^2 (often
    // 1e-12 or less), so the eigenvalue test runs on the unit-diagonal form.
    const MatR sym = 0.5 * (m + m.transpose());
    const VecR diag = sym.diagonal();
    if (!(diag.minCoeff() > 0.0))
        throw Error(ErrorKind::unidentifiable, "FIM has a zero diagonal entry");
    const VecR d = diag.cwiseSqrt().cwiseInverse();
    const MatR unit = d.asDiagonal() * sym * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<MatR> es(unit);
    const VecR& ev = es.eigenvalues();
    if (ev(0) < 1e-10 * ev(ev.size() - 1))
        throw Error(ErrorKind::unidentifiable, "FIM is singular (min/max eigenvalue below 1e-10)");
    const MatR inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return (d.array().square() * inv.diagonal().array()).sum();
}

VecR fim_scaling(const MatR& m)
{
    VecR d = VecR::Ones(m.rows());
    for (Eigen::Index a = 0; a < m.rows(); ++a)
        if (m(a, a) > 1e-300)
            d(a) = 1.0 / std::sqrt(m(a, a));
    return d;
}

std::vector<int> schur_crb_blocks(ConicProgram& p, const std::function<AffineExpr(int, int)>& entry, int size,
                                  double crb_max, const VecR& d)
{
    if (!(crb_max > 0.0))
        throw Error(ErrorKind::invalid_argument, "crb_max must be positive");
    if (d.size() != size)
        throw Error(ErrorKind::dimension_mismatch, "scaling vector length != FIM size");
    std::vector<std::vector<AffineExpr>> scaled(size, std::vector<AffineExpr>(size));
    for (int a = 0; a < size; ++a)
        for (int b = a; b < size; ++b) {
            AffineExpr e = entry(a, b);
            e *= d(a) * d(b);
            scaled[a][b] = e;
            scaled[b][a] = std::move(e);
        }
    std::vector<int> t(size);
    AffineExpr budget(crb_max);
    for (int i = 0; i < size; ++i) {
        t[i] = p.add_scalar("t" + std::to_string(i), ScalarKind::nonneg);
        std::vector<std::vector<AffineExpr>> blk(size + 1, std::vector<AffineExpr>(size + 1));
        for (int a = 0; a < size; ++a) {
            for (int b = 0; b < size; ++b)
                blk[a][b] = scaled[a][b];
            blk[a][size] = blk[size][a] = AffineExpr(a == i ? 1.0 : 0.0);
        }
        blk[size][size] = AffineExpr().add_scalar(t[i], 1.0);
        p.add_lmi(blk, "crb" + std::to_string(i));
        budget.add_scalar(t[i], -d(i) * d(i));
    }
    p.add_inequality(budget, "crb_budget");
    return t;
}

} // namespace iscap
