#pragma once

// Dense reference solvers used only by tests.
//
// solve_ipm: Mehrotra predictor-corrector interior point method for
//     minimize (1/2) x'Px + q'x  s.t.  E x = b,  G x <= h
//
// solve_split: the soiling decomposition written directly from the component
// definitions, with every absolute value and quantile term split into
// nonnegative parts and all four components kept as separate variables.
// It shares no assembly code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "soiling/qp/standard_qp.hpp"
#include "soiling/sd_model.hpp"
#include "soiling/signal_prep.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DenseQP {
    MatrixXd P;
    VectorXd q;
    MatrixXd E;
    VectorXd b;
    MatrixXd G;
    VectorXd h;
};

struct IpmResult {
    VectorXd x, z, nu;
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
};

inline double max_step(const VectorXd& v, const VectorXd& dv) {
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
    return a;
}

inline IpmResult solve_ipm(const DenseQP& qp, double tol = 1e-10, int max_iter = 200) {
    const Eigen::Index n = qp.q.size(), p = qp.b.size(), m = qp.h.size();
    std::vector<std::vector<Eigen::Index>> nz(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (qp.G(i, j) != 0.0) nz[static_cast<std::size_t>(i)].push_back(j);

    VectorXd x = VectorXd::Zero(n), nu = VectorXd::Zero(p);
    VectorXd s = (qp.h - qp.G * x).cwiseMax(1.0), z = VectorXd::Ones(m);
    IpmResult out;
    const double scale_d = 1.0 + qp.q.lpNorm<Eigen::Infinity>();
    const double scale_p = 1.0 + std::max(m ? qp.h.lpNorm<Eigen::Infinity>() : 0.0, p ? qp.b.lpNorm<Eigen::Infinity>() : 0.0);

    for (int it = 0; it < max_iter; ++it) {
        const VectorXd rd = qp.P * x + qp.q + qp.G.transpose() * z + qp.E.transpose() * nu;
        const VectorXd rp = qp.G * x + s - qp.h;
        const VectorXd re = qp.E * x - qp.b;
        const double mu = m ? s.dot(z) / static_cast<double>(m) : 0.0;
        out.iterations = it;
        if (rd.lpNorm<Eigen::Infinity>() <= tol * scale_d && (m == 0 || rp.lpNorm<Eigen::Infinity>() <= tol * scale_p) &&
            (p == 0 || re.lpNorm<Eigen::Infinity>() <= tol * scale_p) && mu <= tol) {
            out.converged = true;
            break;
        }

        const VectorXd w = z.cwiseQuotient(s);
        MatrixXd K = MatrixXd::Zero(n + p, n + p);
        K.topLeftCorner(n, n) = qp.P;
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto& idx = nz[static_cast<std::size_t>(i)];
            for (auto a : idx)
                for (auto c : idx) K(a, c) += w[i] * qp.G(i, a) * qp.G(i, c);
        }
        K.topRightCorner(n, p) = qp.E.transpose();
        K.bottomLeftCorner(p, n) = qp.E;
        K.bottomRightCorner(p, p).diagonal().setConstant(-1e-13);
        K.topLeftCorner(n, n).diagonal().array() += 1e-13;
        const Eigen::PartialPivLU<MatrixXd> lu(K);

        auto newton = [&](const VectorXd& rc, VectorXd& dx, VectorXd& ds, VectorXd& dz, VectorXd& dnu) {
            VectorXd rhs(n + p);
            rhs.head(n) = -rd - qp.G.transpose() * (w.cwiseProduct(rp) - rc.cwiseQuotient(s));
            rhs.tail(p) = -re;
            VectorXd sol = lu.solve(rhs);
            // Refinement keeps the step accurate once the barrier weights span many decades.
            for (int r = 0; r < 3; ++r) sol += lu.solve(rhs - K * sol);
            dx = sol.head(n);
            dnu = sol.tail(p);
            dz = w.cwiseProduct(qp.G * dx + rp) - rc.cwiseQuotient(s);
            ds = (-rc - s.cwiseProduct(dz)).cwiseQuotient(z);
        };

        VectorXd dx, ds, dz, dnu;
        newton(s.cwiseProduct(z), dx, ds, dz, dnu);
        const double a_aff = std::min(max_step(s, ds), max_step(z, dz));
        const double mu_aff = m ? (s + a_aff * ds).dot(z + a_aff * dz) / static_cast<double>(m) : 0.0;
        const double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3) : 0.0;
        const VectorXd rc = s.cwiseProduct(z) + ds.cwiseProduct(dz) - VectorXd::Constant(m, sigma * mu);
        newton(rc, dx, ds, dz, dnu);
        const double a = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(z, dz)));
        x += a * dx;
        s += a * ds;
        z += a * dz;
        nu += a * dnu;
    }
    out.x = x;
    out.z = z;
    out.nu = nu;
    out.objective = 0.5 * x.dot(qp.P * x) + qp.q.dot(x);
    return out;
}

/// Dense form of l <= A x <= u: rows with l == u become equalities, finite
/// bounds become inequality rows.
inline DenseQP from_standard(const soiling::qp::StandardQP& sq) {
    const MatrixXd A = MatrixXd(sq.A);
    std::vector<Eigen::Index> eq, up, lo;
    for (Eigen::Index i = 0; i < sq.m(); ++i) {
        if (sq.l[i] == sq.u[i]) {
            eq.push_back(i);
            continue;
        }
        if (std::isfinite(sq.u[i])) up.push_back(i);
        if (std::isfinite(sq.l[i])) lo.push_back(i);
    }
    DenseQP d;
    d.P = MatrixXd(sq.P);
    d.q = sq.q;
    d.E.resize(static_cast<Eigen::Index>(eq.size()), sq.n());
    d.b.resize(static_cast<Eigen::Index>(eq.size()));
    for (std::size_t k = 0; k < eq.size(); ++k) {
        d.E.row(static_cast<Eigen::Index>(k)) = A.row(eq[k]);
        d.b[static_cast<Eigen::Index>(k)] = sq.l[eq[k]];
    }
    d.G.resize(static_cast<Eigen::Index>(up.size() + lo.size()), sq.n());
    d.h.resize(d.G.rows());
    Eigen::Index r = 0;
    for (auto i : up) {
        d.G.row(r) = A.row(i);
        d.h[r++] = sq.u[i];
    }
    for (auto i : lo) {
        d.G.row(r) = -A.row(i);
        d.h[r++] = -sq.l[i];
    }
    return d;
}

struct SplitSolution {
    std::vector<double> x1, x2, x3, x4;
    double objective = 0.0;
    bool converged = false;
};

/// Variables: x2[T], x3[T], x4[T], p[K], n[K], a+[T-2], a-[T-2], r+[T-1], r-[T-1].
///   y - x2 - x3 - x4 = p - n on K           quantile cost tau1 p + (1 - tau1) n
///   D2 x4 = a+ - a-                         cost lambda4a (a+ + a-)
///   D1 x4 = r+ - r-                         cost lambda4c (tau4 r+ + (1 - tau4) r-)
///   x2[t] = x2[t+Y],  x3[0] = 0,  D2 x3 = 0
///   x4 <= 0, splits >= 0;  lambda2 ||D2 x2||^2 and -lambda4b sum(x4)
inline SplitSolution solve_split(const soiling::DailySignal& y, const soiling::SDConfig& cfg, double tol = 1e-10) {
    const auto T = static_cast<Eigen::Index>(y.size());
    const auto Kset = y.known_set();
    const auto K = static_cast<Eigen::Index>(Kset.size());
    const Eigen::Index c2 = T - 2, c1 = T - 1;
    const Eigen::Index o2 = 0, o3 = T, o4 = 2 * T, op = 3 * T, on = op + K, oap = on + K, oam = oap + c2,
                       orp = oam + c2, orm = orp + c1, n = orm + c1;

    DenseQP d;
    d.P = MatrixXd::Zero(n, n);
    MatrixXd D2 = MatrixXd::Zero(c2, T);
    for (Eigen::Index j = 0; j < c2; ++j) {
        D2(j, j) = 1.0;
        D2(j, j + 1) = -2.0;
        D2(j, j + 2) = 1.0;
    }
    d.P.block(o2, o2, T, T) = 2.0 * cfg.lambda2 * D2.transpose() * D2;
    d.q = VectorXd::Zero(n);
    d.q.segment(o4, T).setConstant(-cfg.lambda4b);
    d.q.segment(op, K).setConstant(cfg.tau1);
    d.q.segment(on, K).setConstant(1.0 - cfg.tau1);
    d.q.segment(oap, c2).setConstant(cfg.lambda4a);
    d.q.segment(oam, c2).setConstant(cfg.lambda4a);
    d.q.segment(orp, c1).setConstant(cfg.lambda4c * cfg.tau4);
    d.q.segment(orm, c1).setConstant(cfg.lambda4c * (1.0 - cfg.tau4));

    const Eigen::Index Y = cfg.period;
    const Eigen::Index n_periodic = std::max<Eigen::Index>(T - Y, 0);
    const Eigen::Index p = K + c2 + c1 + n_periodic + 1 + c2;
    d.E = MatrixXd::Zero(p, n);
    d.b = VectorXd::Zero(p);
    Eigen::Index r = 0;
    for (Eigen::Index k = 0; k < K; ++k, ++r) {
        const auto t = static_cast<Eigen::Index>(Kset[static_cast<std::size_t>(k)]);
        d.E(r, o2 + t) = 1.0;
        d.E(r, o3 + t) = 1.0;
        d.E(r, o4 + t) = 1.0;
        d.E(r, op + k) = 1.0;
        d.E(r, on + k) = -1.0;
        d.b[r] = y.values[static_cast<std::size_t>(t)];
    }
    for (Eigen::Index j = 0; j < c2; ++j, ++r) {
        d.E.block(r, o4, 1, T) = D2.row(j);
        d.E(r, oap + j) = -1.0;
        d.E(r, oam + j) = 1.0;
    }
    for (Eigen::Index j = 0; j < c1; ++j, ++r) {
        d.E(r, o4 + j + 1) = 1.0;
        d.E(r, o4 + j) = -1.0;
        d.E(r, orp + j) = -1.0;
        d.E(r, orm + j) = 1.0;
    }
    for (Eigen::Index t = 0; t < n_periodic; ++t, ++r) {
        d.E(r, o2 + t) = 1.0;
        d.E(r, o2 + t + Y) = -1.0;
    }
    d.E(r++, o3) = 1.0;
    for (Eigen::Index j = 0; j < c2; ++j, ++r) d.E.block(r, o3, 1, T) = D2.row(j);

    const Eigen::Index m = T + (n - op);
    d.G = MatrixXd::Zero(m, n);
    d.h = VectorXd::Zero(m);
    for (Eigen::Index t = 0; t < T; ++t) d.G(t, o4 + t) = 1.0;
    for (Eigen::Index v = op; v < n; ++v) d.G(T + v - op, v) = -1.0;

    const IpmResult res = solve_ipm(d, tol);
    SplitSolution out;
    out.converged = res.converged;
    out.objective = res.objective;
    out.x1.assign(y.size(), 0.0);
    out.x2.resize(y.size());
    out.x3.resize(y.size());
    out.x4.resize(y.size());
    for (Eigen::Index t = 0; t < T; ++t) {
        out.x2[static_cast<std::size_t>(t)] = res.x[o2 + t];
        out.x3[static_cast<std::size_t>(t)] = res.x[o3 + t];
        out.x4[static_cast<std::size_t>(t)] = res.x[o4 + t];
    }
    for (Eigen::Index k = 0; k < K; ++k)
        out.x1[Kset[static_cast<std::size_t>(k)]] = res.x[op + k] - res.x[on + k];
    return out;
}

}  // namespace oracle
