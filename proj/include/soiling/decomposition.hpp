#pragma once

// Reformulation of the soiling decomposition as a StandardQP and the
// end-to-end decompose() entry point.
//
// Decision vector, in order:
//   theta  [P]      seasonal profile over one period (P = min(Y, T)); x2_t = theta[t mod Y]
//   slope  [1]      degradation scaled by the length T; x3_t = slope t / T
//   s      [T]      soiling component x4
//   r_aux  [|K|]    epigraph of the residual quantile cost
//   c_aux  [T-2]    epigraph of |D2 s|
//   d_aux  [T-1]    epigraph of the quantile cost of D1 s
//
// The residual x1 = y - x2 - x3 - x4 is eliminated on the known set K and is
// defined as 0 on missing days. Constraint rows, in order:
//   r_k + tau1 (x2+x3+x4)_t        >=  tau1 y_t           (t = K[k])
//   r_k - (1-tau1) (x2+x3+x4)_t    >= -(1-tau1) y_t
//   c_j - (D2 s)_j >= 0,   c_j + (D2 s)_j >= 0
//   d_j - tau4 (D1 s)_j >= 0,   d_j + (1-tau4) (D1 s)_j >= 0
//   s_t <= 0

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/SparseCore>

#include "soiling/error.hpp"
#include "soiling/qp/admm.hpp"
#include "soiling/qp/standard_qp.hpp"
#include "soiling/sd_model.hpp"
#include "soiling/signal_prep.hpp"

namespace soiling {

/// Offsets of each variable and constraint block inside a StandardQP.
struct QPLayout {
    std::size_t days = 0;
    std::size_t profile_length = 0;  // min(Y, T)
    std::size_t period = 0;
    std::vector<std::size_t> known;  // K

    std::size_t theta = 0, slope = 0, soiling = 0, residual_aux = 0, curvature_aux = 0, rate_aux = 0;
    std::size_t variables = 0;

    std::size_t residual_upper_rows = 0, residual_lower_rows = 0, curvature_rows = 0, rate_rows = 0, sign_rows = 0;
    std::size_t constraints = 0;

    static QPLayout make(std::size_t days, std::size_t period, std::vector<std::size_t> known) {
        QPLayout L;
        L.days = days;
        L.period = period;
        L.profile_length = std::min(period, days);
        L.known = std::move(known);
        const std::size_t nk = L.known.size();
        const std::size_t n_curv = days >= 2 ? days - 2 : 0;
        const std::size_t n_rate = days >= 1 ? days - 1 : 0;

        L.theta = 0;
        L.slope = L.theta + L.profile_length;
        L.soiling = L.slope + 1;
        L.residual_aux = L.soiling + days;
        L.curvature_aux = L.residual_aux + nk;
        L.rate_aux = L.curvature_aux + n_curv;
        L.variables = L.rate_aux + n_rate;

        L.residual_upper_rows = 0;
        L.residual_lower_rows = nk;
        L.curvature_rows = 2 * nk;
        L.rate_rows = L.curvature_rows + 2 * n_curv;
        L.sign_rows = L.rate_rows + 2 * n_rate;
        L.constraints = L.sign_rows + days;
        return L;
    }

    std::size_t profile_index(std::size_t t) const { return theta + t % period; }
};

/// Dense per-day components recovered from a stacked QP solution.
struct Components {
    std::vector<double> x1, x2, x3, x4;
    double slope = 0.0;
};

/// Maps a stacked solution back to x1..x4. The soiling block is projected onto
/// x4 <= 0; x1 absorbs the remainder so the known-set sum is exact.
inline Components recover_components(const QPLayout& L, const DailySignal& signal, const qp::Vector& z) {
    Components c;
    const std::size_t T = L.days;
    c.x1.assign(T, 0.0);
    c.x2.resize(T);
    c.x3.resize(T);
    c.x4.resize(T);
    c.slope = z[static_cast<Eigen::Index>(L.slope)] / static_cast<double>(T);
    for (std::size_t t = 0; t < T; ++t) {
        c.x2[t] = z[static_cast<Eigen::Index>(L.profile_index(t))];
        c.x3[t] = c.slope * static_cast<double>(t);
        c.x4[t] = std::min(z[static_cast<Eigen::Index>(L.soiling + t)], 0.0);
    }
    for (std::size_t t = 0; t < T; ++t)
        if (signal.is_known(t)) c.x1[t] = signal.values[t] - (c.x2[t] + c.x3[t] + c.x4[t]);
    return c;
}

struct Reformulation {
    qp::StandardQP qp;
    QPLayout layout;
};

inline Reformulation reformulate(const SDProblem& problem) {
    const DailySignal& y = problem.signal;
    const SDConfig& cfg = problem.config;
    const std::size_t T = y.size();
    QPLayout L = QPLayout::make(T, static_cast<std::size_t>(cfg.period), y.known_set());
    const auto n = static_cast<Eigen::Index>(L.variables);
    const auto m = static_cast<Eigen::Index>(L.constraints);
    using Trip = Eigen::Triplet<double>;
    auto idx = [](std::size_t v) { return static_cast<int>(v); };

    // Quadratic term: 2 lambda2 (D2 S)' (D2 S) on theta, S the tiling matrix.
    std::vector<Trip> ptrips;
    if (T >= 3 && cfg.lambda2 > 0.0) {
        std::vector<Trip> strips;
        for (std::size_t t = 0; t < T; ++t) strips.emplace_back(idx(t), idx(t % L.profile_length), 1.0);
        Eigen::SparseMatrix<double> tile(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(L.profile_length));
        tile.setFromTriplets(strips.begin(), strips.end());
        const Eigen::SparseMatrix<double> DS = DifferenceOperator(2, T).matrix() * tile;
        const Eigen::SparseMatrix<double> H = (2.0 * cfg.lambda2) * Eigen::SparseMatrix<double>(DS.transpose() * DS);
        for (int k = 0; k < H.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(H, k); it; ++it)
                if (it.value() != 0.0) ptrips.emplace_back(static_cast<int>(L.theta + it.row()), static_cast<int>(L.theta + it.col()), it.value());
    }

    qp::Vector q = qp::Vector::Zero(n);
    for (std::size_t t = 0; t < T; ++t) q[idx(L.soiling + t)] = -cfg.lambda4b;
    for (std::size_t k = 0; k < L.known.size(); ++k) q[idx(L.residual_aux + k)] = 1.0;
    for (std::size_t j = 0; j + 2 < T; ++j) q[idx(L.curvature_aux + j)] = cfg.lambda4a;
    for (std::size_t j = 0; j + 1 < T; ++j) q[idx(L.rate_aux + j)] = cfg.lambda4c;

    std::vector<Trip> atrips;
    qp::Vector lo = qp::Vector::Constant(m, -kInfinity);
    qp::Vector hi = qp::Vector::Constant(m, kInfinity);

    // Model part x2 + x3 + x4 at day t, scaled by `w`, on row `row`.
    auto add_model = [&](std::size_t row, std::size_t t, double w) {
        atrips.emplace_back(idx(row), idx(L.profile_index(t)), w);
        if (t > 0) atrips.emplace_back(idx(row), idx(L.slope), w * static_cast<double>(t) / static_cast<double>(T));
        atrips.emplace_back(idx(row), idx(L.soiling + t), w);
    };

    const double tau = cfg.tau1;
    for (std::size_t k = 0; k < L.known.size(); ++k) {
        const std::size_t t = L.known[k];
        const double yt = y.values[t];
        const std::size_t up = L.residual_upper_rows + k;
        const std::size_t dn = L.residual_lower_rows + k;
        atrips.emplace_back(idx(up), idx(L.residual_aux + k), 1.0);
        add_model(up, t, tau);
        lo[idx(up)] = tau * yt;
        atrips.emplace_back(idx(dn), idx(L.residual_aux + k), 1.0);
        add_model(dn, t, -(1.0 - tau));
        lo[idx(dn)] = -(1.0 - tau) * yt;
    }

    const std::size_t n_curv = T >= 2 ? T - 2 : 0;
    for (std::size_t j = 0; j < n_curv; ++j) {
        const std::size_t plus = L.curvature_rows + 2 * j;  // c - D2 s >= 0
        const std::size_t minus = plus + 1;                 // c + D2 s >= 0
        const double st[3] = {1.0, -2.0, 1.0};
        atrips.emplace_back(idx(plus), idx(L.curvature_aux + j), 1.0);
        atrips.emplace_back(idx(minus), idx(L.curvature_aux + j), 1.0);
        for (std::size_t k = 0; k < 3; ++k) {
            atrips.emplace_back(idx(plus), idx(L.soiling + j + k), -st[k]);
            atrips.emplace_back(idx(minus), idx(L.soiling + j + k), st[k]);
        }
        lo[idx(plus)] = 0.0;
        lo[idx(minus)] = 0.0;
    }

    const double tau4 = cfg.tau4;
    const std::size_t n_rate = T >= 1 ? T - 1 : 0;
    for (std::size_t j = 0; j < n_rate; ++j) {
        const std::size_t pos = L.rate_rows + 2 * j;  // d - tau4 D1 s >= 0
        const std::size_t neg = pos + 1;              // d + (1 - tau4) D1 s >= 0
        atrips.emplace_back(idx(pos), idx(L.rate_aux + j), 1.0);
        atrips.emplace_back(idx(pos), idx(L.soiling + j), tau4);
        atrips.emplace_back(idx(pos), idx(L.soiling + j + 1), -tau4);
        atrips.emplace_back(idx(neg), idx(L.rate_aux + j), 1.0);
        atrips.emplace_back(idx(neg), idx(L.soiling + j), -(1.0 - tau4));
        atrips.emplace_back(idx(neg), idx(L.soiling + j + 1), 1.0 - tau4);
        lo[idx(pos)] = 0.0;
        lo[idx(neg)] = 0.0;
    }

    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t row = L.sign_rows + t;
        atrips.emplace_back(idx(row), idx(L.soiling + t), 1.0);
        hi[idx(row)] = 0.0;
    }

    Reformulation out;
    out.layout = std::move(L);
    out.qp.P.resize(n, n);
    out.qp.P.setFromTriplets(ptrips.begin(), ptrips.end());
    out.qp.P.makeCompressed();
    out.qp.A.resize(m, n);
    out.qp.A.setFromTriplets(atrips.begin(), atrips.end());
    out.qp.A.makeCompressed();
    out.qp.q = std::move(q);
    out.qp.l = std::move(lo);
    out.qp.u = std::move(hi);
    return out;
}

/// Objective of the decomposition evaluated directly from the component costs.
inline double decomposition_objective(const SDProblem& problem, const Components& c) {
    std::vector<double> residual;
    for (std::size_t t = 0; t < problem.days(); ++t)
        if (problem.signal.is_known(t)) residual.push_back(c.x1[t]);
    return quantile_cost(residual, problem.config.tau1) + seasonal_cost(c.x2, problem.config) +
           soiling_cost(c.x4, problem.config);
}

struct Decomposition {
    std::vector<double> x1, x2, x3, x4;
    double slope = 0.0;
    /// Direct evaluation of the component costs at the returned components.
    double objective = 0.0;
    qp::SolveReport report;
    std::size_t variables = 0;
    std::size_t constraints = 0;
    /// Signal shorter than one period: periodicity constraint is vacuous.
    bool periodicity_vacuous = false;
    /// Signal shorter than two periods.
    bool short_for_seasonality = false;
};

/// Projects s onto s <= 0 and sets every auxiliary to the smallest value its
/// epigraph rows allow. The result is feasible to rounding and its QP
/// objective equals the direct component cost. P acts on theta only, so the
/// dual residual for a fixed multiplier is unchanged.
inline void tighten_auxiliaries(const QPLayout& L, const SDProblem& problem, qp::Vector& z) {
    const std::size_t T = L.days;
    const auto at = [&](std::size_t i) -> double& { return z[static_cast<Eigen::Index>(i)]; };
    for (std::size_t t = 0; t < T; ++t) at(L.soiling + t) = std::min(at(L.soiling + t), 0.0);
    const double tau = problem.config.tau1;
    for (std::size_t k = 0; k < L.known.size(); ++k) {
        const std::size_t t = L.known[k];
        const double model = at(L.profile_index(t)) +
                             at(L.slope) * static_cast<double>(t) / static_cast<double>(T) + at(L.soiling + t);
        const double r = problem.signal.values[t] - model;
        at(L.residual_aux + k) = std::max(tau * r, (tau - 1.0) * r);
    }
    for (std::size_t j = 0; j + 2 < T; ++j)
        at(L.curvature_aux + j) = std::abs(at(L.soiling + j) - 2.0 * at(L.soiling + j + 1) + at(L.soiling + j + 2));
    const double tau4 = problem.config.tau4;
    for (std::size_t j = 0; j + 1 < T; ++j) {
        const double d = at(L.soiling + j + 1) - at(L.soiling + j);
        at(L.rate_aux + j) = std::max(tau4 * d, (tau4 - 1.0) * d);
    }
}

inline Decomposition decompose(const SDProblem& problem, const qp::SolverSettings& settings = {}) {
    const Reformulation ref = reformulate(problem);
    qp::QPSolution sol = qp::solve(ref.qp, settings);
    if (sol.report.status == qp::SolveStatus::Optimal || sol.report.status == qp::SolveStatus::MaxIterations) {
        tighten_auxiliaries(ref.layout, problem, sol.x);
        sol.report.objective = ref.qp.objective(sol.x);
        // Both points are feasible after tightening; keep the cheaper one.
        if (sol.polish_candidate.size() == sol.x.size()) {
            tighten_auxiliaries(ref.layout, problem, sol.polish_candidate);
            const double f = ref.qp.objective(sol.polish_candidate);
            if (f < sol.report.objective) {
                sol.x = std::move(sol.polish_candidate);
                sol.report.objective = f;
                sol.report.polished = true;
            }
        }
        const qp::Vector Az = ref.qp.A * sol.x;
        sol.report.primal_residual = (Az - Az.cwiseMax(ref.qp.l).cwiseMin(ref.qp.u)).lpNorm<Eigen::Infinity>();
    }
    Components c = recover_components(ref.layout, problem.signal, sol.x);

    Decomposition d;
    d.x1 = std::move(c.x1);
    d.x2 = std::move(c.x2);
    d.x3 = std::move(c.x3);
    d.x4 = std::move(c.x4);
    d.slope = c.slope;
    d.report = std::move(sol.report);
    d.variables = ref.layout.variables;
    d.constraints = ref.layout.constraints;
    d.periodicity_vacuous = !problem.periodic_constraint_active();
    d.short_for_seasonality = problem.short_for_seasonality();
    Components view{d.x1, d.x2, d.x3, d.x4, d.slope};
    d.objective = decomposition_objective(problem, view);
    return d;
}

inline Decomposition decompose(const DailySignal& signal, const SDConfig& config,
                               const qp::SolverSettings& settings = {}) {
    return decompose(assemble(signal, config), settings);
}

}  // namespace soiling
