#pragma once

// Operator-splitting (ADMM) solver for StandardQP.
//
// Each iteration solves the quasi-definite KKT system
//
//     [ P + sigma I    A'          ] [ x~ ]   [ sigma x - q     ]
//     [ A             -diag(1/rho) ] [ nu ] = [ z - y ./ rho    ]
//
// with a sparse LDL' factorization that is computed once and refactored
// numerically only when rho changes. The problem is Ruiz-equilibrated first.
// Near convergence an active-set polish (reduced KKT solve with iterative
// refinement) is attempted and accepted only if it meets the tolerances.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "soiling/error.hpp"
#include "soiling/qp/standard_qp.hpp"

namespace soiling::qp {

struct SolverSettings {
    double eps_abs = 1e-6;
    double eps_rel = 1e-6;
    int max_iter = 100000;
    double rho = 0.1;
    bool adaptive_rho = true;
    int adaptive_rho_interval = 50;
    double adaptive_rho_tolerance = 5.0;
    double sigma = 1e-6;
    double alpha = 1.6;
    int check_interval = 10;
    bool polish = true;
    int polish_interval = 100;
    double polish_trigger = 1e3;
    double polish_delta = 1e-7;
    int polish_refine_iter = 5;
    int polish_rounds = 8;
    int polish_max_attempts = 6;
    int scaling_iter = 10;
    double eps_prim_inf = 1e-5;
    double eps_dual_inf = 1e-5;
    bool record_history = true;

    void validate() const {
        if (!(eps_abs > 0.0) || !(eps_rel > 0.0)) throw Error("solver tolerances must be positive");
        if (max_iter < 1) throw Error("max_iter must be >= 1");
        if (!(rho > 0.0) || !(sigma > 0.0)) throw Error("rho and sigma must be positive");
        if (!(alpha > 0.0 && alpha < 2.0)) throw Error("relaxation alpha must lie in (0,2)");
        if (check_interval < 1 || adaptive_rho_interval < 1 || polish_interval < 1)
            throw Error("intervals must be >= 1");
    }
};

enum class SolveStatus { Optimal, MaxIterations, PrimalInfeasible, DualInfeasible };

inline std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::MaxIterations: return "max-iter";
        case SolveStatus::PrimalInfeasible: return "infeasible-detected";
        case SolveStatus::DualInfeasible: return "unbounded-detected";
    }
    return "unknown";
}

struct ResidualSample {
    int iteration = 0;
    double primal = 0.0;
    double dual = 0.0;
};

struct SolveReport {
    SolveStatus status = SolveStatus::MaxIterations;
    int iterations = 0;
    double primal_residual = std::numeric_limits<double>::quiet_NaN();
    double dual_residual = std::numeric_limits<double>::quiet_NaN();
    double primal_tolerance = std::numeric_limits<double>::quiet_NaN();
    double dual_tolerance = std::numeric_limits<double>::quiet_NaN();
    double objective = std::numeric_limits<double>::quiet_NaN();
    double rho = 0.0;
    int rho_updates = 0;
    bool polished = false;
    double wall_time_s = 0.0;
    std::vector<ResidualSample> history;

    bool optimal() const { return status == SolveStatus::Optimal; }
};

struct QPSolution {
    Vector x;  // primal
    Vector y;  // constraint multipliers
    SolveReport report;
    /// Lowest-objective primal-feasible point met by the final polish when it
    /// found no sign-consistent multipliers. Not certified; empty if none.
    Vector polish_candidate;
};

namespace detail {

inline double inf_norm(const Vector& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

inline Vector col_inf_norms(const SparseMatrix& M) {
    Vector out = Vector::Zero(M.cols());
    for (int k = 0; k < M.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(M, k); it; ++it) out[k] = std::max(out[k], std::abs(it.value()));
    return out;
}

inline Vector row_inf_norms(const SparseMatrix& M) {
    Vector out = Vector::Zero(M.rows());
    for (int k = 0; k < M.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(M, k); it; ++it)
            out[it.row()] = std::max(out[it.row()], std::abs(it.value()));
    return out;
}

inline double limit_scaling(double v) {
    constexpr double kMin = 1e-4, kMax = 1e4;
    if (v < kMin) return 1.0;
    return std::min(v, kMax);
}

/// Ruiz equilibration: P~ = c D P D, q~ = c D q, A~ = E A D.
struct Scaling {
    Vector D, E, Dinv, Einv;
    double c = 1.0, cinv = 1.0;
};

inline Scaling equilibrate(SparseMatrix& P, Vector& q, SparseMatrix& A, int iterations) {
    const auto n = q.size();
    const auto m = A.rows();
    Scaling s;
    s.D = Vector::Ones(n);
    s.E = Vector::Ones(m);
    for (int it = 0; it < iterations; ++it) {
        const Vector pn = col_inf_norms(P);
        const Vector an = col_inf_norms(A);
        Vector dt(n);
        for (Eigen::Index j = 0; j < n; ++j) dt[j] = 1.0 / std::sqrt(limit_scaling(std::max(pn[j], an[j])));
        const Vector rn = row_inf_norms(A);
        Vector et(m);
        for (Eigen::Index i = 0; i < m; ++i) et[i] = 1.0 / std::sqrt(limit_scaling(rn[i]));

        P = dt.asDiagonal() * P * dt.asDiagonal();
        A = et.asDiagonal() * A * dt.asDiagonal();
        q = dt.cwiseProduct(q);
        s.D = s.D.cwiseProduct(dt);
        s.E = s.E.cwiseProduct(et);

        const Vector pcols = col_inf_norms(P);
        const double mean_p = n ? pcols.mean() : 0.0;
        const double ct = 1.0 / limit_scaling(std::max(mean_p, inf_norm(q)));
        P *= ct;
        q *= ct;
        s.c *= ct;
    }
    s.Dinv = s.D.cwiseInverse();
    s.Einv = s.E.cwiseInverse();
    s.cinv = 1.0 / s.c;
    return s;
}

/// Lower triangle of [[P + reg_top I, A'], [A, -diag(bottom)]] with explicit
/// diagonal entries everywhere, so numeric refactorization keeps the pattern.
inline SparseMatrix build_kkt(const SparseMatrix& P, const SparseMatrix& A, double reg_top,
                              const Vector& bottom_diag) {
    const auto n = P.rows();
    const auto m = A.rows();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(P.nonZeros() + A.nonZeros() + n + m));
    for (int k = 0; k < P.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(P, k); it; ++it)
            if (it.row() > it.col()) trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (Eigen::Index j = 0; j < n; ++j) trips.emplace_back(j, j, reg_top + P.coeff(j, j));
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(A, k); it; ++it)
            trips.emplace_back(static_cast<int>(n + it.row()), static_cast<int>(it.col()), it.value());
    for (Eigen::Index i = 0; i < m; ++i) trips.emplace_back(static_cast<int>(n + i), static_cast<int>(n + i), -bottom_diag[i]);
    SparseMatrix K(n + m, n + m);
    K.setFromTriplets(trips.begin(), trips.end());
    K.makeCompressed();
    return K;
}

using KktFactor = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

}  // namespace detail

/// ADMM solver bound to one problem. Holds the scaled data and the cached
/// factorization; instances share nothing.
class AdmmSolver {
public:
    AdmmSolver(const StandardQP& qp, SolverSettings settings) : settings_(settings) {
        settings_.validate();
        qp.validate();
        n_ = qp.n();
        m_ = qp.m();
        P_ = qp.P;
        q_ = qp.q;
        A_ = qp.A;
        P_.makeCompressed();
        A_.makeCompressed();
        scaling_ = detail::equilibrate(P_, q_, A_, settings_.scaling_iter);
        At_ = A_.transpose();
        l_ = scaling_.E.cwiseProduct(qp.l);
        u_ = scaling_.E.cwiseProduct(qp.u);
        // E * (+-inf) stays infinite; clamp huge finite values to infinity.
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (qp.l[i] <= -kBoundInfinity) l_[i] = -kInf;
            if (qp.u[i] >= kBoundInfinity) u_[i] = kInf;
        }
        raw_l_ = qp.l;
        raw_u_ = qp.u;
        rho_ = settings_.rho;
        set_rho_vector();
        kkt_ = detail::build_kkt(P_, A_, settings_.sigma, rho_inv_);
        locate_bottom_diagonal();
        factor_.analyzePattern(kkt_);
        refactor();
    }

    QPSolution solve() {
        const auto t0 = std::chrono::steady_clock::now();
        SolveReport report;
        Vector x = Vector::Zero(n_), z = Vector::Zero(m_), y = Vector::Zero(m_);
        Vector x_prev = x, y_prev = y;
        Vector rhs(n_ + m_), sol(n_ + m_);
        Vector best_x = x, best_y = y;
        double best_merit = kInf;
        int last_polish = -settings_.polish_interval;
        int polish_gap = settings_.polish_interval;
        int polish_attempts = 0;
        int rho_interval = settings_.adaptive_rho_interval;
        int next_rho_check = rho_interval;
        bool done = false;

        int iter = 0;
        for (iter = 1; iter <= settings_.max_iter; ++iter) {
            x_prev = x;
            y_prev = y;
            rhs.head(n_) = settings_.sigma * x - q_;
            rhs.tail(m_) = z - y.cwiseProduct(rho_inv_);
            sol = factor_.solve(rhs);
            const auto xt = sol.head(n_);
            const Vector zt = z + (sol.tail(m_) - y).cwiseProduct(rho_inv_);
            x = settings_.alpha * xt + (1.0 - settings_.alpha) * x_prev;
            const Vector z_relaxed = settings_.alpha * zt + (1.0 - settings_.alpha) * z;
            const Vector z_new = (z_relaxed + y.cwiseProduct(rho_inv_)).cwiseMax(l_).cwiseMin(u_);
            y += rho_vec_.cwiseProduct(z_relaxed - z_new);
            z = z_new;

            const bool check = iter % settings_.check_interval == 0 || iter == settings_.max_iter;
            if (!check) continue;

            const Residuals r = residuals(x, z, y);
            if (settings_.record_history) report.history.push_back({iter, r.primal, r.dual});
            const double merit = std::max(r.primal / r.eps_primal, r.dual / r.eps_dual);
            if (merit < best_merit) {
                best_merit = merit;
                best_x = x;
                best_y = y;
            }
            if (r.primal <= r.eps_primal && r.dual <= r.eps_dual) {
                fill(report, r, SolveStatus::Optimal);
                done = true;
                if (settings_.polish) try_polish(x, y, report, /*require_tolerance=*/false);
                break;
            }
            if (primal_infeasible(y - y_prev)) {
                fill(report, r, SolveStatus::PrimalInfeasible);
                done = true;
                break;
            }
            if (dual_infeasible(x - x_prev)) {
                fill(report, r, SolveStatus::DualInfeasible);
                done = true;
                break;
            }
            if (settings_.polish && polish_attempts < settings_.polish_max_attempts && iter - last_polish >= polish_gap &&
                r.primal <= settings_.polish_trigger * r.eps_primal && r.dual <= settings_.polish_trigger * r.eps_dual) {
                last_polish = iter;
                ++polish_attempts;
                polish_gap *= 2;
                if (try_polish(x, y, report, /*require_tolerance=*/true)) {
                    done = true;
                    break;
                }
            }
            // The interval doubles after every accepted update so rho cannot cycle.
            if (settings_.adaptive_rho && iter >= next_rho_check) {
                if (update_rho(x, z, y)) {
                    ++report.rho_updates;
                    rho_interval *= 2;
                }
                next_rho_check = iter + rho_interval;
            }
        }
        report.iterations = std::min(iter, settings_.max_iter);
        if (!done) {
            x = best_x;
            y = best_y;
            const Residuals r = residuals(x, (A_ * x).cwiseMax(l_).cwiseMin(u_), y);
            fill(report, r, SolveStatus::MaxIterations);
        }

        QPSolution out;
        out.x = scaling_.D.cwiseProduct(x);
        out.y = scaling_.cinv * scaling_.E.cwiseProduct(y);
        if (candidate_.size() && !report.polished) out.polish_candidate = scaling_.D.cwiseProduct(candidate_);
        report.rho = rho_;
        report.objective = unscaled_objective(x);
        report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.report = std::move(report);
        return out;
    }

private:
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    static constexpr double kBoundInfinity = 1e20;
    static constexpr double kRhoMin = 1e-6;
    static constexpr double kRhoMax = 1e6;
    static constexpr double kEqualityRhoFactor = 1e3;

    struct Residuals {
        double primal, dual, eps_primal, eps_dual;
        // Scaled-space normalized quantities for the rho update.
        double scaled_primal_ratio, scaled_dual_ratio;
    };

    void set_rho_vector() {
        rho_vec_.resize(m_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (std::isinf(l_[i]) && std::isinf(u_[i]))
                rho_vec_[i] = kRhoMin;
            else if (u_[i] - l_[i] < 1e-4)
                rho_vec_[i] = kEqualityRhoFactor * rho_;
            else
                rho_vec_[i] = rho_;
        }
        rho_inv_ = rho_vec_.cwiseInverse();
    }

    void locate_bottom_diagonal() {
        diag_slot_.assign(static_cast<std::size_t>(m_), -1);
        for (Eigen::Index i = 0; i < m_; ++i) {
            const auto col = n_ + i;
            for (auto k = kkt_.outerIndexPtr()[col]; k < kkt_.outerIndexPtr()[col + 1]; ++k) {
                if (kkt_.innerIndexPtr()[k] == col) {
                    diag_slot_[static_cast<std::size_t>(i)] = k;
                    break;
                }
            }
        }
    }

    void refactor() {
        for (Eigen::Index i = 0; i < m_; ++i) kkt_.valuePtr()[diag_slot_[static_cast<std::size_t>(i)]] = -rho_inv_[i];
        factor_.factorize(kkt_);
        if (factor_.info() != Eigen::Success) throw Error("KKT factorization failed");
    }

    Residuals residuals(const Vector& x, const Vector& z, const Vector& y) const {
        const Vector Ax = A_ * x;
        const Vector Px = P_ * x;
        const Vector Aty = At_ * y;
        Residuals r{};
        r.primal = detail::inf_norm(scaling_.Einv.cwiseProduct(Ax - z));
        r.eps_primal = settings_.eps_abs +
                       settings_.eps_rel * std::max(detail::inf_norm(scaling_.Einv.cwiseProduct(Ax)),
                                                    detail::inf_norm(scaling_.Einv.cwiseProduct(z)));
        const double ci = scaling_.cinv;
        r.dual = ci * detail::inf_norm(scaling_.Dinv.cwiseProduct(Px + q_ + Aty));
        r.eps_dual = settings_.eps_abs +
                     settings_.eps_rel * ci *
                         std::max({detail::inf_norm(scaling_.Dinv.cwiseProduct(Px)),
                                   detail::inf_norm(scaling_.Dinv.cwiseProduct(Aty)),
                                   detail::inf_norm(scaling_.Dinv.cwiseProduct(q_))});
        const double pden = std::max({detail::inf_norm(Ax), detail::inf_norm(z), 1e-30});
        const double dden = std::max({detail::inf_norm(Px), detail::inf_norm(Aty), detail::inf_norm(q_), 1e-30});
        r.scaled_primal_ratio = detail::inf_norm(Ax - z) / pden;
        r.scaled_dual_ratio = detail::inf_norm(Px + q_ + Aty) / dden;
        return r;
    }

    static void fill(SolveReport& report, const Residuals& r, SolveStatus status) {
        report.status = status;
        report.primal_residual = r.primal;
        report.dual_residual = r.dual;
        report.primal_tolerance = r.eps_primal;
        report.dual_tolerance = r.eps_dual;
    }

    bool update_rho(const Vector& x, const Vector& z, const Vector& y) {
        const Residuals r = residuals(x, z, y);
        if (r.scaled_dual_ratio <= 0.0) return false;
        double rho_new = rho_ * std::sqrt(r.scaled_primal_ratio / std::max(r.scaled_dual_ratio, 1e-30));
        rho_new = std::clamp(rho_new, kRhoMin, kRhoMax);
        if (rho_new > settings_.adaptive_rho_tolerance * rho_ || rho_new < rho_ / settings_.adaptive_rho_tolerance) {
            rho_ = rho_new;
            set_rho_vector();
            refactor();
            return true;
        }
        return false;
    }

    bool primal_infeasible(const Vector& dy_scaled) const {
        const Vector dy = scaling_.E.cwiseProduct(dy_scaled);
        const double norm = detail::inf_norm(dy);
        if (norm < 1e-12) return false;
        const double tol = settings_.eps_prim_inf * norm;
        const Vector Atdy = scaling_.Dinv.cwiseProduct(At_ * dy_scaled);
        if (detail::inf_norm(Atdy) > tol) return false;
        double support = 0.0;
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (dy[i] > 0.0) {
                if (std::isinf(u_[i])) {
                    if (dy[i] > tol) return false;
                } else {
                    support += raw_u_[i] * dy[i];
                }
            } else if (dy[i] < 0.0) {
                if (std::isinf(l_[i])) {
                    if (-dy[i] > tol) return false;
                } else {
                    support += raw_l_[i] * dy[i];
                }
            }
        }
        return support < -tol;
    }

    bool dual_infeasible(const Vector& dx_scaled) const {
        const Vector dx = scaling_.D.cwiseProduct(dx_scaled);
        const double norm = detail::inf_norm(dx);
        if (norm < 1e-12) return false;
        const double tol = settings_.eps_dual_inf * norm;
        const Vector Pdx = scaling_.cinv * scaling_.Dinv.cwiseProduct(P_ * dx_scaled);
        if (detail::inf_norm(Pdx) > tol) return false;
        const double qdx = scaling_.cinv * q_.dot(dx_scaled);
        if (qdx > -tol) return false;
        const Vector Adx = scaling_.Einv.cwiseProduct(A_ * dx_scaled);
        for (Eigen::Index i = 0; i < m_; ++i) {
            const bool lo_finite = !std::isinf(l_[i]);
            const bool hi_finite = !std::isinf(u_[i]);
            if (hi_finite && Adx[i] > tol) return false;
            if (lo_finite && Adx[i] < -tol) return false;
        }
        return true;
    }

    double unscaled_objective(const Vector& x_scaled) const {
        return scaling_.cinv * (0.5 * x_scaled.dot(P_ * x_scaled) + q_.dot(x_scaled));
    }

    /// Solves the equality-constrained problem with rows `side[i] != 0` held at
    /// their lower (-1) or upper (+1) bound. Returns false on numerical failure.
    bool solve_reduced(const std::vector<int>& side, Vector& xp, Vector& yp) const {
        std::vector<int> rows;
        for (Eigen::Index i = 0; i < m_; ++i)
            if (side[static_cast<std::size_t>(i)] != 0) rows.push_back(static_cast<int>(i));
        const auto k = static_cast<Eigen::Index>(rows.size());
        std::vector<Eigen::Triplet<double>> trips;
        for (Eigen::Index r = 0; r < k; ++r)
            for (SparseMatrix::InnerIterator it(At_, rows[static_cast<std::size_t>(r)]); it; ++it)
                trips.emplace_back(static_cast<int>(r), static_cast<int>(it.row()), it.value());
        SparseMatrix Ared(k, n_);
        Ared.setFromTriplets(trips.begin(), trips.end());

        const double delta = settings_.polish_delta;
        const SparseMatrix K = detail::build_kkt(P_, Ared, delta, Vector::Constant(k, delta));
        detail::KktFactor f;
        f.compute(K);
        if (f.info() != Eigen::Success) return false;

        Vector rhs(n_ + k);
        rhs.head(n_) = -q_;
        for (Eigen::Index r = 0; r < k; ++r) {
            const auto i = rows[static_cast<std::size_t>(r)];
            rhs[n_ + r] = side[static_cast<std::size_t>(i)] < 0 ? l_[i] : u_[i];
        }
        Vector sol = f.solve(rhs);
        // Iterative refinement against the unregularized system.
        const SparseMatrix Aredt = Ared.transpose();
        for (int it = 0; it < settings_.polish_refine_iter; ++it) {
            Vector res(n_ + k);
            res.head(n_) = rhs.head(n_) - (P_ * sol.head(n_) + Aredt * sol.tail(k));
            res.tail(k) = rhs.tail(k) - Ared * sol.head(n_);
            sol += f.solve(res);
        }
        if (!sol.allFinite()) return false;
        xp = sol.head(n_);
        yp = Vector::Zero(m_);
        for (Eigen::Index r = 0; r < k; ++r) yp[rows[static_cast<std::size_t>(r)]] = sol[n_ + r];
        return true;
    }

    /// Active-set polish seeded from the ADMM iterate. Rows whose multiplier
    /// comes out with the wrong sign are released and rows the candidate
    /// violates are added, for a bounded number of rounds. On success
    /// overwrites x, y and the report.
    bool try_polish(Vector& x, Vector& y, SolveReport& report, bool require_tolerance) {
        const Vector z_admm = (A_ * x + y.cwiseProduct(rho_inv_)).cwiseMax(l_).cwiseMin(u_);
        std::vector<int> side(static_cast<std::size_t>(m_), 0);
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (!std::isinf(l_[i]) && z_admm[i] - l_[i] < -y[i])
                side[static_cast<std::size_t>(i)] = -1;
            else if (!std::isinf(u_[i]) && u_[i] - z_admm[i] < y[i])
                side[static_cast<std::size_t>(i)] = +1;
        }

        const double tol = settings_.eps_abs;
        Vector xp, yp;
        bool consistent = false;
        for (int round = 0; round < settings_.polish_rounds; ++round) {
            if (!solve_reduced(side, xp, yp)) return false;
            const Vector Axp = A_ * xp;
            if (!require_tolerance) keep_candidate(xp, Axp);
            bool changed = false;
            for (Eigen::Index i = 0; i < m_; ++i) {
                auto& sd = side[static_cast<std::size_t>(i)];
                if (sd != 0 && l_[i] == u_[i]) continue;
                if (sd != 0) {
                    const double v = scaling_.cinv * scaling_.E[i] * yp[i];
                    if ((sd < 0 && v > tol) || (sd > 0 && v < -tol)) {
                        sd = 0;
                        changed = true;
                    }
                } else if (!std::isinf(l_[i]) && scaling_.Einv[i] * (Axp[i] - l_[i]) < -tol) {
                    sd = -1;
                    changed = true;
                } else if (!std::isinf(u_[i]) && scaling_.Einv[i] * (Axp[i] - u_[i]) > tol) {
                    sd = +1;
                    changed = true;
                }
            }
            if (!changed) {
                consistent = true;
                break;
            }
        }
        if (!consistent) return false;

        const Vector zp = (A_ * xp).cwiseMax(l_).cwiseMin(u_);
        const Residuals rp = residuals(xp, zp, yp);
        const bool within = rp.primal <= rp.eps_primal && rp.dual <= rp.eps_dual;
        if (require_tolerance && !within) return false;
        if (!require_tolerance && !(within || (rp.primal <= report.primal_residual && rp.dual <= report.dual_residual)))
            return false;
        x = xp;
        y = yp;
        fill(report, rp, within ? SolveStatus::Optimal : report.status);
        report.polished = true;
        return within;
    }

    void keep_candidate(const Vector& xp, const Vector& Axp) {
        const Vector violation = scaling_.Einv.cwiseProduct(Axp - Axp.cwiseMax(l_).cwiseMin(u_));
        const double eps = settings_.eps_abs + settings_.eps_rel * detail::inf_norm(scaling_.Einv.cwiseProduct(Axp));
        if (detail::inf_norm(violation) > eps) return;
        const double f = unscaled_objective(xp);
        if (candidate_.size() == 0 || f < candidate_objective_) {
            candidate_ = xp;
            candidate_objective_ = f;
        }
    }

    SolverSettings settings_;
    Vector candidate_;
    double candidate_objective_ = 0.0;
    Eigen::Index n_ = 0, m_ = 0;
    SparseMatrix P_, A_, At_;
    Vector q_, l_, u_, raw_l_, raw_u_;
    detail::Scaling scaling_;
    double rho_ = 0.1;
    Vector rho_vec_, rho_inv_;
    SparseMatrix kkt_;
    std::vector<Eigen::Index> diag_slot_;
    detail::KktFactor factor_;
};

inline QPSolution solve(const StandardQP& qp, const SolverSettings& settings = {}) {
    AdmmSolver solver(qp, settings);
    return solver.solve();
}

}  // namespace soiling::qp
