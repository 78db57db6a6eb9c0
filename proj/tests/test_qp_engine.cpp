#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "oracle/dense_qp.hpp"
#include "soiling/qp/admm.hpp"

using namespace soiling;
using qp::SparseMatrix;
using qp::Vector;

namespace {

SparseMatrix sparse(const Eigen::MatrixXd& m) { return m.sparseView(); }

/// Feasible random QP: equality, two-sided, one-sided and free rows.
qp::StandardQP random_qp(unsigned seed, int n, int m) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.1, 1.0);
    Eigen::MatrixXd M(n, n), A(m, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = nd(gen);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = ud(gen) < 0.3 ? nd(gen) : 0.0;
    Eigen::MatrixXd P = 0.1 * M.transpose() * M + 1e-2 * Eigen::MatrixXd::Identity(n, n);
    P = (0.5 * (P + P.transpose())).eval();
    Vector x0(n), q(n);
    for (int j = 0; j < n; ++j) {
        x0[j] = nd(gen);
        q[j] = nd(gen);
    }
    const Vector Ax0 = A * x0;
    Vector l(m), u(m);
    for (int i = 0; i < m; ++i) {
        switch (i % 4) {
            case 0: l[i] = u[i] = Ax0[i]; break;
            case 1: l[i] = Ax0[i] - ud(gen); u[i] = Ax0[i] + ud(gen); break;
            case 2: l[i] = -std::numeric_limits<double>::infinity(); u[i] = Ax0[i] + 0.01 * ud(gen); break;
            default: l[i] = Ax0[i] - 0.01 * ud(gen); u[i] = std::numeric_limits<double>::infinity(); break;
        }
    }
    return qp::StandardQP{sparse(P), q, sparse(A), l, u};
}

/// Unscaled KKT residuals computed from the problem data alone.
struct Kkt {
    double primal, dual, sign;
};

Kkt kkt_residuals(const qp::StandardQP& p, const Vector& x, const Vector& y) {
    const Vector Ax = p.A * x;
    const Vector z = Ax.cwiseMax(p.l).cwiseMin(p.u);
    const Vector r = p.P * x + p.q + Vector(p.A.transpose() * y);
    double sign = 0.0;
    for (Eigen::Index i = 0; i < p.m(); ++i) {
        if (y[i] > 0 && std::isinf(p.u[i])) sign = std::max(sign, y[i]);
        if (y[i] < 0 && std::isinf(p.l[i])) sign = std::max(sign, -y[i]);
    }
    return {(Ax - z).lpNorm<Eigen::Infinity>(), r.lpNorm<Eigen::Infinity>(), sign};
}

}  // namespace

class RandomQp : public ::testing::TestWithParam<unsigned> {};

TEST_P(RandomQp, MatchesInteriorPointOracle) {
    const auto p = random_qp(GetParam(), 50, 40);
    const auto sol = qp::solve(p);
    ASSERT_EQ(sol.report.status, qp::SolveStatus::Optimal);
    const auto ref = oracle::solve_ipm(oracle::from_standard(p));
    ASSERT_TRUE(ref.converged);
    EXPECT_NEAR(sol.report.objective, ref.objective, 1e-4 * std::max(1.0, std::abs(ref.objective)));
    EXPECT_LE((sol.x - ref.x).lpNorm<Eigen::Infinity>(), 1e-3);
    const auto k = kkt_residuals(p, sol.x, sol.y);
    EXPECT_LE(k.primal, 1e-5);
    EXPECT_LE(k.dual, 1e-4);
    EXPECT_LE(k.sign, 1e-8);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomQp, ::testing::Values(1u, 2u, 3u, 4u, 5u));

TEST(Admm, BoxConstrainedScalar) {
    // minimize (x - 3)^2 / 2 subject to x <= 1.
    qp::StandardQP p{sparse(Eigen::MatrixXd::Ones(1, 1)), Vector::Constant(1, -3.0), sparse(Eigen::MatrixXd::Ones(1, 1)),
                     Vector::Constant(1, -1e30), Vector::Constant(1, 1.0)};
    const auto sol = qp::solve(p);
    ASSERT_TRUE(sol.report.optimal());
    EXPECT_NEAR(sol.x[0], 1.0, 1e-6);
    EXPECT_NEAR(sol.y[0], 2.0, 1e-5);
    EXPECT_NEAR(sol.report.objective, -2.5, 1e-6);
}

TEST(Admm, LinearProgram) {
    // minimize -x - y subject to x + 2y <= 4, 3x + y <= 6, x, y >= 0: optimum (1.6, 1.2).
    Eigen::MatrixXd A(4, 2);
    A << 1, 2, 3, 1, 1, 0, 0, 1;
    const double inf = std::numeric_limits<double>::infinity();
    Vector l(4), u(4);
    l << -inf, -inf, 0, 0;
    u << 4, 6, inf, inf;
    qp::StandardQP p{SparseMatrix(2, 2), Vector::Constant(2, -1.0), sparse(A), l, u};
    const auto sol = qp::solve(p);
    ASSERT_TRUE(sol.report.optimal());
    EXPECT_NEAR(sol.x[0], 1.6, 1e-5);
    EXPECT_NEAR(sol.x[1], 1.2, 1e-5);
}

TEST(Admm, DetectsPrimalInfeasibility) {
    // x >= 1 and x <= 0.
    Eigen::MatrixXd A(2, 1);
    A << 1, 1;
    const double inf = std::numeric_limits<double>::infinity();
    Vector l(2), u(2);
    l << 1, -inf;
    u << inf, 0;
    qp::StandardQP p{sparse(Eigen::MatrixXd::Ones(1, 1)), Vector::Zero(1), sparse(A), l, u};
    EXPECT_EQ(qp::solve(p).report.status, qp::SolveStatus::PrimalInfeasible);
}

TEST(Admm, DetectsDualInfeasibility) {
    // minimize -x subject to x >= 0.
    const double inf = std::numeric_limits<double>::infinity();
    qp::StandardQP p{SparseMatrix(1, 1), Vector::Constant(1, -1.0), sparse(Eigen::MatrixXd::Ones(1, 1)),
                     Vector::Zero(1), Vector::Constant(1, inf)};
    EXPECT_EQ(qp::solve(p).report.status, qp::SolveStatus::DualInfeasible);
}

TEST(Admm, MaxIterationsReportsBestIterate) {
    const auto p = random_qp(7, 30, 20);
    qp::SolverSettings s;
    s.max_iter = 20;
    s.polish = false;
    const auto sol = qp::solve(p, s);
    EXPECT_EQ(sol.report.status, qp::SolveStatus::MaxIterations);
    EXPECT_EQ(sol.report.iterations, 20);
    EXPECT_TRUE(sol.x.allFinite());
}

TEST(Admm, HistoryRecordedAtChecks) {
    const auto p = random_qp(8, 20, 10);
    qp::SolverSettings s;
    s.polish = false;
    const auto sol = qp::solve(p, s);
    ASSERT_FALSE(sol.report.history.empty());
    for (const auto& h : sol.report.history) EXPECT_EQ(h.iteration % s.check_interval, 0);
    EXPECT_LE(sol.report.history.back().primal, sol.report.primal_tolerance * 1.0000001);
}

TEST(Admm, PolishTightensSolution) {
    const auto p = random_qp(9, 40, 30);
    qp::SolverSettings plain;
    plain.polish = false;
    const auto a = qp::solve(p, plain);
    const auto b = qp::solve(p);
    const auto ref = oracle::solve_ipm(oracle::from_standard(p));
    ASSERT_TRUE(a.report.optimal() && b.report.optimal());
    EXPECT_LE(std::abs(b.report.objective - ref.objective), std::abs(a.report.objective - ref.objective) + 1e-9);
}

TEST(Admm, DeterministicAcrossRuns) {
    const auto p = random_qp(10, 30, 20);
    const auto a = qp::solve(p);
    const auto b = qp::solve(p);
    EXPECT_EQ(a.report.iterations, b.report.iterations);
    EXPECT_EQ((a.x - b.x).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Settings, Validation) {
    qp::SolverSettings s;
    s.alpha = 2.0;
    EXPECT_THROW(s.validate(), Error);
    s = {};
    s.eps_abs = 0.0;
    EXPECT_THROW(s.validate(), Error);
    s = {};
    s.max_iter = 0;
    EXPECT_THROW(s.validate(), Error);
}

TEST(StandardQp, ValidateAndDump) {
    auto p = random_qp(11, 3, 4);
    EXPECT_NO_THROW(p.validate());
    std::ostringstream os;
    qp::write_qp(os, p);
    const std::string text = os.str();
    EXPECT_EQ(text.rfind("%StandardQP 3 4\n", 0), 0u);
    EXPECT_NE(text.find("\nq 3\n"), std::string::npos);
    EXPECT_NE(text.find("inf"), std::string::npos);

    auto bad = p;
    bad.l[0] = bad.u[0] + 1.0;
    EXPECT_THROW(bad.validate(), Error);
    bad = p;
    bad.P.coeffRef(0, 1) += 1.0;
    EXPECT_THROW(bad.validate(), Error);
}
