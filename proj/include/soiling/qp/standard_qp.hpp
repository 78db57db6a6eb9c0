#pragma once

// Standard-form convex QP
//
//     minimize    (1/2) z' P z + q' z
//     subject to  l <= A z <= u
//
// P is stored as a full symmetric sparse matrix.

#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>

#include <Eigen/SparseCore>
#include <fmt/format.h>

#include "soiling/error.hpp"

namespace soiling::qp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;

struct StandardQP {
    SparseMatrix P;
    Vector q;
    SparseMatrix A;
    Vector l;
    Vector u;

    Eigen::Index n() const { return q.size(); }
    Eigen::Index m() const { return l.size(); }

    double objective(const Vector& z) const { return 0.5 * z.dot(P * z) + q.dot(z); }

    /// Structural checks; P symmetry is checked exactly.
    void validate() const {
        if (P.rows() != n() || P.cols() != n()) throw Error("P must be n x n");
        if (A.cols() != n()) throw Error("A must have n columns");
        if (A.rows() != m() || u.size() != m()) throw Error("A, l, u row counts differ");
        for (Eigen::Index i = 0; i < m(); ++i) {
            if (std::isnan(l[i]) || std::isnan(u[i])) throw Error("NaN bound");
            if (l[i] > u[i]) throw Error(fmt::format("infeasible bounds at row {}", i));
        }
        const SparseMatrix asym = SparseMatrix(P.transpose()) - P;
        if (asym.norm() != 0.0) throw Error("P must be symmetric");
    }
};

namespace detail {
inline std::string bound_text(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", v);
}

inline void write_triplets(std::ostream& os, const char* name, const SparseMatrix& M) {
    os << fmt::format("{} {} {} {}\n", name, M.rows(), M.cols(), M.nonZeros());
    for (int k = 0; k < M.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(M, k); it; ++it)
            os << fmt::format("{} {} {:.17g}\n", it.row() + 1, it.col() + 1, it.value());
}

inline void write_vector(std::ostream& os, const char* name, const Vector& v) {
    os << fmt::format("{} {}\n", name, v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) os << bound_text(v[i]) << '\n';
}
}  // namespace detail

/// Text dump for cross-checking with external solvers:
///
///     %StandardQP n m
///     P <rows> <cols> <nnz>        then nnz lines "i j value" (1-based, full symmetric)
///     q <n>                        then n values
///     A <rows> <cols> <nnz>        then nnz lines "i j value" (1-based)
///     l <m>                        then m values ("-inf" / "inf" allowed)
///     u <m>                        then m values
inline void write_qp(std::ostream& os, const StandardQP& qp) {
    os << fmt::format("%StandardQP {} {}\n", qp.n(), qp.m());
    detail::write_triplets(os, "P", qp.P);
    detail::write_vector(os, "q", qp.q);
    detail::write_triplets(os, "A", qp.A);
    detail::write_vector(os, "l", qp.l);
    detail::write_vector(os, "u", qp.u);
}

}  // namespace soiling::qp
