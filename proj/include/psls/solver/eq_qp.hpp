#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "psls/solver/status.hpp"

namespace psls::solver {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// minimize 0.5 x'Hx + g'x  subject to  A_eq x = b_eq.
struct EqQP {
    Matrix H;
    Vector g;
    Matrix A_eq;
    Vector b_eq;
};

struct SparseEqQP {
    SparseMatrix H;  // full symmetric storage
    Vector g;
    SparseMatrix A_eq;
    Vector b_eq;
};

struct QPResult {
    Status status = Status::BadProblem;
    Vector x;
    Vector lambda;  // one multiplier per original equality row
    double objective = 0.0;
    double primal_residual = 0.0;  // max |A x - b|
    double dual_residual = 0.0;    // max |H x + g + A' lambda|
    int removed_rows = 0;
    bool regularized = false;
    std::vector<std::string> warnings;
};

namespace detail {

inline double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
inline double inf_norm(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline void finish(QPResult& res, const Matrix& h, const Vector& g, const Matrix& a, const Vector& b) {
    res.objective = 0.5 * res.x.dot(h * res.x) + g.dot(res.x);
    res.primal_residual = a.rows() ? inf_norm(Vector(a * res.x - b)) : 0.0;
    Vector stat = h * res.x + g;
    if (a.rows()) stat += a.transpose() * res.lambda;
    res.dual_residual = inf_norm(stat);
}

}  // namespace detail

inline constexpr double kRankThreshold = 1e-10;
inline constexpr double kRegularization = 1e-10;

// Dense KKT solve after removing linearly dependent equality rows with a
// column-pivoted QR of A_eq'.
inline QPResult solve_eq_qp(const EqQP& qp) {
    QPResult res;
    const auto nv = qp.H.rows();
    const auto ne = qp.A_eq.rows();
    if (qp.H.cols() != nv || qp.g.size() != nv || (ne > 0 && qp.A_eq.cols() != nv) || qp.b_eq.size() != ne) {
        res.warnings.push_back("dimension mismatch");
        return res;
    }
    const double hscale = std::max(1.0, detail::inf_norm(qp.H));
    if (detail::inf_norm(Matrix(qp.H - qp.H.transpose())) > 1e-12 * hscale) {
        res.warnings.push_back("H is not symmetric");
        return res;
    }
    if (nv > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(qp.H, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-9 * hscale) {
            res.warnings.push_back("H is not positive semidefinite");
            return res;
        }
    }

    std::vector<int> keep;
    if (ne > 0) {
        Eigen::ColPivHouseholderQR<Matrix> qr(qp.A_eq.transpose());
        qr.setThreshold(kRankThreshold);
        const auto rank = qr.rank();
        for (Eigen::Index i = 0; i < rank; ++i) keep.push_back(qr.colsPermutation().indices()(i));
        std::sort(keep.begin(), keep.end());
    }
    res.removed_rows = static_cast<int>(ne) - static_cast<int>(keep.size());
    const auto nk = static_cast<Eigen::Index>(keep.size());
    Matrix ar(nk, nv);
    Vector br(nk);
    for (Eigen::Index i = 0; i < nk; ++i) {
        ar.row(i) = qp.A_eq.row(keep[i]);
        br(i) = qp.b_eq(keep[i]);
    }

    auto solve_kkt = [&](double reg, Vector& x, Vector& lam) {
        Matrix kkt = Matrix::Zero(nv + nk, nv + nk);
        kkt.topLeftCorner(nv, nv) = qp.H + reg * Matrix::Identity(nv, nv);
        kkt.topRightCorner(nv, nk) = ar.transpose();
        kkt.bottomLeftCorner(nk, nv) = ar;
        Vector rhs(nv + nk);
        rhs << -qp.g, br;
        Eigen::PartialPivLU<Matrix> lu(kkt);
        const Vector sol = lu.solve(rhs);
        x = sol.head(nv);
        lam = sol.tail(nk);
        const double resid = detail::inf_norm(Vector(kkt * sol - rhs));
        return std::isfinite(resid) && lu.rcond() > 1e-14 &&
               resid <= 1e-9 * std::max(1.0, detail::inf_norm(rhs));
    };

    Vector x, lam;
    if (!solve_kkt(0.0, x, lam)) {
        res.regularized = true;
        res.warnings.push_back("KKT matrix numerically singular; added 1e-10 I to H");
        solve_kkt(kRegularization, x, lam);
    }
    res.x = x;
    res.lambda = Vector::Zero(ne);
    for (Eigen::Index i = 0; i < nk; ++i) res.lambda(keep[i]) = lam(i);
    detail::finish(res, qp.H, qp.g, qp.A_eq, qp.b_eq);

    const double bscale = std::max(1.0, detail::inf_norm(qp.b_eq));
    res.status = res.primal_residual <= 1e-8 * bscale ? Status::Optimal : Status::Infeasible;
    return res;
}

// Sparse KKT solve. The exact KKT system is factored first; when that fails
// (redundant rows, singular reduced Hessian) a quasi-definite regularization
// [[H + dI, A'], [A, -dI]] is factored instead and used as a preconditioner
// for iterative refinement on the exact system.
inline QPResult solve_sparse_eq_qp(const SparseEqQP& qp, double tol = 1e-9, int max_refine = 200) {
    QPResult res;
    const auto nv = qp.H.rows();
    const auto ne = qp.A_eq.rows();
    if (qp.H.cols() != nv || qp.g.size() != nv || qp.A_eq.cols() != nv || qp.b_eq.size() != ne) {
        res.warnings.push_back("dimension mismatch");
        return res;
    }

    auto build = [&](double reg) {
        std::vector<Triplet> trip;
        trip.reserve(qp.H.nonZeros() + 2 * qp.A_eq.nonZeros() + nv + ne);
        for (int k = 0; k < qp.H.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(qp.H, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
        for (int k = 0; k < qp.A_eq.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(qp.A_eq, k); it; ++it) {
                trip.emplace_back(nv + it.row(), it.col(), it.value());
                trip.emplace_back(it.col(), nv + it.row(), it.value());
            }
        if (reg > 0) {
            for (Eigen::Index i = 0; i < nv; ++i) trip.emplace_back(i, i, reg);
            for (Eigen::Index i = 0; i < ne; ++i) trip.emplace_back(nv + i, nv + i, -reg);
        }
        SparseMatrix k(nv + ne, nv + ne);
        k.setFromTriplets(trip.begin(), trip.end());
        k.makeCompressed();
        return k;
    };

    const SparseMatrix kkt = build(0.0);
    Vector rhs(nv + ne);
    rhs << -qp.g, qp.b_eq;
    const double rscale = std::max(1.0, detail::inf_norm(rhs));

    Vector sol = Vector::Zero(nv + ne);
    bool solved = false;
    {
        Eigen::SparseLU<SparseMatrix> lu;
        lu.analyzePattern(kkt);
        lu.factorize(kkt);
        if (lu.info() == Eigen::Success) {
            sol = lu.solve(rhs);
            for (int it = 0; it < 3; ++it) sol += lu.solve(Vector(rhs - kkt * sol));
            const double r = detail::inf_norm(Vector(kkt * sol - rhs));
            solved = std::isfinite(r) && r <= tol * rscale;
        }
    }
    if (!solved) {
        res.regularized = true;
        res.warnings.push_back("exact KKT factorization failed; using regularized KKT with iterative refinement");
        for (double reg : {1e-8, 1e-6}) {
            const SparseMatrix kreg = build(reg);
            Eigen::SparseLU<SparseMatrix> lu;
            lu.analyzePattern(kreg);
            lu.factorize(kreg);
            if (lu.info() != Eigen::Success) continue;
            sol.setZero();
            double prev = detail::inf_norm(rhs);
            for (int it = 0; it < max_refine; ++it) {
                const Vector r = rhs - kkt * sol;
                const double rn = detail::inf_norm(r);
                if (!std::isfinite(rn)) break;
                if (rn <= tol * rscale) {
                    solved = true;
                    break;
                }
                sol += lu.solve(r);
                if (it > 20 && rn > 0.999 * prev) break;  // stalled
                prev = rn;
            }
            if (solved) break;
        }
    }

    res.x = sol.head(nv);
    res.lambda = sol.tail(ne);
    res.objective = 0.5 * res.x.dot(qp.H * res.x) + qp.g.dot(res.x);
    res.primal_residual = ne ? detail::inf_norm(Vector(qp.A_eq * res.x - qp.b_eq)) : 0.0;
    res.dual_residual = detail::inf_norm(Vector(qp.H * res.x + qp.g + qp.A_eq.transpose() * res.lambda));
    const double bscale = std::max(1.0, detail::inf_norm(qp.b_eq));
    if (res.primal_residual > 1e-8 * bscale)
        res.status = Status::Infeasible;
    else
        res.status = Status::Optimal;
    return res;
}

inline SparseMatrix to_sparse(const Matrix& m) { return m.sparseView(0.0, 0.0); }

// Plain-text dump: header line, then each matrix row-major with its name and shape.
inline void write_matrix(std::ostream& os, const std::string& name, const Matrix& m) {
    os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    os.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
        os << '\n';
    }
}

inline void dump(std::ostream& os, const EqQP& qp) {
    os << "EQQP " << qp.H.rows() << ' ' << qp.A_eq.rows() << '\n';
    write_matrix(os, "H", qp.H);
    write_matrix(os, "g", Matrix(qp.g.transpose()));
    write_matrix(os, "A_eq", qp.A_eq);
    write_matrix(os, "b_eq", Matrix(qp.b_eq.transpose()));
}

}  // namespace psls::solver
