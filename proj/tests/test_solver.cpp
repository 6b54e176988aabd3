#include <algorithm>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "psls/solver/eq_qp.hpp"
#include "psls/solver/lp.hpp"
#include "test_util.hpp"

using namespace psls;
using namespace psls::solver;
using psls::testing::random_matrix;

namespace {

// Null-space method: x = x0 + N z with A x0 = b, A N = 0.
Vector null_space_qp_oracle(const EqQP& qp) {
    const Vector x0 = qp.A_eq.completeOrthogonalDecomposition().solve(qp.b_eq);
    Eigen::JacobiSVD<Matrix> svd(qp.A_eq, Eigen::ComputeFullV);
    const auto rank = (svd.singularValues().array() > 1e-10).count();
    const Matrix n = svd.matrixV().rightCols(qp.A_eq.cols() - rank);
    const Matrix red = n.transpose() * qp.H * n;
    const Vector z = red.ldlt().solve(-n.transpose() * (qp.H * x0 + qp.g));
    return x0 + n * z;
}

EqQP random_qp(std::mt19937_64& rng, int nv, int ne) {
    const Matrix r = random_matrix(rng, nv, nv);
    EqQP qp;
    qp.H = r.transpose() * r + 0.1 * Matrix::Identity(nv, nv);
    qp.g = random_matrix(rng, nv, 1);
    qp.A_eq = random_matrix(rng, ne, nv);
    qp.b_eq = random_matrix(rng, ne, 1);
    return qp;
}

// Enumerates basic solutions of  min c'x, A x = b, x >= 0.
double vertex_enumeration(const Matrix& a, const Vector& b, const Vector& c) {
    const int m = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;
    for (;;) {
        Matrix bm(m, m);
        for (int i = 0; i < m; ++i) bm.col(i) = a.col(idx[i]);
        Eigen::FullPivLU<Matrix> lu(bm);
        if (lu.isInvertible()) {
            const Vector xb = lu.solve(b);
            if (xb.minCoeff() >= -1e-10) {
                double obj = 0.0;
                for (int i = 0; i < m; ++i) obj += c(idx[i]) * xb(i);
                best = std::min(best, obj);
            }
        }
        int k = m - 1;
        while (k >= 0 && idx[k] == n - m + k) --k;
        if (k < 0) break;
        ++idx[k];
        for (int i = k + 1; i < m; ++i) idx[i] = idx[i - 1] + 1;
    }
    return best;
}

}  // namespace

TEST(EqQP, ScalarFixed) {
    EqQP qp{Matrix::Constant(1, 1, 2.0), Vector::Zero(1), Matrix::Ones(1, 1), Vector::Ones(1)};
    const auto r = solve_eq_qp(qp);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.x(0), 1.0, 1e-12);
}

TEST(EqQP, SymmetricSplit) {
    EqQP qp{2.0 * Matrix::Identity(2, 2), Vector::Zero(2), Matrix::Ones(1, 2), Vector::Constant(1, 2.0)};
    const auto r = solve_eq_qp(qp);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.x(0), 1.0, 1e-12);
    EXPECT_NEAR(r.x(1), 1.0, 1e-12);
}

TEST(EqQP, MatchesNullSpaceOracle) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 25; ++trial) {
        const auto qp = random_qp(rng, 20, 8);
        const auto r = solve_eq_qp(qp);
        ASSERT_EQ(r.status, Status::Optimal);
        EXPECT_LT((r.x - null_space_qp_oracle(qp)).cwiseAbs().maxCoeff(), 1e-7);
        EXPECT_LT(r.primal_residual, 1e-8);
        EXPECT_LT(r.dual_residual, 1e-8);
    }
}

TEST(EqQP, OptimalityCertificateAgainstFeasiblePoints) {
    std::mt19937_64 rng(22);
    const auto qp = random_qp(rng, 12, 5);
    const auto r = solve_eq_qp(qp);
    ASSERT_EQ(r.status, Status::Optimal);
    Eigen::JacobiSVD<Matrix> svd(qp.A_eq, Eigen::ComputeFullV);
    const Matrix n = svd.matrixV().rightCols(7);
    for (int k = 0; k < 100; ++k) {
        const Vector y = r.x + n * random_matrix(rng, 7, 1);
        const double fy = 0.5 * y.dot(qp.H * y) + qp.g.dot(y);
        EXPECT_LE(r.objective, fy + 1e-7 * std::max(1.0, std::abs(fy)));
    }
}

TEST(EqQP, RedundantRowsAreRemoved) {
    std::mt19937_64 rng(23);
    auto qp = random_qp(rng, 10, 3);
    Matrix a(5, 10);
    a << qp.A_eq, qp.A_eq.row(0) + qp.A_eq.row(1), 2.0 * qp.A_eq.row(2);
    Vector b(5);
    b << qp.b_eq, qp.b_eq(0) + qp.b_eq(1), 2.0 * qp.b_eq(2);
    const auto base = solve_eq_qp(qp);
    qp.A_eq = a;
    qp.b_eq = b;
    const auto r = solve_eq_qp(qp);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_EQ(r.removed_rows, 2);
    EXPECT_LT((r.x - base.x).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(EqQP, InconsistentSystemIsInfeasible) {
    EqQP qp{Matrix::Identity(2, 2), Vector::Zero(2), Matrix::Ones(2, 2), Vector(2)};
    qp.b_eq << 1.0, 2.0;
    EXPECT_EQ(solve_eq_qp(qp).status, Status::Infeasible);
}

TEST(EqQP, IndefiniteHessianIsBadProblem) {
    Matrix h(2, 2);
    h << 1, 0, 0, -1;
    EqQP qp{h, Vector::Zero(2), Matrix::Zero(0, 2), Vector::Zero(0)};
    EXPECT_EQ(solve_eq_qp(qp).status, Status::BadProblem);
}

TEST(EqQP, SingularHessianFallsBackToRegularization) {
    EqQP qp{Matrix::Zero(3, 3), Vector::Zero(3), Matrix::Ones(1, 3), Vector::Ones(1)};
    const auto r = solve_eq_qp(qp);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_TRUE(r.regularized);
    EXPECT_NEAR(r.objective, 0.0, 1e-12);
}

TEST(SparseEqQP, MatchesDense) {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 10; ++trial) {
        const auto qp = random_qp(rng, 20, 8);
        const auto dense = solve_eq_qp(qp);
        const auto sparse = solve_sparse_eq_qp({to_sparse(qp.H), qp.g, to_sparse(qp.A_eq), qp.b_eq});
        ASSERT_EQ(sparse.status, Status::Optimal);
        EXPECT_LT((sparse.x - dense.x).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(SparseEqQP, RedundantAndSingularSystems) {
    Matrix a(3, 4);
    a << 1, 1, 0, 0, 0, 0, 1, 1, 1, 1, 0, 0;
    Vector b(3);
    b << 1, 2, 1;
    const auto r = solve_sparse_eq_qp({SparseMatrix(4, 4), Vector::Zero(4), to_sparse(a), b});
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_LT(r.primal_residual, 1e-9);
    b(2) = 3.0;
    EXPECT_EQ(solve_sparse_eq_qp({SparseMatrix(4, 4), Vector::Zero(4), to_sparse(a), b}).status, Status::Infeasible);
}

TEST(LP, SingleBoundedVariable) {
    DenseLP lp;
    lp.c = Vector::Constant(1, -1.0);
    lp.A_ub = Matrix::Ones(1, 1);
    lp.b_ub = Vector::Ones(1);
    const auto r = solve_lp(lp);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.x(0), 1.0, 1e-12);
    EXPECT_NEAR(r.objective, -1.0, 1e-12);
}

TEST(LP, EpigraphOfAbsoluteValue) {
    // variables (a, t); a fixed to 3, |a| <= t.
    DenseLP lp;
    lp.c = Vector(2);
    lp.c << 0, 1;
    lp.A_eq = Matrix(1, 2);
    lp.A_eq << 1, 0;
    lp.b_eq = Vector::Constant(1, 3.0);
    lp.A_ub = Matrix(2, 2);
    lp.A_ub << 1, -1, -1, -1;
    lp.b_ub = Vector::Zero(2);
    lp.free = {true, true};
    const auto r = solve_lp(lp);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.x(1), 3.0, 1e-12);
}

TEST(LP, MatchesVertexEnumeration) {
    std::mt19937_64 rng(31);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int nv = 30;
        const int meq = psls::testing::uniform_int(rng, 1, 4);
        // Feasible by construction: b = A x0 with x0 >= 0; bounded by sum(x) <= 10.
        Matrix a = random_matrix(rng, meq, nv);
        Vector x0 = random_matrix(rng, nv, 1).cwiseAbs() * 0.2;
        DenseLP lp;
        lp.c = random_matrix(rng, nv, 1);
        lp.A_eq = a;
        lp.b_eq = a * x0;
        lp.A_ub = Matrix::Ones(1, nv);
        lp.b_ub = Vector::Constant(1, 10.0);
        const auto r = solve_lp(lp);
        ASSERT_EQ(r.status, Status::Optimal);
        Matrix std_a(meq + 1, nv + 1);
        std_a << a, Matrix::Zero(meq, 1), Matrix::Ones(1, nv), Matrix::Ones(1, 1);
        Vector std_b(meq + 1);
        std_b << lp.b_eq, 10.0;
        Vector std_c(nv + 1);
        std_c << lp.c, 0.0;
        EXPECT_NEAR(r.objective, vertex_enumeration(std_a, std_b, std_c), 1e-7);
        EXPECT_LT(r.primal_residual, 1e-8);
        EXPECT_GE(r.x.minCoeff(), 0.0);
        ++checked;
    }
    EXPECT_EQ(checked, 40);
}

TEST(LP, StrongDualityCertificate) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 20; ++trial) {
        const int nv = 25, meq = 6;
        Matrix a = random_matrix(rng, meq, nv);
        Vector x0 = random_matrix(rng, nv, 1).cwiseAbs();
        DenseLP lp;
        lp.c = random_matrix(rng, nv, 1).cwiseAbs() + Vector::Constant(nv, 0.1);
        lp.A_eq = a;
        lp.b_eq = a * x0;
        const auto r = solve_lp(lp);
        ASSERT_EQ(r.status, Status::Optimal);
        EXPECT_NEAR(r.objective, lp.b_eq.dot(r.y_eq), 1e-7 * std::max(1.0, std::abs(r.objective)));
        const Vector reduced = lp.c - a.transpose() * r.y_eq;
        EXPECT_GE(reduced.minCoeff(), -1e-8);
    }
}

TEST(LP, DetectsInfeasibleAndUnbounded) {
    DenseLP inf;
    inf.c = Vector::Ones(1);
    inf.A_eq = Matrix::Ones(1, 1);
    inf.b_eq = Vector::Constant(1, -1.0);
    EXPECT_EQ(solve_lp(inf).status, Status::Infeasible);

    DenseLP unb;
    unb.c = Vector::Constant(2, -1.0);
    unb.A_eq = Matrix(1, 2);
    unb.A_eq << 1, -1;
    unb.b_eq = Vector::Zero(1);
    EXPECT_EQ(solve_lp(unb).status, Status::Unbounded);
}

TEST(LP, RedundantEqualityRows) {
    DenseLP lp;
    lp.c = Vector(3);
    lp.c << 1, 2, 3;
    lp.A_eq = Matrix(3, 3);
    lp.A_eq << 1, 1, 1, 2, 2, 2, 0, 1, 1;
    lp.b_eq = Vector(3);
    lp.b_eq << 2, 4, 1;
    const auto r = solve_lp(lp);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.objective, 1.0 + 2.0, 1e-10);
    EXPECT_EQ(r.redundant_rows, 1);
}

TEST(LP, Deterministic) {
    std::mt19937_64 rng(33);
    DenseLP lp;
    lp.c = random_matrix(rng, 20, 1);
    lp.A_eq = random_matrix(rng, 5, 20);
    lp.b_eq = lp.A_eq * random_matrix(rng, 20, 1).cwiseAbs();
    lp.A_ub = Matrix::Ones(1, 20);
    lp.b_ub = Vector::Constant(1, 50.0);
    const auto r1 = solve_lp(lp);
    const auto r2 = solve_lp(lp);
    ASSERT_EQ(r1.status, Status::Optimal);
    EXPECT_EQ(r1.x, r2.x);
    EXPECT_EQ(r1.objective, r2.objective);
}

TEST(LP, FreeVariablesAndHint) {
    // min |x1 - 2| + |x2 + 1| via split residuals; x free.
    LinearProgram lp;
    lp.c = Vector(6);
    lp.c << 0, 0, 1, 1, 1, 1;
    Matrix a(2, 6);
    a << 1, 0, -1, 1, 0, 0, 0, 1, 0, 0, -1, 1;
    lp.A_eq = to_sparse(a);
    lp.b_eq = Vector(2);
    lp.b_eq << 2, -1;
    lp.A_ub = SparseMatrix(0, 6);
    lp.b_ub = Vector(0);
    lp.free = {true, true, false, false, false, false};
    lp.basis_hint = {{0, 0}, {1, 1}};
    const auto r = solve_lp(lp);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_TRUE(r.used_hint);
    EXPECT_NEAR(r.objective, 0.0, 1e-12);
    EXPECT_NEAR(r.x(0), 2.0, 1e-12);
    EXPECT_NEAR(r.x(1), -1.0, 1e-12);
}
