#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "psls/solver/eq_qp.hpp"
#include "psls/solver/status.hpp"

namespace psls::solver {

// minimize c'x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x_j >= 0 unless free[j].
struct LinearProgram {
    Vector c;
    SparseMatrix A_eq;
    Vector b_eq;
    SparseMatrix A_ub;
    Vector b_ub;
    std::vector<bool> free;  // empty means all variables are non-negative
    // Optional starting basis: (row, structural column) pairs. Rows index the
    // stacked [A_eq; A_ub] system. Ignored if it does not yield a feasible
    // nonsingular start.
    std::vector<std::pair<int, int>> basis_hint;

    [[nodiscard]] Eigen::Index variables() const { return c.size(); }
};

struct DenseLP {
    Vector c;
    Matrix A_eq;
    Vector b_eq;
    Matrix A_ub;
    Vector b_ub;
    std::vector<bool> free;

    [[nodiscard]] LinearProgram to_sparse() const {
        const auto nv = c.size();
        LinearProgram lp;
        lp.c = c;
        lp.A_eq = A_eq.rows() ? SparseMatrix(A_eq.sparseView(0.0, 0.0)) : SparseMatrix(0, nv);
        lp.b_eq = A_eq.rows() ? b_eq : Vector(0);
        lp.A_ub = A_ub.rows() ? SparseMatrix(A_ub.sparseView(0.0, 0.0)) : SparseMatrix(0, nv);
        lp.b_ub = A_ub.rows() ? b_ub : Vector(0);
        lp.free = free;
        return lp;
    }
};

struct LPResult {
    Status status = Status::BadProblem;
    Vector x;
    double objective = 0.0;
    Vector y_eq;  // simplex multipliers for equality rows
    Vector y_ub;  // for inequality rows (<= 0 at optimality)
    double primal_residual = 0.0;
    int iterations = 0;
    int phase1_iterations = 0;
    int redundant_rows = 0;
    bool used_hint = false;
};

namespace detail {

// Bounded revised simplex over  A x = b  with every nonbasic variable held at
// zero. Lower bounds are 0 or -inf, upper bounds +inf or 0.
class RevisedSimplex {
public:
    struct Options {
        int refactor_every = 64;
        int degenerate_switch = 50;  // consecutive degenerate pivots before Bland's rule
        double pivot_tol = 1e-9;
        double feas_tol = 1e-9;
        double opt_tol = 1e-9;
        long max_iterations = 0;  // 0: automatic
    };

    RevisedSimplex(SparseMatrix a, Vector b, std::vector<char> lower_free, std::vector<char> upper_zero,
                   Options opt)
        : a_(std::move(a)), b_(std::move(b)), lower_free_(std::move(lower_free)), upper_zero_(std::move(upper_zero)),
          opt_(opt) {
        m_ = static_cast<int>(a_.rows());
        n_ = static_cast<int>(a_.cols());
        excluded_.assign(n_, 0);
        is_basic_.assign(n_, -1);
    }

    int rows() const { return m_; }
    int cols() const { return n_; }
    const std::vector<int>& basis() const { return basis_; }
    const Vector& basic_values() const { return xb_; }
    long iterations() const { return iterations_; }

    void exclude(int j) { excluded_[j] = 1; }
    void set_upper_zero(int j) { upper_zero_[j] = 1; }
    bool is_basic(int j) const { return is_basic_[j] >= 0; }
    int basic_position(int j) const { return is_basic_[j]; }

    // Installs a basis; returns false if B is singular.
    bool set_basis(std::vector<int> basis) {
        basis_ = std::move(basis);
        std::fill(is_basic_.begin(), is_basic_.end(), -1);
        for (int i = 0; i < m_; ++i) is_basic_[basis_[i]] = i;
        return refactor();
    }

    // Column j of the constraint matrix.
    void column(int j, Vector& out) const {
        out.setZero(m_);
        for (SparseMatrix::InnerIterator it(a_, j); it; ++it) out(it.row()) = it.value();
    }

    void negate_column(int j) { a_.col(j) *= -1.0; }

    void ftran(Vector& v) const {
        v = lu_.solve(v).eval();
        for (const auto& e : etas_) {
            const double pr = v(e.pos) / e.pivot;
            if (pr == 0.0) {
                v(e.pos) = 0.0;
                continue;
            }
            for (const auto& [i, val] : e.entries) v(i) -= val * pr;
            v(e.pos) = pr;
        }
    }

    void btran(Vector& v) const {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = v(it->pos);
            for (const auto& [i, val] : it->entries) s -= val * v(i);
            v(it->pos) = s / it->pivot;
        }
        v = lu_.transpose().solve(v).eval();
    }

    // Runs simplex iterations for cost vector c. Returns Optimal, Unbounded,
    // Infeasible (dual cleanup failed) or IterationLimit.
    //
    // After a run of degenerate pivots the basic values are shifted once by a
    // small deterministic amount (equivalently b is perturbed). At optimality
    // the original b is restored and any resulting primal infeasibility is
    // removed with dual simplex pivots, which keep the basis dual feasible.
    Status optimize(const Vector& c) {
        const long cap = opt_.max_iterations > 0 ? opt_.max_iterations : 20L * (m_ + n_) + 1000;
        const double cscale = std::max(1.0, c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
        const Vector b_orig = b_;
        bool perturbed = false, may_perturb = true;
        Vector y(m_), alpha(m_);
        int degenerate_run = 0;
        bool bland = false;
        std::vector<char> skipped(n_, 0);
        for (;;) {
            if (iterations_ >= cap) {
                restore_rhs(b_orig, perturbed);
                return Status::IterationLimit;
            }
            for (int i = 0; i < m_; ++i) y(i) = c(basis_[i]);
            btran(y);

            // Pricing.
            int enter = -1;
            double best = 0.0;
            int dir = 0;
            for (int j = 0; j < n_; ++j) {
                if (is_basic_[j] >= 0 || excluded_[j] || skipped[j]) continue;
                double d = c(j);
                for (SparseMatrix::InnerIterator it(a_, j); it; ++it) d -= it.value() * y(it.row());
                int jdir = 0;
                if (d < -opt_.opt_tol * cscale && !upper_zero_[j]) jdir = 1;
                else if (d > opt_.opt_tol * cscale && lower_free_[j]) jdir = -1;
                if (!jdir) continue;
                if (bland) {
                    enter = j;
                    dir = jdir;
                    break;
                }
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    enter = j;
                    dir = jdir;
                }
            }
            if (enter < 0) {
                if (!perturbed) return Status::Optimal;
                perturbed = false;
                may_perturb = false;
                restore_rhs(b_orig, true);
                const Status s = dual_cleanup(c, cap);
                if (s != Status::Optimal) return s;
                std::fill(skipped.begin(), skipped.end(), 0);
                bland = false;
                degenerate_run = 0;
                continue;  // confirm optimality for the original b
            }

            column(enter, alpha);
            ftran(alpha);

            // Ratio test; basic i changes by -dir * alpha_i per unit step.
            const double atol = opt_.pivot_tol * std::max(1.0, alpha.cwiseAbs().maxCoeff());
            int leave = -1;
            double theta = std::numeric_limits<double>::infinity();
            for (int pass = 0; pass < 2; ++pass) {
                for (int i = 0; i < m_; ++i) {
                    const double delta = -dir * alpha(i);
                    if (std::abs(delta) <= atol) continue;
                    const int var = basis_[i];
                    double ti;
                    if (delta < 0 && !lower_free_[var]) ti = std::max(xb_(i), 0.0) / -delta;
                    else if (delta > 0 && upper_zero_[var]) ti = std::max(-xb_(i), 0.0) / delta;
                    else continue;
                    if (pass == 0) {
                        theta = std::min(theta, ti);
                    } else if (ti <= theta + 1e-12) {
                        if (leave < 0) {
                            leave = i;
                        } else if (bland ? basis_[i] < basis_[leave] : std::abs(alpha(i)) > std::abs(alpha(leave))) {
                            leave = i;
                        }
                    }
                }
                if (!std::isfinite(theta)) break;
            }
            if (!std::isfinite(theta)) {
                // Confirm the direction with the ftran column, dropping the
                // same negligible entries the ratio test ignores; otherwise
                // accumulated rounding can report a spurious improving column.
                double d = c(enter);
                for (int i = 0; i < m_; ++i)
                    if (std::abs(alpha(i)) > atol) d -= c(basis_[i]) * alpha(i);
                if (dir * d < -opt_.opt_tol * cscale) {
                    restore_rhs(b_orig, perturbed);
                    return Status::Unbounded;
                }
                skipped[enter] = 1;
                if (!refactor()) return Status::BadProblem;
                continue;
            }
            std::fill(skipped.begin(), skipped.end(), 0);

            const double step = theta;
            if (!apply_pivot(enter, leave, alpha, dir * step)) return Status::BadProblem;

            if (step <= 1e-12) {
                ++degenerate_run;
                if (degenerate_run > opt_.degenerate_switch) {
                    if (may_perturb && !perturbed) {
                        perturb();
                        perturbed = true;
                        degenerate_run = 0;
                    } else {
                        bland = true;
                    }
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }
    }

    // Dual simplex pivots from a dual feasible basis until the basic values
    // are within their bounds.
    Status dual_cleanup(const Vector& c, long cap) {
        const double cscale = std::max(1.0, c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
        const double bscale = std::max(1.0, b_.size() ? b_.cwiseAbs().maxCoeff() : 0.0);
        Vector y(m_), rho(m_), alpha(m_);
        for (;;) {
            if (iterations_ >= cap) return Status::IterationLimit;
            int r = -1;
            double worst = opt_.feas_tol * bscale;
            for (int i = 0; i < m_; ++i) {
                const int var = basis_[i];
                double viol = 0.0;
                if (!lower_free_[var] && xb_(i) < 0.0) viol = -xb_(i);
                if (upper_zero_[var] && xb_(i) > 0.0) viol = xb_(i);
                if (viol > worst) {
                    worst = viol;
                    r = i;
                }
            }
            if (r < 0) return Status::Optimal;
            const bool increase = xb_(r) < 0.0;

            for (int i = 0; i < m_; ++i) y(i) = c(basis_[i]);
            btran(y);
            rho.setZero();
            rho(r) = 1.0;
            btran(rho);
            const double rtol = opt_.pivot_tol * std::max(1.0, rho.cwiseAbs().maxCoeff());

            int enter = -1;
            double best_ratio = std::numeric_limits<double>::infinity(), best_alpha = 0.0;
            for (int j = 0; j < n_; ++j) {
                if (is_basic_[j] >= 0 || excluded_[j]) continue;
                double arj = 0.0, d = c(j);
                for (SparseMatrix::InnerIterator it(a_, j); it; ++it) {
                    arj += it.value() * rho(it.row());
                    d -= it.value() * y(it.row());
                }
                if (std::abs(arj) <= rtol) continue;
                // x_r moves by -arj per unit increase of x_j.
                const bool up_helps = increase ? arj < 0.0 : arj > 0.0;
                double ratio;
                if (up_helps && !upper_zero_[j]) ratio = std::max(d, 0.0) / std::abs(arj);
                else if (!up_helps && lower_free_[j]) ratio = std::max(-d, 0.0) / std::abs(arj);
                else continue;
                if (ratio < best_ratio - 1e-12 * cscale ||
                    (ratio <= best_ratio + 1e-12 * cscale && std::abs(arj) > best_alpha)) {
                    best_ratio = std::min(best_ratio, ratio);
                    best_alpha = std::abs(arj);
                    enter = j;
                }
            }
            if (enter < 0) return Status::Infeasible;

            column(enter, alpha);
            ftran(alpha);
            if (std::abs(alpha(r)) <= opt_.pivot_tol) return Status::BadProblem;
            const double xj = xb_(r) / alpha(r);  // value that brings x_r to zero
            if (!apply_pivot(enter, r, alpha, xj)) return Status::BadProblem;
        }
    }

    // Swaps `enter` into basis position `leave`; the entering variable takes value xj.
    bool apply_pivot(int enter, int leave, const Vector& alpha, double xj) {
        xb_ -= xj * alpha;
        xb_(leave) = xj;
        const int out = basis_[leave];
        is_basic_[out] = -1;
        basis_[leave] = enter;
        is_basic_[enter] = leave;
        ++iterations_;
        Eta e;
        e.pos = leave;
        e.pivot = alpha(leave);
        for (int i = 0; i < m_; ++i)
            if (i != leave && alpha(i) != 0.0) e.entries.emplace_back(i, alpha(i));
        etas_.push_back(std::move(e));
        if (static_cast<int>(etas_.size()) >= opt_.refactor_every) return refactor();
        return true;
    }

    // Shifts every bounded basic value into the interior by a small
    // deterministic amount: b += B s.
    void perturb() {
        const double scale = std::max(1.0, b_.size() ? b_.cwiseAbs().maxCoeff() : 0.0);
        Vector shift = Vector::Zero(m_);
        for (int i = 0; i < m_; ++i) {
            const int var = basis_[i];
            if (lower_free_[var] || upper_zero_[var]) continue;
            const double frac = static_cast<double>((static_cast<unsigned>(i) * 2654435761u) % 1000u) / 1000.0;
            shift(i) = 1e-6 * scale * (1.0 + frac);
        }
        for (int i = 0; i < m_; ++i)
            if (shift(i) != 0.0)
                for (SparseMatrix::InnerIterator it(a_, basis_[i]); it; ++it) b_(it.row()) += it.value() * shift(i);
        xb_ += shift;
    }

    void restore_rhs(const Vector& b, bool changed) {
        if (!changed) return;
        b_ = b;
        refactor();
    }

    // Row `pos` of B^{-1} A over nonbasic, non-excluded columns: the best pivot
    // column to swap out the basic variable at `pos`, or -1.
    int best_row_pivot(int pos, double tol) const {
        Vector rho = Vector::Zero(m_);
        rho(pos) = 1.0;
        btran(rho);
        int best = -1;
        double bv = tol;
        for (int j = 0; j < n_; ++j) {
            if (is_basic_[j] >= 0 || excluded_[j]) continue;
            double v = 0.0;
            for (SparseMatrix::InnerIterator it(a_, j); it; ++it) v += it.value() * rho(it.row());
            if (std::abs(v) > bv) {
                bv = std::abs(v);
                best = j;
            }
        }
        return best;
    }

    // Degenerate pivot of column `enter` into position `pos`.
    bool pivot_in(int enter, int pos) {
        Vector alpha(m_);
        column(enter, alpha);
        ftran(alpha);
        const int out = basis_[pos];
        is_basic_[out] = -1;
        basis_[pos] = enter;
        is_basic_[enter] = pos;
        Eta e;
        e.pos = pos;
        e.pivot = alpha(pos);
        for (int i = 0; i < m_; ++i)
            if (i != pos && alpha(i) != 0.0) e.entries.emplace_back(i, alpha(i));
        etas_.push_back(std::move(e));
        // Values are unchanged in exact arithmetic (the leaving variable is at zero).
        if (static_cast<int>(etas_.size()) >= opt_.refactor_every) return refactor();
        return true;
    }

    bool refactor() {
        std::vector<Triplet> trip;
        for (int i = 0; i < m_; ++i)
            for (SparseMatrix::InnerIterator it(a_, basis_[i]); it; ++it) trip.emplace_back(it.row(), i, it.value());
        bmat_.resize(m_, m_);
        bmat_.setFromTriplets(trip.begin(), trip.end());
        bmat_.makeCompressed();
        lu_.analyzePattern(bmat_);
        lu_.factorize(bmat_);
        etas_.clear();
        if (lu_.info() != Eigen::Success) return false;
        xb_ = lu_.solve(b_);
        return xb_.allFinite();
    }

private:
    struct Eta {
        int pos = 0;
        double pivot = 1.0;
        std::vector<std::pair<int, double>> entries;
    };

    SparseMatrix a_;
    Vector b_;
    std::vector<char> lower_free_;
    std::vector<char> upper_zero_;
    Options opt_;
    int m_ = 0, n_ = 0;
    std::vector<int> basis_;
    std::vector<int> is_basic_;
    std::vector<char> excluded_;
    SparseMatrix bmat_;
    mutable Eigen::SparseLU<SparseMatrix> lu_;
    std::vector<Eta> etas_;
    Vector xb_;
    long iterations_ = 0;
};

}  // namespace detail

// Two-phase bounded revised simplex. Dantzig pricing with a switch to Bland's
// rule during long runs of degenerate pivots; fully deterministic.
inline LPResult solve_lp(const LinearProgram& lp) {
    LPResult res;
    const int nv = static_cast<int>(lp.c.size());
    const int meq = static_cast<int>(lp.A_eq.rows());
    const int mub = static_cast<int>(lp.A_ub.rows());
    const int m = meq + mub;
    if ((meq && lp.A_eq.cols() != nv) || (mub && lp.A_ub.cols() != nv) || lp.b_eq.size() != meq ||
        lp.b_ub.size() != mub || (!lp.free.empty() && static_cast<int>(lp.free.size()) != nv))
        return res;

    // Columns: structural | slacks (one per <= row) | artificials (one per row).
    const int ns = nv + mub;
    const int ntot = ns + m;
    std::vector<Triplet> trip;
    trip.reserve(lp.A_eq.nonZeros() + lp.A_ub.nonZeros() + mub + m);
    for (int k = 0; k < lp.A_eq.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(lp.A_eq, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < lp.A_ub.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(lp.A_ub, k); it; ++it)
            trip.emplace_back(meq + it.row(), it.col(), it.value());
    for (int i = 0; i < mub; ++i) trip.emplace_back(meq + i, nv + i, 1.0);
    for (int i = 0; i < m; ++i) trip.emplace_back(i, ns + i, 1.0);
    SparseMatrix a(m, ntot);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    Vector b(m);
    b << lp.b_eq, lp.b_ub;

    std::vector<char> lower_free(ntot, 0), upper_zero(ntot, 0);
    for (int j = 0; j < nv; ++j) lower_free[j] = !lp.free.empty() && lp.free[j];

    detail::RevisedSimplex::Options opt;
    detail::RevisedSimplex sx(a, b, lower_free, upper_zero, opt);

    // Starting basis: hinted structural columns, slacks on <= rows, artificials elsewhere.
    auto default_basis = [&] {
        std::vector<int> basis(m);
        for (int i = 0; i < m; ++i) basis[i] = i >= meq ? nv + (i - meq) : ns + i;
        return basis;
    };
    std::vector<int> basis = default_basis();
    bool hinted = false;
    if (!lp.basis_hint.empty()) {
        std::vector<int> hb = basis;
        std::vector<char> used(nv, 0);
        bool ok = true;
        for (const auto& [row, col] : lp.basis_hint) {
            if (row < 0 || row >= m || col < 0 || col >= nv || used[col]) {
                ok = false;
                break;
            }
            used[col] = 1;
            hb[row] = col;
        }
        if (ok && sx.set_basis(hb)) {
            bool feasible = true;
            for (int i = 0; i < m; ++i) {
                const int v = hb[i];
                if (v < nv && !lower_free[v] && sx.basic_values()(i) < -1e-9) feasible = false;
            }
            if (feasible) {
                basis = hb;
                hinted = true;
            }
        }
    }
    if (!sx.set_basis(basis)) {
        basis = default_basis();
        hinted = false;
        if (!sx.set_basis(basis)) return res;
    }
    res.used_hint = hinted;

    // Make every basic artificial/slack non-negative by flipping or swapping to
    // a sign-adjusted artificial.
    {
        bool changed = false;
        for (int i = 0; i < m; ++i) {
            const int v = basis[i];
            const double val = sx.basic_values()(i);
            if (val >= 0.0) continue;
            if (v >= ns) {
                sx.negate_column(v);
                changed = true;
            } else if (v >= nv) {
                const int art = ns + (v - nv + meq);
                sx.negate_column(art);
                basis[i] = art;
                changed = true;
            } else if (!lower_free[v]) {
                // Structural hint slightly negative: clamp via refactor below.
            }
        }
        if (changed && !sx.set_basis(basis)) return res;
    }
    for (int i = 0; i < m; ++i)
        if (!sx.is_basic(ns + i)) sx.exclude(ns + i);

    // Phase 1.
    Vector c1 = Vector::Zero(ntot);
    bool any_art = false;
    for (int i = 0; i < m; ++i)
        if (sx.is_basic(ns + i)) {
            c1(ns + i) = 1.0;
            any_art = true;
        }
    const double bscale = std::max(1.0, b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
    if (any_art) {
        const Status s1 = sx.optimize(c1);
        res.phase1_iterations = static_cast<int>(sx.iterations());
        if (s1 != Status::Optimal) {
            res.status = s1 == Status::Unbounded ? Status::BadProblem : s1;
            return res;
        }
        double infeas = 0.0;
        for (int i = 0; i < m; ++i)
            if (sx.basis()[i] >= ns) infeas += std::abs(sx.basic_values()(i));
        if (infeas > 1e-8 * bscale) {
            res.status = Status::Infeasible;
            res.iterations = static_cast<int>(sx.iterations());
            return res;
        }
        // Drive remaining artificials out of the basis; those that cannot
        // leave belong to redundant rows and are pinned at zero.
        for (int j = ns; j < ntot; ++j)
            if (!sx.is_basic(j)) sx.exclude(j);
        for (int j = ns; j < ntot; ++j) {
            if (!sx.is_basic(j)) continue;
            const int pos = sx.basic_position(j);
            const int enter = sx.best_row_pivot(pos, 1e-7);
            if (enter >= 0) {
                if (!sx.pivot_in(enter, pos)) return res;
                sx.exclude(j);
            } else {
                sx.set_upper_zero(j);
                ++res.redundant_rows;
            }
        }
        if (!sx.refactor()) return res;
    }

    // Phase 2.
    Vector c2 = Vector::Zero(ntot);
    c2.head(nv) = lp.c;
    const Status s2 = sx.optimize(c2);
    res.iterations = static_cast<int>(sx.iterations());
    if (s2 != Status::Optimal) {
        res.status = s2;
        return res;
    }
    if (!sx.refactor()) return res;

    Vector xfull = Vector::Zero(ntot);
    for (int i = 0; i < m; ++i) xfull(sx.basis()[i]) = sx.basic_values()(i);
    res.x = xfull.head(nv);
    // Clean tiny bound violations left by rounding.
    for (int j = 0; j < nv; ++j)
        if (!lower_free[j] && res.x(j) < 0.0 && res.x(j) > -1e-9) res.x(j) = 0.0;
    res.objective = lp.c.dot(res.x);

    Vector y(m);
    for (int i = 0; i < m; ++i) y(i) = c2(sx.basis()[i]);
    sx.btran(y);
    res.y_eq = y.head(meq);
    res.y_ub = y.tail(mub);

    double pr = 0.0;
    if (meq) pr = std::max(pr, (lp.A_eq * res.x - lp.b_eq).cwiseAbs().maxCoeff());
    if (mub) pr = std::max(pr, (lp.A_ub * res.x - lp.b_ub).cwiseMax(0.0).maxCoeff());
    res.primal_residual = pr;
    res.status = pr <= 1e-8 * bscale ? Status::Optimal : Status::BadProblem;
    return res;
}

inline LPResult solve_lp(const DenseLP& lp) { return solve_lp(lp.to_sparse()); }

inline void dump(std::ostream& os, const DenseLP& lp) {
    os << "LP " << lp.c.size() << ' ' << lp.A_eq.rows() << ' ' << lp.A_ub.rows() << '\n';
    write_matrix(os, "c", Matrix(lp.c.transpose()));
    write_matrix(os, "A_eq", lp.A_eq);
    write_matrix(os, "b_eq", Matrix(lp.b_eq.transpose()));
    write_matrix(os, "A_ub", lp.A_ub);
    write_matrix(os, "b_ub", Matrix(lp.b_ub.transpose()));
    Matrix fr(1, lp.c.size());
    for (Eigen::Index j = 0; j < lp.c.size(); ++j) fr(0, j) = !lp.free.empty() && lp.free[j] ? 1.0 : 0.0;
    write_matrix(os, "free", fr);
}

}  // namespace psls::solver
