#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "psls/error.hpp"
#include "psls/language.hpp"
#include "psls/sls.hpp"
#include "psls/solver/eq_qp.hpp"
#include "psls/solver/lp.hpp"
#include "psls/system.hpp"

namespace psls {

enum class Formulation { SharedSlab, ExplicitEquality };
enum class Problem { H2, L1 };

inline std::string to_string(Formulation f) { return f == Formulation::SharedSlab ? "shared" : "explicit"; }
inline std::string to_string(Problem p) { return p == Problem::H2 ? "h2" : "l1"; }

struct SynthesisOptions {
    int delay = 0;
    Formulation formulation = Formulation::SharedSlab;
    // Post-multiply by the covariance stacks themselves instead of their square roots.
    bool literal_covariance = false;
    double consistency_tol = 1e-7;
};

struct SynthesisDiagnostics {
    solver::Status status = solver::Status::BadProblem;
    int variables = 0;
    int equality_rows = 0;
    int inequality_rows = 0;
    int removed_rows = 0;
    int iterations = 0;
    double primal_residual = 0.0;
    double max_affine_residual = 0.0;
    double solver_objective = 0.0;
    double seconds = 0.0;
    bool regularized = false;
    std::vector<std::string> warnings;
};

struct SynthesisSolution {
    Problem problem = Problem::H2;
    double objective = std::numeric_limits<double>::infinity();
    std::vector<SystemResponse> responses;  // one per language signal
    // H2: expected cost of each signal. L1: worst-case state norm of each signal.
    std::vector<double> per_signal;
    int worst_signal = -1;  // L1 only: first signal attaining the minimax value
    PrefixController controller;
    SynthesisDiagnostics diagnostics;

    [[nodiscard]] bool ok() const { return diagnostics.status == solver::Status::Optimal; }
};

// Max absolute row sum.
inline double induced_inf_norm(const Matrix& m) { return m.size() ? m.cwiseAbs().rowwise().sum().maxCoeff() : 0.0; }

// [xx, xy] * blkdiag(w_bar I, v_bar I).
inline Matrix scaled_state_map(const SystemResponse& phi, double w_bar, double v_bar) {
    Matrix sm = phi.state_map();
    sm.leftCols(phi.xx.cols()) *= w_bar;
    sm.rightCols(phi.xy.cols()) *= v_bar;
    return sm;
}

inline double l1_signal_value(const SystemResponse& phi, double w_bar, double v_bar) {
    return induced_inf_norm(scaled_state_map(phi, w_bar, v_bar));
}

// E||S Phi xi||^2 for xi ~ (0, P): trace(Phi' W Phi P).
inline double h2_signal_cost(const SystemResponse& phi, const SwitchingSignal& sigma, const NoiseSpec& noise,
                             const CostSpec& cost, bool literal = false) {
    const int T = phi.horizon();
    if (cost.horizon() != T) throw DimensionError("h2_signal_cost: cost horizon does not match the response");
    std::vector<Matrix> w = cost.Q;
    w.insert(w.end(), cost.R.begin(), cost.R.end());
    const auto cov = stack_noise_covariance(noise, sigma);
    Matrix p = blkdiag({cov.P_w.dense(), cov.P_v.dense()}).dense();
    if (literal) p = p * p;
    const Matrix wm = blkdiag(std::move(w)).dense();
    const Matrix d = phi.dense();
    return (wm * d).cwiseProduct(d * p).sum();
}

inline std::vector<double> h2_signal_costs(const std::vector<SystemResponse>& responses, const SwitchingLanguage& lang,
                                           const NoiseSpec& noise, const CostSpec& cost, bool literal = false) {
    if (static_cast<int>(responses.size()) != lang.size())
        throw DimensionError("h2_signal_costs: one response per signal required");
    std::vector<double> out;
    for (int s = 0; s < lang.size(); ++s) out.push_back(h2_signal_cost(responses[s], lang.signal(s), noise, cost, literal));
    return out;
}

// Sum over signals of pi(sigma) times the expected quadratic cost.
inline double evaluate_h2_objective(const std::vector<SystemResponse>& responses, const SwitchingLanguage& lang,
                                    const NoiseSpec& noise, const CostSpec& cost, bool literal = false) {
    if (!lang.has_probabilities()) throw ConfigError("evaluate_h2_objective: language has no probabilities");
    const auto costs = h2_signal_costs(responses, lang, noise, cost, literal);
    double total = 0.0;
    for (int s = 0; s < lang.size(); ++s) total += lang.probability(s) * costs[s];
    return total;
}

struct L1Evaluation {
    double value = 0.0;
    int worst_signal = -1;
    std::vector<double> per_signal;
};

inline L1Evaluation evaluate_l1_objective(const std::vector<SystemResponse>& responses, const NoiseSpec& noise) {
    if (noise.kind != NoiseKind::Bounded) throw ConfigError("evaluate_l1_objective: needs a bounded noise spec");
    L1Evaluation ev;
    for (std::size_t s = 0; s < responses.size(); ++s) {
        ev.per_signal.push_back(l1_signal_value(responses[s], noise.w_bar, noise.v_bar));
        if (ev.worst_signal < 0 || ev.per_signal.back() > ev.value) {
            ev.value = ev.per_signal.back();
            ev.worst_signal = static_cast<int>(s);
        }
    }
    return ev;
}

inline std::vector<SystemResponse> closed_loop_responses(const SwitchedModel& model, const SwitchingLanguage& lang,
                                                         const PrefixController& ctrl) {
    std::vector<SystemResponse> out;
    out.reserve(lang.size());
    for (int s = 0; s < lang.size(); ++s) out.push_back(closed_loop_response(model, lang.signal(s), ctrl.for_signal(s)));
    return out;
}

namespace detail {

using Row = std::vector<std::pair<int, double>>;

struct AffineSystem {
    std::vector<solver::Triplet> triplets;
    std::vector<double> rhs;
    std::vector<int> owner;  // variable each row solves for in a crash basis, -1 if none

    [[nodiscard]] int rows() const { return static_cast<int>(rhs.size()); }

    void add(Row row, double b, int own) {
        const int r = rows();
        for (const auto& [c, v] : row) triplets.emplace_back(r, c, v);
        rhs.push_back(b);
        owner.push_back(own);
    }
};

// Row-t equations of the achievability constraints for every distinct prefix
// sigma_{0:t} passing through each storage node:
//   xx(t,.) = A_{t-1} xx(t-1,.) + B_{t-1} ux(t-1,.),  xx(t,t) = I
//   xy(t,.) = A_{t-1} xy(t-1,.) + B_{t-1} uy(t-1,.),  xy(t,t) = 0
//   ux(t,tau) = ux(t,tau+1) A_tau + uy(t,tau) C_tau
// The fourth family, xx (I - ZA) - xy C = I, follows from these three.
inline void append_affine_rows(const SwitchedModel& model, const SwitchingLanguage& lang, const PrefixTree& storage,
                               const PrefixLayout& layout, AffineSystem& sys) {
    const int n = model.n(), p = model.p(), m = model.m();
    for (int node = 0; node < storage.size(); ++node) {
        const auto& nd = storage.node(node);
        const int t = nd.depth, parent = nd.parent;
        std::set<std::pair<Row, double>> seen;
        std::set<std::vector<int>> prefixes;
        auto emit = [&](Row row, double b, int own) {
            std::sort(row.begin(), row.end());
            if (seen.insert({row, b}).second) sys.add(std::move(row), b, own);
        };
        for (int s : nd.signals) {
            const auto pre = lang.signal(s).prefix(t);
            if (!prefixes.insert(pre).second) continue;
            const Matrix* a_prev = t > 0 ? &model.mode(pre[t - 1]).A : nullptr;
            const Matrix* b_prev = t > 0 ? &model.mode(pre[t - 1]).B : nullptr;

            for (int tau = 0; tau <= t; ++tau)
                for (int c = 0; c < n; ++c)
                    for (int r = 0; r < n; ++r) {
                        const int own = layout.index(node, MapId::XX, tau, r, c);
                        Row row{{own, 1.0}};
                        if (tau < t) {
                            for (int k = 0; k < n; ++k)
                                if ((*a_prev)(r, k) != 0.0)
                                    row.emplace_back(layout.index(parent, MapId::XX, tau, k, c), -(*a_prev)(r, k));
                            for (int k = 0; k < p; ++k)
                                if ((*b_prev)(r, k) != 0.0)
                                    row.emplace_back(layout.index(parent, MapId::UX, tau, k, c), -(*b_prev)(r, k));
                        }
                        emit(std::move(row), tau == t && r == c ? 1.0 : 0.0, own);
                    }

            for (int tau = 0; tau <= t; ++tau)
                for (int c = 0; c < m; ++c)
                    for (int r = 0; r < n; ++r) {
                        const int own = layout.index(node, MapId::XY, tau, r, c);
                        Row row{{own, 1.0}};
                        if (tau < t) {
                            for (int k = 0; k < n; ++k)
                                if ((*a_prev)(r, k) != 0.0)
                                    row.emplace_back(layout.index(parent, MapId::XY, tau, k, c), -(*a_prev)(r, k));
                            for (int k = 0; k < p; ++k)
                                if ((*b_prev)(r, k) != 0.0)
                                    row.emplace_back(layout.index(parent, MapId::UY, tau, k, c), -(*b_prev)(r, k));
                        }
                        emit(std::move(row), 0.0, own);
                    }

            for (int tau = 0; tau <= t; ++tau) {
                const Matrix& a_tau = model.mode(pre[tau]).A;
                const Matrix& c_tau = model.mode(pre[tau]).C;
                for (int c = 0; c < n; ++c)
                    for (int r = 0; r < p; ++r) {
                        const int own = layout.index(node, MapId::UX, tau, r, c);
                        Row row{{own, 1.0}};
                        if (tau < t)
                            for (int k = 0; k < n; ++k)
                                if (a_tau(k, c) != 0.0)
                                    row.emplace_back(layout.index(node, MapId::UX, tau + 1, r, k), -a_tau(k, c));
                        for (int k = 0; k < m; ++k)
                            if (c_tau(k, c) != 0.0) row.emplace_back(layout.index(node, MapId::UY, tau, r, k), -c_tau(k, c));
                        emit(std::move(row), 0.0, own);
                    }
            }
        }
    }
}

// Equality rows tying together the unshared slabs of signals that share a
// node of `shared` (explicit-equality formulation).
inline void append_link_rows(const PrefixTree& shared, const PrefixTree& storage, const PrefixLayout& layout,
                             AffineSystem& sys) {
    for (const auto& nd : shared.nodes()) {
        const int t = nd.depth;
        const int first = storage.node_of(nd.signals.front(), t);
        for (std::size_t k = 1; k < nd.signals.size(); ++k) {
            const int other = storage.node_of(nd.signals[k], t);
            for (MapId id : kAllMaps)
                for (int tau = 0; tau <= t; ++tau)
                    for (int c = 0; c < layout.map_block_cols(id); ++c)
                        for (int r = 0; r < layout.map_rows(id); ++r)
                            sys.add({{layout.index(first, id, tau, r, c), -1.0}, {layout.index(other, id, tau, r, c), 1.0}},
                                    0.0, -1);
        }
    }
}

// Half the Hessian weight per node: sum_sigma pi P_tau^sigma (x) W_t on each column block.
inline std::vector<solver::Triplet> h2_hessian(const SwitchingLanguage& lang, const PrefixTree& storage,
                                               const PrefixLayout& layout, const NoiseSpec& noise, const CostSpec& cost,
                                               bool literal) {
    std::vector<solver::Triplet> trip;
    for (int node = 0; node < storage.size(); ++node) {
        const auto& nd = storage.node(node);
        const int t = nd.depth;
        for (MapId id : kAllMaps) {
            const bool state_row = id == MapId::XX || id == MapId::XY;
            const bool process_col = id == MapId::XX || id == MapId::UX;
            const Matrix& w = state_row ? cost.Q[t] : cost.R[t];
            const int rows = layout.map_rows(id), bc = layout.map_block_cols(id);
            for (int tau = 0; tau <= t; ++tau) {
                Matrix pbar = Matrix::Zero(bc, bc);
                for (int s : nd.signals) {
                    const auto& sigma = lang.signal(s);
                    Matrix pb = process_col ? process_covariance_block(noise, sigma, tau) : noise.mode(sigma[tau]).P_v;
                    if (literal) pb = pb * pb;
                    pbar += lang.probability(s) * pb;
                }
                for (int c2 = 0; c2 < bc; ++c2)
                    for (int c1 = 0; c1 < bc; ++c1) {
                        if (pbar(c1, c2) == 0.0) continue;
                        for (int r2 = 0; r2 < rows; ++r2)
                            for (int r1 = 0; r1 < rows; ++r1) {
                                const double v = 2.0 * pbar(c1, c2) * w(r1, r2);
                                if (v != 0.0)
                                    trip.emplace_back(layout.index(node, id, tau, r1, c1), layout.index(node, id, tau, r2, c2), v);
                            }
                    }
            }
        }
    }
    return trip;
}

struct Assembly {
    PrefixTree shared;   // tree defining which gains are shared (with delay)
    PrefixTree storage;  // tree owning the variables
    PrefixLayout layout;
    AffineSystem eq;
};

inline Assembly assemble(const SwitchedModel& model, const SwitchingLanguage& lang, const SynthesisOptions& opt) {
    if (lang.empty()) throw ConfigError("synthesis: empty language");
    if (lang.horizon() != model.horizon()) throw DimensionError("synthesis: language and model horizons differ");
    if (lang.max_mode() > model.mode_count()) throw DimensionError("synthesis: language references an undefined mode");
    Assembly as;
    as.shared = build_prefix_tree(lang, opt.delay);
    as.storage = opt.formulation == Formulation::SharedSlab ? as.shared : unshared_tree(lang);
    as.layout = assemble_layout(model, as.storage);
    append_affine_rows(model, lang, as.storage, as.layout, as.eq);
    if (opt.formulation == Formulation::ExplicitEquality) append_link_rows(as.shared, as.storage, as.layout, as.eq);
    return as;
}

inline solver::SparseMatrix to_sparse(int rows, int cols, const std::vector<solver::Triplet>& trip) {
    solver::SparseMatrix a(rows, cols);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    return a;
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Responses, residual check and controller recovery shared by both problems.
inline void finish_solution(const SwitchedModel& model, const SwitchingLanguage& lang, const Assembly& as,
                            const Vector& z, const SynthesisOptions& opt, SynthesisSolution& sol) {
    sol.responses.clear();
    for (int s = 0; s < lang.size(); ++s) {
        sol.responses.push_back(as.layout.reconstruct(z, s));
        sol.diagnostics.max_affine_residual =
            std::max(sol.diagnostics.max_affine_residual, check_affine(sol.responses.back(), model, lang.signal(s)));
    }
    if (sol.diagnostics.max_affine_residual > opt.consistency_tol)
        sol.diagnostics.warnings.push_back("affine residual " + std::to_string(sol.diagnostics.max_affine_residual) +
                                           " exceeds the consistency tolerance");
    sol.controller = realize_online(sol.responses, as.shared, opt.consistency_tol);
}

}  // namespace detail

// Minimizes sum_sigma pi(sigma) E[sum_t x_t'Q_t x_t + u_t'R_t u_t] over prefix-consistent responses.
inline SynthesisSolution synth_h2(const SwitchedModel& model, const SwitchingLanguage& lang, const NoiseSpec& noise,
                                  const CostSpec& cost, const SynthesisOptions& opt = {}) {
    if (!lang.has_probabilities()) throw ConfigError("synth_h2: the language needs probabilities");
    if (noise.kind != NoiseKind::Gaussian) throw ConfigError("synth_h2: needs a Gaussian noise spec");
    if (static_cast<int>(noise.gaussian.size()) < model.mode_count())
        throw ConfigError("synth_h2: noise spec has fewer modes than the model");
    if (cost.horizon() != model.horizon()) throw DimensionError("synth_h2: cost horizon does not match the model");
    const auto start = std::chrono::steady_clock::now();

    SynthesisSolution sol;
    sol.problem = Problem::H2;
    auto as = detail::assemble(model, lang, opt);
    const int nz = as.layout.variable_count(), ne = as.eq.rows();
    auto& dg = sol.diagnostics;
    dg.variables = nz;
    dg.equality_rows = ne;

    const auto htrip = detail::h2_hessian(lang, as.storage, as.layout, noise, cost, opt.literal_covariance);
    solver::SparseEqQP qp{detail::to_sparse(nz, nz, htrip), Vector::Zero(nz), detail::to_sparse(ne, nz, as.eq.triplets),
                          Eigen::Map<const Vector>(as.eq.rhs.data(), ne)};
    solver::QPResult res;
    if (opt.formulation == Formulation::ExplicitEquality)
        res = solver::solve_eq_qp({Matrix(qp.H), qp.g, Matrix(qp.A_eq), qp.b_eq});
    else
        res = solver::solve_sparse_eq_qp(qp);
    dg.status = res.status;
    dg.removed_rows = res.removed_rows;
    dg.primal_residual = res.primal_residual;
    dg.regularized = res.regularized;
    dg.solver_objective = res.objective;
    dg.warnings.insert(dg.warnings.end(), res.warnings.begin(), res.warnings.end());
    if (res.status == solver::Status::Optimal) {
        detail::finish_solution(model, lang, as, res.x, opt, sol);
        sol.per_signal = h2_signal_costs(sol.responses, lang, noise, cost, opt.literal_covariance);
        sol.objective = 0.0;
        for (int s = 0; s < lang.size(); ++s) sol.objective += lang.probability(s) * sol.per_signal[s];
    }
    dg.seconds = detail::seconds_since(start);
    return sol;
}

// Minimizes max_sigma ||[xx xy] blkdiag(w_bar I, v_bar I)||_inf over prefix-consistent responses.
inline SynthesisSolution synth_l1(const SwitchedModel& model, const SwitchingLanguage& lang, const NoiseSpec& noise,
                                  const SynthesisOptions& opt = {}) {
    if (noise.kind != NoiseKind::Bounded) throw ConfigError("synth_l1: needs a bounded noise spec");
    const auto start = std::chrono::steady_clock::now();

    SynthesisSolution sol;
    sol.problem = Problem::L1;
    auto as = detail::assemble(model, lang, opt);
    const auto& layout = as.layout;
    const int nz = layout.variable_count(), ne = as.eq.rows(), n = model.n();

    // State-map entries are split into positive and negative parts; the rest are free.
    std::vector<char> split(nz, 0);
    for (int node = 0; node < as.storage.size(); ++node) {
        const int t = as.storage.node(node).depth;
        const int lo = layout.node_offset(node) + layout.map_offset(MapId::XX, t);
        const int hi = layout.node_offset(node) + layout.map_offset(MapId::UX, t);
        std::fill(split.begin() + lo, split.begin() + hi, 1);
    }
    std::vector<int> pos(nz), neg(nz, -1);
    int ncol = 0;
    for (int j = 0; j < nz; ++j) {
        pos[j] = ncol++;
        if (split[j]) neg[j] = ncol++;
    }
    const int tcol = ncol++;

    solver::LinearProgram lp;
    lp.c = Vector::Zero(ncol);
    lp.c(tcol) = 1.0;
    lp.free.assign(ncol, false);
    for (int j = 0; j < nz; ++j)
        if (!split[j]) lp.free[pos[j]] = true;

    std::vector<solver::Triplet> eq;
    eq.reserve(2 * as.eq.triplets.size());
    for (const auto& tr : as.eq.triplets) {
        eq.emplace_back(tr.row(), pos[tr.col()], tr.value());
        if (neg[tr.col()] >= 0) eq.emplace_back(tr.row(), neg[tr.col()], -tr.value());
    }
    lp.A_eq = detail::to_sparse(ne, ncol, eq);
    lp.b_eq = Eigen::Map<const Vector>(as.eq.rhs.data(), ne);

    std::vector<solver::Triplet> ub;
    int nub = 0;
    for (int node = 0; node < as.storage.size(); ++node) {
        const int t = as.storage.node(node).depth;
        for (int r = 0; r < n; ++r, ++nub) {
            for (MapId id : {MapId::XX, MapId::XY}) {
                const double weight = id == MapId::XX ? noise.w_bar : noise.v_bar;
                if (weight == 0.0) continue;
                for (int tau = 0; tau <= t; ++tau)
                    for (int c = 0; c < layout.map_block_cols(id); ++c) {
                        const int j = layout.index(node, id, tau, r, c);
                        ub.emplace_back(nub, pos[j], weight);
                        ub.emplace_back(nub, neg[j], weight);
                    }
            }
            ub.emplace_back(nub, tcol, -1.0);
        }
    }
    lp.A_ub = detail::to_sparse(nub, ncol, ub);
    lp.b_ub = Vector::Zero(nub);

    // Crash basis at the open-loop point (all free parameters zero).
    {
        Vector z0 = Vector::Zero(nz);
        const BlockLTMatrix k0(BlockGrid::uniform(model.horizon(), model.p(), model.m()));
        for (int s = 0; s < lang.size(); ++s) layout.scatter(closed_loop_response(model, lang.signal(s), k0), s, z0);
        std::vector<char> used(nz, 0);
        for (int r = 0; r < ne; ++r) {
            const int j = as.eq.owner[r];
            if (j < 0 || used[j]) continue;
            used[j] = 1;
            lp.basis_hint.emplace_back(r, split[j] && z0(j) < 0.0 ? neg[j] : pos[j]);
        }
    }

    auto& dg = sol.diagnostics;
    dg.variables = ncol;
    dg.equality_rows = ne;
    dg.inequality_rows = nub;
    const auto res = solver::solve_lp(lp);
    dg.status = res.status;
    dg.removed_rows = res.redundant_rows;
    dg.iterations = res.iterations;
    dg.primal_residual = res.primal_residual;
    if (res.status == solver::Status::Optimal) {
        Vector z(nz);
        for (int j = 0; j < nz; ++j) z(j) = res.x(pos[j]) - (neg[j] >= 0 ? res.x(neg[j]) : 0.0);
        detail::finish_solution(model, lang, as, z, opt, sol);
        const auto ev = evaluate_l1_objective(sol.responses, noise);
        sol.per_signal = ev.per_signal;
        sol.worst_signal = ev.worst_signal;
        dg.solver_objective = res.objective;
        sol.objective = ev.value;
        if (std::abs(ev.value - res.objective) > 1e-8 * std::max(1.0, res.objective))
            dg.warnings.push_back("evaluated minimax value differs from the LP epigraph value");
    }
    dg.seconds = detail::seconds_since(start);
    return sol;
}

struct BaselineResult {
    PrefixController controller;
    std::vector<SystemResponse> responses;
    double objective = std::numeric_limits<double>::infinity();
    std::vector<double> per_signal;
    int worst_signal = -1;
    int sweeps = 0;
    bool converged = false;
    double seconds = 0.0;
};

// Controller designed for the all-nominal signal alone, applied to every signal of `lang`.
inline BaselineResult nominal_h2_baseline(const SwitchedModel& model, const SwitchingLanguage& lang,
                                          const NoiseSpec& noise, const CostSpec& cost, const SynthesisOptions& opt = {}) {
    const auto start = std::chrono::steady_clock::now();
    const SwitchingLanguage nominal({SwitchingSignal(std::vector<int>(model.horizon() + 1, 1))}, std::vector<double>{1.0});
    SynthesisOptions nopt = opt;
    nopt.delay = 0;
    nopt.formulation = Formulation::SharedSlab;
    const auto sol = synth_h2(model, nominal, noise, cost, nopt);
    if (!sol.ok()) throw SolverError("nominal baseline: " + solver::to_string(sol.diagnostics.status));
    BaselineResult out;
    out.controller = PrefixController::common(build_prefix_tree(lang), sol.controller.for_signal(0));
    out.responses = closed_loop_responses(model, lang, out.controller);
    out.per_signal = h2_signal_costs(out.responses, lang, noise, cost, opt.literal_covariance);
    out.objective = evaluate_h2_objective(out.responses, lang, noise, cost, opt.literal_covariance);
    out.converged = true;
    out.seconds = detail::seconds_since(start);
    return out;
}

struct MemorylessOptions {
    int delay = 0;
    int max_sweeps = 500;
    double tol = 1e-8;
};

namespace detail {

// Minimizes a convex function on the real line by bracketing and golden-section search.
template <class F>
double convex_line_search(F&& f, double f0, double tol = 1e-12) {
    double step = 1.0, dir = 1.0;
    double fp = f(step), fm = f(-step);
    if (fp >= f0 && fm >= f0) {
        // Minimizer lies in [-1, 1]; shrink the step until one side improves.
        for (int i = 0; i < 40 && fp >= f0 && fm >= f0; ++i) {
            step *= 0.5;
            fp = f(step);
            fm = f(-step);
        }
        if (fp >= f0 && fm >= f0) return 0.0;
    }
    if (fm < fp) {
        dir = -1.0;
        std::swap(fp, fm);
    }
    double lo = 0.0, mid = step, fmid = fp, hi = 2.0 * step, fhi = f(dir * hi);
    for (int i = 0; i < 60 && fhi < fmid; ++i) {
        lo = mid;
        mid = hi;
        fmid = fhi;
        hi *= 2.0;
        fhi = f(dir * hi);
    }
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(dir * x1), f2 = f(dir * x2);
    for (int i = 0; i < 200 && (b - a) > tol * std::max(1.0, std::abs(b)); ++i) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(dir * x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(dir * x2);
        }
    }
    double best = f1 <= f2 ? x1 : x2, fbest = std::min(f1, f2);
    if (fmid < fbest) best = mid;
    return dir * best;
}

}  // namespace detail

// Block-diagonal (memoryless) prefix-dependent controller u_t = K_(t,t) y_t,
// found by coordinate descent on the exact minimax objective. The objective is
// convex along each single gain entry because the state map is affine in it.
inline BaselineResult memoryless_l1_baseline(const SwitchedModel& model, const SwitchingLanguage& lang,
                                             const NoiseSpec& noise, const MemorylessOptions& opt = {}) {
    if (noise.kind != NoiseKind::Bounded) throw ConfigError("memoryless baseline: needs a bounded noise spec");
    const auto start = std::chrono::steady_clock::now();
    const int T = model.horizon(), n = model.n(), p = model.p(), m = model.m();
    const auto tree = build_prefix_tree(lang, opt.delay);
    std::vector<Matrix> rows;
    for (const auto& nd : tree.nodes()) rows.push_back(Matrix::Zero(p, m * (nd.depth + 1)));

    const int ns = lang.size();
    const int nx = n * (T + 1), ncols = (n + m) * (T + 1);
    Vector scale(ncols);
    scale.head(nx).setConstant(noise.w_bar);
    scale.tail(m * (T + 1)).setConstant(noise.v_bar);

    std::vector<Matrix> phix(ns);    // [xx xy], unscaled
    std::vector<double> value(ns);   // per-signal objective
    std::vector<StackedDynamics> stacks;
    for (int s = 0; s < ns; ++s) stacks.push_back(stack_dynamics(model, lang.signal(s)));
    auto refresh = [&] {
        const PrefixController ctrl(tree, p, m, rows);
        for (int s = 0; s < ns; ++s) {
            phix[s] = closed_loop_response(model, lang.signal(s), ctrl.for_signal(s)).state_map();
            value[s] = induced_inf_norm(phix[s] * scale.asDiagonal());
        }
    };
    refresh();
    auto current = [&] { return *std::max_element(value.begin(), value.end()); };

    BaselineResult out;
    double f = current();
    for (out.sweeps = 0; out.sweeps < opt.max_sweeps;) {
        const double f_start = f;
        for (int node = 0; node < tree.size(); ++node) {
            const auto& nd = tree.node(node);
            const int t = nd.depth;
            if (t == T) continue;  // K_(T,T) does not reach the state
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < p; ++i) {
                    // Phi_x(delta) = Phi_x + delta u w' for each signal through the node.
                    std::vector<int> members(nd.signals.begin(), nd.signals.end());
                    std::vector<Vector> us, ws;
                    std::vector<Matrix> scaled;
                    std::vector<char> member(ns, 0);
                    for (int s : members) {
                        member[s] = 1;
                        const auto& st = stacks[s];
                        us.push_back(phix[s].block(0, (t + 1) * n, nx, n) * st.B.block(t).col(i));
                        Vector w = (st.C.block(t).row(j) * phix[s].middleRows(t * n, n)).transpose();
                        w(nx + t * m + j) += 1.0;
                        ws.push_back(std::move(w));
                        scaled.push_back(phix[s] * scale.asDiagonal());
                    }
                    double others = 0.0;
                    for (int s = 0; s < ns; ++s)
                        if (!member[s]) others = std::max(others, value[s]);
                    auto eval = [&](double delta) {
                        double v = others;
                        for (std::size_t k = 0; k < members.size(); ++k) {
                            const Matrix moved = scaled[k] + delta * us[k] * ws[k].cwiseProduct(scale).transpose();
                            v = std::max(v, induced_inf_norm(moved));
                        }
                        return v;
                    };
                    const double f0 = eval(0.0);
                    const double delta = detail::convex_line_search(eval, f0);
                    if (delta == 0.0 || !(eval(delta) < f0)) continue;
                    rows[node](i, t * m + j) += delta;
                    for (std::size_t k = 0; k < members.size(); ++k) {
                        const int s = members[k];
                        phix[s] += delta * us[k] * ws[k].transpose();
                        value[s] = induced_inf_norm(phix[s] * scale.asDiagonal());
                    }
                    f = current();
                }
        }
        refresh();
        f = current();
        ++out.sweeps;
        if (f_start - f <= opt.tol * std::max(1.0, f)) {
            out.converged = true;
            break;
        }
    }
    out.controller = PrefixController(tree, p, m, rows);
    out.responses = closed_loop_responses(model, lang, out.controller);
    const auto ev = evaluate_l1_objective(out.responses, noise);
    out.objective = ev.value;
    out.per_signal = ev.per_signal;
    out.worst_signal = ev.worst_signal;
    out.seconds = detail::seconds_since(start);
    return out;
}

}  // namespace psls
