#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "psls/blockmat.hpp"
#include "psls/language.hpp"
#include "psls/sim.hpp"
#include "psls/sls.hpp"
#include "psls/system.hpp"

// Randomized self-checks of the prefix/response equivalence and the SLS
// parametrization, used by the command-line `check` verb.
namespace psls {

struct CheckDims {
    int n = 2, p = 1, m = 2, horizon = 3, modes = 2;
};

struct CheckResult {
    std::string name;
    bool passed = true;
    int instances = 0;
    double worst = 0.0;  // largest observed error
    double tolerance = 0.0;
};

namespace detail {

inline Matrix random_matrix(Rng& rng, int rows, int cols, double scale) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-scale, scale);
    return m;
}

inline int random_int(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.next() % (hi - lo + 1)); }

inline BlockLTMatrix random_gain(Rng& rng, int T, int p, int m, double scale) {
    const auto g = BlockGrid::uniform(T, p, m);
    BlockLTMatrix k(g);
    for (int t = 0; t <= T; ++t)
        for (int tau = 0; tau <= t; ++tau) k.set_block(t, tau, random_matrix(rng, p, m, scale));
    return k;
}

inline SwitchedModel random_switched(Rng& rng, const CheckDims& d) {
    std::vector<Mode> modes;
    for (int i = 0; i < d.modes; ++i)
        modes.push_back({random_matrix(rng, d.n, d.n, 0.8), random_matrix(rng, d.n, d.p, 0.8),
                         random_matrix(rng, d.m, d.n, 0.8)});
    return SwitchedModel(std::move(modes), d.horizon);
}

inline SwitchingSignal random_modes(Rng& rng, int modes, int T) {
    std::vector<int> s(T + 1);
    for (auto& v : s) v = random_int(rng, 1, modes);
    return SwitchingSignal(std::move(s));
}

inline SwitchingSignal branch(Rng& rng, const SwitchingSignal& base, int t, int modes) {
    auto s = base.modes();
    for (int k = t + 1; k < static_cast<int>(s.size()); ++k) s[k] = random_int(rng, 1, modes);
    return SwitchingSignal(std::move(s));
}

// Copy of k with block rows after t replaced.
inline BlockLTMatrix change_after(Rng& rng, const BlockLTMatrix& k, int t, double scale) {
    BlockLTMatrix out = k;
    for (int r = t + 1; r <= k.horizon(); ++r)
        for (int tau = 0; tau <= r; ++tau)
            out.set_block(r, tau, random_matrix(rng, k.grid().row_dim(r), k.grid().col_dim(tau), scale));
    return out;
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double truncation_gap(const SystemResponse& a, const SystemResponse& b, int t) {
    return std::max({max_abs(truncate(a.xx, t).dense() - truncate(b.xx, t).dense()),
                     max_abs(truncate(a.xy, t).dense() - truncate(b.xy, t).dense()),
                     max_abs(truncate(a.ux, t).dense() - truncate(b.ux, t).dense()),
                     max_abs(truncate(a.uy, t).dense() - truncate(b.uy, t).dense())});
}

}  // namespace detail

// With `inject_failure`, every instance's response is perturbed in a row the
// invariant covers, so each check must report a failure.
inline std::vector<CheckResult> run_invariant_suite(const CheckDims& dims, int instances, std::uint64_t seed,
                                                    bool inject_failure = false) {
    CheckResult fwd{"prefix_gains_to_responses", true, 0, 0.0, 1e-8};
    CheckResult rev{"prefix_responses_to_gains", true, 0, 0.0, 1e-8};
    CheckResult aff{"affine_residual", true, 0, 0.0, 1e-9};
    CheckResult rt{"round_trip", true, 0, 0.0, 1e-9};
    const int T = dims.horizon;
    for (int k = 0; k < instances; ++k) {
        Rng rng(seed, static_cast<std::uint64_t>(k));
        const auto model = detail::random_switched(rng, dims);
        const auto s1 = detail::random_modes(rng, dims.modes, T);
        const auto k1 = detail::random_gain(rng, T, dims.p, dims.m, 0.5);
        auto r1 = closed_loop_response(model, s1, k1);
        if (inject_failure) {
            Matrix d = r1.uy.dense();
            d(0, 0) += 1e-3;
            r1.uy = BlockLTMatrix(r1.uy.grid(), d);
        }

        const double a = check_affine(r1, model, s1);
        aff.worst = std::max(aff.worst, a);
        ++aff.instances;

        const auto back = recover_controller(r1);
        const double e = detail::max_abs(back.dense() - k1.dense());
        rt.worst = std::max(rt.worst, e);
        ++rt.instances;

        // Prefix tests need a branch point t < T.
        const int t = T > 0 ? detail::random_int(rng, 0, T - 1) : 0;
        const auto s2 = T > 0 ? detail::branch(rng, s1, t, dims.modes) : s1;
        const auto k2 = T > 0 ? detail::change_after(rng, k1, t, 0.5) : k1;
        auto r2 = closed_loop_response(model, s2, k2);
        if (inject_failure) {
            Matrix d = r2.uy.dense();
            d(0, 0) += 2e-3;
            r2.uy = BlockLTMatrix(r2.uy.grid(), d);
        }
        fwd.worst = std::max(fwd.worst, detail::truncation_gap(closed_loop_response(model, s1, k1), r2, t));
        ++fwd.instances;
        const double g =
            detail::max_abs(truncate(recover_controller(r1), t).dense() - truncate(recover_controller(r2), t).dense());
        rev.worst = std::max(rev.worst, g);
        ++rev.instances;
    }
    std::vector<CheckResult> out{fwd, rev, aff, rt};
    for (auto& c : out) c.passed = c.worst <= c.tolerance;
    return out;
}

}  // namespace psls
