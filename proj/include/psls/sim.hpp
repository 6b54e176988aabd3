#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "psls/error.hpp"
#include "psls/language.hpp"
#include "psls/sls.hpp"
#include "psls/synth.hpp"
#include "psls/system.hpp"

namespace psls {

inline constexpr const char* kRngAlgorithm = "xoshiro256** seeded by splitmix64";

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256** with one independent stream per (seed, run, signal).
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t run = 0, std::uint64_t signal = 0) {
        std::uint64_t k = seed;
        std::uint64_t key = splitmix64(k);
        k = run ^ 0xD1B54A32D192ED03ULL;
        key ^= splitmix64(k);
        k = signal ^ 0x8CB92BA72F3D8DD7ULL;
        key ^= splitmix64(k) * 3ULL;
        for (auto& s : s_) s = splitmix64(key);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal by the Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Stacked noises: w = (x_0, w_0, ..., w_{T-1}) and v = (v_0, ..., v_T).
struct NoiseSample {
    Vector w;
    Vector v;
};

enum class BoundedSampling { Interior, Vertex };

// Noise generator for one signal; Gaussian square-root factors are computed once.
class NoiseSampler {
public:
    NoiseSampler(const NoiseSpec& spec, const SwitchedModel& model, const SwitchingSignal& sigma,
                 BoundedSampling mode = BoundedSampling::Interior)
        : kind_(spec.kind), mode_(mode), n_(model.n()), m_(model.m()), T_(model.horizon()) {
        check_signal(model, sigma);
        if (kind_ == NoiseKind::Gaussian) {
            for (int tau = 0; tau <= T_; ++tau) {
                lw_.push_back(psd_sqrt(process_covariance_block(spec, sigma, tau)));
                lv_.push_back(psd_sqrt(spec.mode(sigma[tau]).P_v));
            }
        } else {
            w_bar_ = spec.w_bar;
            v_bar_ = spec.v_bar;
        }
    }

    NoiseSample operator()(Rng& rng) const {
        NoiseSample out{Vector(n_ * (T_ + 1)), Vector(m_ * (T_ + 1))};
        if (kind_ == NoiseKind::Gaussian) {
            auto draw = [&](const Matrix& root, int dim) {
                Vector z(dim);
                for (int i = 0; i < dim; ++i) z(i) = rng.normal();
                return Vector(root * z);
            };
            for (int tau = 0; tau <= T_; ++tau) out.w.segment(tau * n_, n_) = draw(lw_[tau], n_);
            for (int tau = 0; tau <= T_; ++tau) out.v.segment(tau * m_, m_) = draw(lv_[tau], m_);
        } else {
            auto draw = [&](double bound) {
                return mode_ == BoundedSampling::Vertex ? (rng.uniform() < 0.5 ? -bound : bound)
                                                        : rng.uniform(-bound, bound);
            };
            for (Eigen::Index i = 0; i < out.w.size(); ++i) out.w(i) = draw(w_bar_);
            for (Eigen::Index i = 0; i < out.v.size(); ++i) out.v(i) = draw(v_bar_);
        }
        return out;
    }

private:
    NoiseKind kind_;
    BoundedSampling mode_;
    int n_, m_, T_;
    std::vector<Matrix> lw_, lv_;
    double w_bar_ = 0.0, v_bar_ = 0.0;
};

inline NoiseSample sample_noise(const NoiseSpec& spec, const SwitchedModel& model, const SwitchingSignal& sigma, Rng& rng,
                                BoundedSampling mode = BoundedSampling::Interior) {
    return NoiseSampler(spec, model, sigma, mode)(rng);
}

inline NoiseSample sample_noise(const NoiseSpec& spec, const SwitchedModel& model, const SwitchingSignal& sigma,
                                std::uint64_t seed, BoundedSampling mode = BoundedSampling::Interior) {
    Rng rng(seed);
    return sample_noise(spec, model, sigma, rng, mode);
}

struct SimTrace {
    SwitchingSignal sigma;
    std::vector<Vector> x, u, y;     // t = 0..T
    NoiseSample noise;
    std::vector<double> cost;        // x_t'Q_t x_t + u_t'R_t u_t (zero without a cost spec)
    std::vector<double> state_norm;  // ||x_t||_inf

    [[nodiscard]] Vector stacked_x() const { return stack(x); }
    [[nodiscard]] Vector stacked_u() const { return stack(u); }
    [[nodiscard]] double total_cost() const {
        double s = 0.0;
        for (double c : cost) s += c;
        return s;
    }
    [[nodiscard]] double max_state_norm() const {
        double s = 0.0;
        for (double c : state_norm) s = std::max(s, c);
        return s;
    }

private:
    static Vector stack(const std::vector<Vector>& parts) {
        Eigen::Index len = 0;
        for (const auto& p : parts) len += p.size();
        Vector out(len);
        Eigen::Index off = 0;
        for (const auto& p : parts) {
            out.segment(off, p.size()) = p;
            off += p.size();
        }
        return out;
    }
};

// Rollout of x_{t+1} = A x_t + B u_t + w_t, y_t = C x_t + v_t, u_t = sum_tau K_(t,tau) y_tau,
// with gains looked up from the observed (delayed) prefix.
inline SimTrace simulate(const SwitchedModel& model, const SwitchingSignal& sigma, const PrefixController& ctrl,
                         const NoiseSample& noise, const CostSpec* cost = nullptr) {
    check_signal(model, sigma);
    const int T = model.horizon(), n = model.n(), m = model.m();
    if (noise.w.size() != n * (T + 1) || noise.v.size() != m * (T + 1))
        throw DimensionError("simulate: noise vectors must have n(T+1) and m(T+1) entries");
    if (ctrl.horizon() != T || ctrl.p() != model.p() || ctrl.m() != m)
        throw DimensionError("simulate: controller does not match the model");
    if (cost && cost->horizon() != T) throw DimensionError("simulate: cost horizon does not match the model");
    SimTrace tr;
    tr.sigma = sigma;
    tr.noise = noise;
    Vector x = noise.w.head(n);
    for (int t = 0; t <= T; ++t) {
        const Mode& md = model.mode(sigma[t]);
        tr.x.push_back(x);
        tr.y.push_back(md.C * x + noise.v.segment(t * m, m));
        const int node = ctrl.node_for(t, sigma);
        Vector u = Vector::Zero(model.p());
        for (int tau = 0; tau <= t; ++tau) u += ctrl.gain(node, tau) * tr.y[tau];
        tr.u.push_back(u);
        tr.cost.push_back(cost ? x.dot(cost->Q[t] * x) + u.dot(cost->R[t] * u) : 0.0);
        tr.state_norm.push_back(x.size() ? x.cwiseAbs().maxCoeff() : 0.0);
        if (t < T) x = md.A * x + md.B * u + noise.w.segment((t + 1) * n, n);
    }
    return tr;
}

inline SimTrace simulate(const SwitchedModel& model, const SwitchingSignal& sigma, const PrefixController& ctrl,
                         const NoiseSample& noise, const CostSpec& cost) {
    return simulate(model, sigma, ctrl, noise, &cost);
}

struct WorstCase {
    double value = 0.0;
    NoiseSample witness;
    int row = 0;  // row of the stacked state attaining the value
};

// Sign-vertex noise that drives stacked state row `row` to its maximum.
inline NoiseSample row_witness(const SystemResponse& phi, double w_bar, double v_bar, int row) {
    auto sgn = [](double v) { return v < 0.0 ? -1.0 : 1.0; };
    NoiseSample s{Vector(phi.xx.cols()), Vector(phi.xy.cols())};
    const Matrix xx = phi.xx.dense(), xy = phi.xy.dense();
    for (Eigen::Index j = 0; j < s.w.size(); ++j) s.w(j) = w_bar * sgn(xx(row, j));
    for (Eigen::Index j = 0; j < s.v.size(); ++j) s.v(j) = v_bar * sgn(xy(row, j));
    return s;
}

inline WorstCase worst_case_state_norm(const SystemResponse& phi, double w_bar, double v_bar) {
    const Vector sums = scaled_state_map(phi, w_bar, v_bar).cwiseAbs().rowwise().sum();
    WorstCase wc;
    for (Eigen::Index r = 0; r < sums.size(); ++r)
        if (r == 0 || sums(r) > wc.value) {
            wc.value = sums(r);
            wc.row = static_cast<int>(r);
        }
    wc.witness = row_witness(phi, w_bar, v_bar, wc.row);
    return wc;
}

struct TimeStats {
    std::vector<double> mean, std, max, max_minus_std;
};

struct SignalStats {
    TimeStats cost;
    TimeStats state_norm;
    double mean_total_cost = 0.0;
    double std_total_cost = 0.0;
    double max_state_norm = 0.0;
};

struct MonteCarloResult {
    int runs = 0;
    std::uint64_t seed = 0;
    std::vector<SignalStats> per_signal;
    // pi-weighted mixture over signals (uniform if the language has no probabilities).
    TimeStats marginal_cost;
    TimeStats marginal_state_norm;
    double mean_total_cost = 0.0;
    double total_cost_std_error = 0.0;
    double max_state_norm = 0.0;
    std::vector<SimTrace> traces;  // filled only when requested; order (signal, run)
};

namespace detail {

// Unbiased statistics of samples[run][t].
inline TimeStats time_stats(const std::vector<std::vector<double>>& samples) {
    TimeStats st;
    if (samples.empty()) return st;
    const std::size_t len = samples.front().size(), runs = samples.size();
    st.mean.assign(len, 0.0);
    st.std.assign(len, 0.0);
    st.max.assign(len, -std::numeric_limits<double>::infinity());
    for (const auto& s : samples)
        for (std::size_t t = 0; t < len; ++t) {
            st.mean[t] += s[t];
            st.max[t] = std::max(st.max[t], s[t]);
        }
    for (auto& v : st.mean) v /= static_cast<double>(runs);
    if (runs > 1) {
        for (const auto& s : samples)
            for (std::size_t t = 0; t < len; ++t) st.std[t] += (s[t] - st.mean[t]) * (s[t] - st.mean[t]);
        for (auto& v : st.std) v = std::sqrt(v / static_cast<double>(runs - 1));
    }
    st.max_minus_std.resize(len);
    for (std::size_t t = 0; t < len; ++t) st.max_minus_std[t] = st.max[t] - st.std[t];
    return st;
}

inline TimeStats mixture(const std::vector<TimeStats>& parts, const std::vector<double>& weights) {
    TimeStats out;
    if (parts.empty()) return out;
    const std::size_t len = parts.front().mean.size();
    out.mean.assign(len, 0.0);
    out.std.assign(len, 0.0);
    out.max.assign(len, -std::numeric_limits<double>::infinity());
    std::vector<double> second(len, 0.0);
    for (std::size_t k = 0; k < parts.size(); ++k)
        for (std::size_t t = 0; t < len; ++t) {
            out.mean[t] += weights[k] * parts[k].mean[t];
            second[t] += weights[k] * (parts[k].std[t] * parts[k].std[t] + parts[k].mean[t] * parts[k].mean[t]);
            out.max[t] = std::max(out.max[t], parts[k].max[t]);
        }
    out.max_minus_std.resize(len);
    for (std::size_t t = 0; t < len; ++t) {
        out.std[t] = std::sqrt(std::max(0.0, second[t] - out.mean[t] * out.mean[t]));
        out.max_minus_std[t] = out.max[t] - out.std[t];
    }
    return out;
}

}  // namespace detail

// Simulates every signal of `lang` for `runs` independent noise draws.
inline MonteCarloResult monte_carlo(const SwitchedModel& model, const SwitchingLanguage& lang, const PrefixController& ctrl,
                                    const NoiseSpec& noise, const CostSpec& cost, int runs, std::uint64_t seed,
                                    BoundedSampling mode = BoundedSampling::Interior, bool keep_traces = false) {
    if (runs < 1) throw ConfigError("monte_carlo: runs must be >= 1");
    MonteCarloResult res;
    res.runs = runs;
    res.seed = seed;
    std::vector<double> weights(lang.size(), 1.0 / lang.size());
    if (lang.has_probabilities()) weights = *lang.probabilities();
    std::vector<TimeStats> cost_parts, norm_parts;
    double var_total = 0.0;
    for (int s = 0; s < lang.size(); ++s) {
        std::vector<std::vector<double>> costs, norms;
        std::vector<double> totals;
        const NoiseSampler sampler(noise, model, lang.signal(s), mode);
        for (int r = 0; r < runs; ++r) {
            Rng rng(seed, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(s));
            auto tr = simulate(model, lang.signal(s), ctrl, sampler(rng), cost);
            costs.push_back(tr.cost);
            norms.push_back(tr.state_norm);
            totals.push_back(tr.total_cost());
            if (keep_traces) res.traces.push_back(std::move(tr));
        }
        SignalStats ss;
        ss.cost = detail::time_stats(costs);
        ss.state_norm = detail::time_stats(norms);
        double mean = 0.0;
        for (double v : totals) mean += v;
        mean /= runs;
        double var = 0.0;
        if (runs > 1) {
            for (double v : totals) var += (v - mean) * (v - mean);
            var /= runs - 1;
        }
        ss.mean_total_cost = mean;
        ss.std_total_cost = std::sqrt(var);
        ss.max_state_norm = *std::max_element(ss.state_norm.max.begin(), ss.state_norm.max.end());
        res.mean_total_cost += weights[s] * mean;
        var_total += weights[s] * weights[s] * var / runs;
        res.max_state_norm = std::max(res.max_state_norm, ss.max_state_norm);
        cost_parts.push_back(ss.cost);
        norm_parts.push_back(ss.state_norm);
        res.per_signal.push_back(std::move(ss));
    }
    res.total_cost_std_error = std::sqrt(var_total);
    res.marginal_cost = detail::mixture(cost_parts, weights);
    res.marginal_state_norm = detail::mixture(norm_parts, weights);
    return res;
}

}  // namespace psls
