#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "psls/blockmat.hpp"
#include "psls/error.hpp"
#include "psls/language.hpp"

namespace psls {

inline constexpr double kPsdTol = 1e-10;

inline bool is_symmetric_psd(const Matrix& m, double tol = kPsdTol) {
    if (m.rows() != m.cols()) return false;
    if (m.size() == 0) return true;
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) return false;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

// Symmetric PSD square root; small negative eigenvalues from rounding are clipped.
inline Matrix psd_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
    const Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

struct Mode {
    Matrix A;  // n x n
    Matrix B;  // n x p
    Matrix C;  // m x n

    friend bool operator==(const Mode& a, const Mode& b) { return a.A == b.A && a.B == b.B && a.C == b.C; }
};

// M time-invariant modes sharing (n, p, m) over horizon T.
class SwitchedModel {
public:
    SwitchedModel() = default;

    SwitchedModel(std::vector<Mode> modes, int horizon) : modes_(std::move(modes)), horizon_(horizon) {
        if (modes_.empty()) throw ConfigError("SwitchedModel: at least one mode required");
        if (horizon_ < 0) throw ConfigError("SwitchedModel: horizon must be >= 0");
        const auto& m0 = modes_.front();
        n_ = static_cast<int>(m0.A.rows());
        p_ = static_cast<int>(m0.B.cols());
        m_ = static_cast<int>(m0.C.rows());
        if (n_ < 1 || p_ < 1 || m_ < 1) throw ConfigError("SwitchedModel: dimensions must be positive");
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            const auto& md = modes_[i];
            if (md.A.rows() != n_ || md.A.cols() != n_ || md.B.rows() != n_ || md.B.cols() != p_ ||
                md.C.rows() != m_ || md.C.cols() != n_)
                throw ConfigError("SwitchedModel: mode " + std::to_string(i + 1) + " has inconsistent dimensions");
        }
    }

    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] int p() const { return p_; }
    [[nodiscard]] int m() const { return m_; }
    [[nodiscard]] int horizon() const { return horizon_; }
    [[nodiscard]] int mode_count() const { return static_cast<int>(modes_.size()); }
    [[nodiscard]] const std::vector<Mode>& modes() const { return modes_; }
    // Mode lookup by 1-based index.
    [[nodiscard]] const Mode& mode(int i) const {
        if (i < 1 || i > mode_count()) throw ConfigError("SwitchedModel: mode index " + std::to_string(i) + " out of range");
        return modes_[i - 1];
    }

    [[nodiscard]] SwitchedModel with_horizon(int horizon) const { return SwitchedModel(modes_, horizon); }

    friend bool operator==(const SwitchedModel& a, const SwitchedModel& b) {
        return a.horizon_ == b.horizon_ && a.modes_ == b.modes_;
    }

private:
    std::vector<Mode> modes_;
    int horizon_ = 0;
    int n_ = 0, p_ = 0, m_ = 0;
};

struct ModeCovariance {
    Matrix P_x0;  // n x n
    Matrix P_w;   // n x n
    Matrix P_v;   // m x m

    friend bool operator==(const ModeCovariance& a, const ModeCovariance& b) {
        return a.P_x0 == b.P_x0 && a.P_w == b.P_w && a.P_v == b.P_v;
    }
};

enum class NoiseKind { Gaussian, Bounded };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Gaussian;
    std::vector<ModeCovariance> gaussian;  // one entry per mode
    double w_bar = 0.0;
    double v_bar = 0.0;

    static NoiseSpec make_gaussian(std::vector<ModeCovariance> per_mode) {
        for (std::size_t i = 0; i < per_mode.size(); ++i) {
            const auto& c = per_mode[i];
            if (!is_symmetric_psd(c.P_x0) || !is_symmetric_psd(c.P_w) || !is_symmetric_psd(c.P_v))
                throw ConfigError("NoiseSpec: covariance blocks of mode " + std::to_string(i + 1) +
                                  " must be symmetric PSD");
        }
        NoiseSpec s;
        s.kind = NoiseKind::Gaussian;
        s.gaussian = std::move(per_mode);
        return s;
    }

    // scale * I for every block of every mode.
    static NoiseSpec isotropic(const SwitchedModel& model, double scale = 1.0) {
        const int n = model.n(), m = model.m();
        std::vector<ModeCovariance> per_mode(model.mode_count(),
                                             ModeCovariance{scale * Matrix::Identity(n, n), scale * Matrix::Identity(n, n),
                                                            scale * Matrix::Identity(m, m)});
        return make_gaussian(std::move(per_mode));
    }

    static NoiseSpec bounded(double w_bar, double v_bar) {
        if (!(w_bar >= 0.0) || !(v_bar >= 0.0)) throw ConfigError("NoiseSpec: bounds must be non-negative");
        NoiseSpec s;
        s.kind = NoiseKind::Bounded;
        s.w_bar = w_bar;
        s.v_bar = v_bar;
        return s;
    }

    [[nodiscard]] const ModeCovariance& mode(int i) const {
        if (kind != NoiseKind::Gaussian) throw ConfigError("NoiseSpec: not a Gaussian specification");
        if (i < 1 || i > static_cast<int>(gaussian.size()))
            throw ConfigError("NoiseSpec: no covariance for mode " + std::to_string(i));
        return gaussian[i - 1];
    }

    friend bool operator==(const NoiseSpec& a, const NoiseSpec& b) {
        return a.kind == b.kind && a.gaussian == b.gaussian && a.w_bar == b.w_bar && a.v_bar == b.v_bar;
    }
};

struct CostSpec {
    std::vector<Matrix> Q;  // T+1 blocks, n x n
    std::vector<Matrix> R;  // T+1 blocks, p x p

    static CostSpec make(std::vector<Matrix> q, std::vector<Matrix> r) {
        if (q.size() != r.size() || q.empty()) throw ConfigError("CostSpec: need T+1 Q and R blocks");
        for (const auto& m : q)
            if (!is_symmetric_psd(m)) throw ConfigError("CostSpec: Q_t must be symmetric PSD");
        for (const auto& m : r)
            if (!is_symmetric_psd(m)) throw ConfigError("CostSpec: R_t must be symmetric PSD");
        return CostSpec{std::move(q), std::move(r)};
    }

    static CostSpec time_invariant(int horizon, const Matrix& q, const Matrix& r) {
        return make(std::vector<Matrix>(horizon + 1, q), std::vector<Matrix>(horizon + 1, r));
    }

    [[nodiscard]] int horizon() const { return static_cast<int>(Q.size()) - 1; }

    friend bool operator==(const CostSpec& a, const CostSpec& b) { return a.Q == b.Q && a.R == b.R; }
};

struct StackedDynamics {
    BlockDiagMatrix A;  // blkdiag(A_0^{s0}, ..., A_{T-1}^{s_{T-1}}, 0)
    BlockDiagMatrix B;  // blkdiag(B_0^{s0}, ..., B_{T-1}^{s_{T-1}}, 0)
    BlockDiagMatrix C;  // blkdiag(C_0^{s0}, ..., C_T^{sT})
};

inline void check_signal(const SwitchedModel& model, const SwitchingSignal& sigma) {
    if (sigma.horizon() != model.horizon())
        throw DimensionError("signal " + sigma.to_string() + " does not match the model horizon");
    if (sigma.max_mode() > model.mode_count())
        throw DimensionError("signal " + sigma.to_string() + " references an undefined mode");
}

inline StackedDynamics stack_dynamics(const SwitchedModel& model, const SwitchingSignal& sigma) {
    check_signal(model, sigma);
    const int T = model.horizon(), n = model.n(), p = model.p();
    std::vector<Matrix> a, b, c;
    for (int t = 0; t < T; ++t) {
        a.push_back(model.mode(sigma[t]).A);
        b.push_back(model.mode(sigma[t]).B);
    }
    a.push_back(Matrix::Zero(n, n));
    b.push_back(Matrix::Zero(n, p));
    for (int t = 0; t <= T; ++t) c.push_back(model.mode(sigma[t]).C);
    return {blkdiag(std::move(a)), blkdiag(std::move(b)), blkdiag(std::move(c))};
}

struct StackedCovariance {
    BlockDiagMatrix P_w;  // blkdiag(P_x0^{s0}, P_w^{s0}, ..., P_w^{s_{T-1}})
    BlockDiagMatrix P_v;  // blkdiag(P_v^{s0}, ..., P_v^{sT})
};

// Covariance of noise block tau of the stacked process-noise vector (tau = 0 is x_0).
inline const Matrix& process_covariance_block(const NoiseSpec& spec, const SwitchingSignal& sigma, int tau) {
    return tau == 0 ? spec.mode(sigma[0]).P_x0 : spec.mode(sigma[tau - 1]).P_w;
}

inline StackedCovariance stack_noise_covariance(const NoiseSpec& spec, const SwitchingSignal& sigma) {
    if (spec.kind != NoiseKind::Gaussian) throw ConfigError("stack_noise_covariance: needs a Gaussian noise spec");
    const int T = sigma.horizon();
    std::vector<Matrix> w, v;
    for (int tau = 0; tau <= T; ++tau) {
        w.push_back(process_covariance_block(spec, sigma, tau));
        v.push_back(spec.mode(sigma[tau]).P_v);
    }
    return {blkdiag(std::move(w)), blkdiag(std::move(v))};
}

enum class AdmireFault { Drift, Sensor };

// Roll/pitch/yaw-rate subsystem of the ADMIRE aircraft model, unit-step discrete time.
inline Matrix admire_A() {
    Matrix a(3, 3);
    a << 0.3550, 0, 0.3428,
         0, 0.6031, 0,
         -0.0521, 0, 0.7901;
    return a;
}

inline Matrix admire_B() {
    Matrix b(3, 4);
    b << 0, -2.7200, 2.7200, 0.7376,
         1.298, -0.9996, -0.9996, 0.0019,
         0, -0.1153, 0.1153, -0.8362;
    return b;
}

inline SwitchedModel admire_model(AdmireFault fault, int horizon = 10) {
    const Matrix a = admire_A(), b = admire_B(), i3 = Matrix::Identity(3, 3);
    Mode nominal{a, b, i3};
    Mode faulty = nominal;
    if (fault == AdmireFault::Drift) {
        faulty.A = a - 1.5 * i3;
    } else {
        faulty.C = Matrix::Zero(3, 3);
        faulty.C(0, 0) = 1.0;
    }
    return SwitchedModel({nominal, faulty}, horizon);
}

}  // namespace psls
