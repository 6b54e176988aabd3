#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "psls/blockmat.hpp"
#include "psls/error.hpp"
#include "psls/language.hpp"
#include "psls/system.hpp"

namespace psls {

// The four closed-loop maps from stacked (w, v) to stacked (x, u).
struct SystemResponse {
    BlockLTMatrix xx;  // n(T+1) x n(T+1)
    BlockLTMatrix xy;  // n(T+1) x m(T+1)
    BlockLTMatrix ux;  // p(T+1) x n(T+1)
    BlockLTMatrix uy;  // p(T+1) x m(T+1)

    [[nodiscard]] int horizon() const { return xx.horizon(); }

    // [[xx, xy], [ux, uy]] as one dense matrix.
    [[nodiscard]] Matrix dense() const {
        Matrix out(xx.rows() + ux.rows(), xx.cols() + xy.cols());
        out << xx.dense(), xy.dense(), ux.dense(), uy.dense();
        return out;
    }

    // State part [xx, xy].
    [[nodiscard]] Matrix state_map() const {
        Matrix out(xx.rows(), xx.cols() + xy.cols());
        out << xx.dense(), xy.dense();
        return out;
    }
};

inline BlockLTMatrix wrap_lower(const std::vector<int>& rows, const std::vector<int>& cols, Matrix dense) {
    return BlockLTMatrix(BlockGrid(rows, cols), std::move(dense));
}

inline void check_gain_shape(const SwitchedModel& model, const BlockLTMatrix& k) {
    const int T = model.horizon();
    if (k.horizon() != T || k.rows() != model.p() * (T + 1) || k.cols() != model.m() * (T + 1))
        throw DimensionError("controller must be p(T+1) x m(T+1) block lower-triangular");
}

inline SystemResponse closed_loop_response(const SwitchedModel& model, const SwitchingSignal& sigma,
                                           const BlockLTMatrix& k) {
    check_gain_shape(model, k);
    const int T = model.horizon(), n = model.n(), p = model.p(), m = model.m();
    const auto st = stack_dynamics(model, sigma);
    const Matrix z = downshift(T, n).dense();
    const Matrix a = st.A.dense(), b = st.B.dense(), c = st.C.dense();
    const Matrix& kd = k.dense();
    const std::vector<int> nd(T + 1, n), pd(T + 1, p), md(T + 1, m);

    const Matrix closed = Matrix::Identity(n * (T + 1), n * (T + 1)) - z * (a + b * kd * c);
    const BlockLTMatrix xx = invert_unit_lower(wrap_lower(nd, nd, closed), 1e-9);
    const Matrix zbk = z * b * kd;
    const Matrix xy = xx.dense() * zbk;
    const Matrix ux = kd * c * xx.dense();
    const Matrix uy = kd + ux * zbk;
    return {xx, wrap_lower(nd, md, xy), wrap_lower(pd, nd, ux), wrap_lower(pd, md, uy)};
}

// Max-abs residual of the two affine constraints characterizing achievable responses.
inline double check_affine(const SystemResponse& phi, const SwitchedModel& model, const SwitchingSignal& sigma) {
    const int T = model.horizon(), n = model.n(), p = model.p(), m = model.m();
    if (phi.horizon() != T || phi.xx.rows() != n * (T + 1) || phi.uy.rows() != p * (T + 1) ||
        phi.uy.cols() != m * (T + 1))
        throw DimensionError("check_affine: response dimensions do not match the model");
    const auto st = stack_dynamics(model, sigma);
    const Matrix z = downshift(T, n).dense();
    const Matrix ia = Matrix::Identity(n * (T + 1), n * (T + 1)) - z * st.A.dense();
    const Matrix zb = z * st.B.dense();
    const Matrix c = st.C.dense();

    const Matrix r1 = ia * phi.xx.dense() - zb * phi.ux.dense() - Matrix::Identity(n * (T + 1), n * (T + 1));
    const Matrix r2 = ia * phi.xy.dense() - zb * phi.uy.dense();
    const Matrix r3 = phi.xx.dense() * ia - phi.xy.dense() * c - Matrix::Identity(n * (T + 1), n * (T + 1));
    const Matrix r4 = phi.ux.dense() * ia - phi.uy.dense() * c;
    return std::max({r1.cwiseAbs().maxCoeff(), r2.cwiseAbs().maxCoeff(), r3.cwiseAbs().maxCoeff(),
                     r4.cwiseAbs().maxCoeff()});
}

// Solves L X = R for block lower-triangular L with invertible diagonal blocks.
inline Matrix lower_block_solve(const BlockLTMatrix& l, const Matrix& rhs) {
    const BlockGrid& g = l.grid();
    Matrix x = Matrix::Zero(rhs.rows(), rhs.cols());
    for (int t = 0; t < g.blocks(); ++t) {
        Matrix acc = rhs.middleRows(g.row_offset(t), g.row_dim(t));
        for (int k = 0; k < t; ++k) acc.noalias() -= l.block(t, k) * x.middleRows(g.col_offset(k), g.col_dim(k));
        x.middleRows(g.col_offset(t), g.col_dim(t)) = Matrix(l.block(t, t)).partialPivLu().solve(acc);
    }
    return x;
}

// K = uy - ux xx^{-1} xy.
inline BlockLTMatrix recover_controller(const SystemResponse& phi) {
    const Matrix k = phi.uy.dense() - phi.ux.dense() * lower_block_solve(phi.xx, phi.xy.dense());
    return BlockLTMatrix(phi.uy.grid(), k);
}

enum class MapId { XX = 0, XY = 1, UX = 2, UY = 3 };
inline constexpr std::array<MapId, 4> kAllMaps{MapId::XX, MapId::XY, MapId::UX, MapId::UY};

// Decision-variable indexing in which every prefix-tree node owns block row
// t (its depth) of each of the four maps. A signal's response is the
// concatenation of the slabs along its path, so responses of signals that
// share a node agree on that row by construction.
class PrefixLayout {
public:
    PrefixLayout() = default;

    PrefixLayout(const SwitchedModel& model, PrefixTree tree) : tree_(std::move(tree)) {
        if (tree_.horizon() != model.horizon()) throw DimensionError("assemble_layout: tree and model horizons differ");
        n_ = model.n();
        p_ = model.p();
        m_ = model.m();
        offsets_.reserve(tree_.size());
        int off = 0;
        for (const auto& node : tree_.nodes()) {
            offsets_.push_back(off);
            off += slab_size(node.depth);
        }
        total_ = off;
    }

    [[nodiscard]] const PrefixTree& tree() const { return tree_; }
    [[nodiscard]] int variable_count() const { return total_; }
    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] int p() const { return p_; }
    [[nodiscard]] int m() const { return m_; }

    [[nodiscard]] int map_rows(MapId id) const { return (id == MapId::XX || id == MapId::XY) ? n_ : p_; }
    [[nodiscard]] int map_block_cols(MapId id) const { return (id == MapId::XX || id == MapId::UX) ? n_ : m_; }

    [[nodiscard]] int slab_size(int depth) const { return (depth + 1) * (n_ + p_) * (n_ + m_); }
    [[nodiscard]] int node_offset(int node) const { return offsets_.at(node); }

    // Offset of map `id` inside a depth-t slab. Each map row slab is stored
    // column-major: rows x (t+1)*block_cols.
    [[nodiscard]] int map_offset(MapId id, int depth) const {
        int off = 0;
        for (MapId k : kAllMaps) {
            if (k == id) return off;
            off += map_rows(k) * map_block_cols(k) * (depth + 1);
        }
        return off;
    }

    // Scalar index of entry (r, c) of block (t, tau) of map `id` owned by `node` (depth t).
    [[nodiscard]] int index(int node, MapId id, int tau, int r, int c) const {
        const int t = tree_.node(node).depth;
        const int rows = map_rows(id);
        const int col = tau * map_block_cols(id) + c;
        return offsets_[node] + map_offset(id, t) + col * rows + r;
    }

    // Slab of map `id` owned by `node`, as rows x (t+1)*block_cols.
    [[nodiscard]] Matrix slab(const Vector& z, int node, MapId id) const {
        const int t = tree_.node(node).depth;
        const int rows = map_rows(id), cols = (t + 1) * map_block_cols(id);
        return Eigen::Map<const Matrix>(z.data() + offsets_[node] + map_offset(id, t), rows, cols);
    }

    [[nodiscard]] SystemResponse reconstruct(const Vector& z, int signal) const {
        if (z.size() != total_) throw DimensionError("PrefixLayout::reconstruct: wrong variable vector length");
        const int T = tree_.horizon();
        std::array<Matrix, 4> dense;
        for (MapId id : kAllMaps)
            dense[static_cast<int>(id)] = Matrix::Zero(map_rows(id) * (T + 1), map_block_cols(id) * (T + 1));
        for (int t = 0; t <= T; ++t) {
            const int node = tree_.node_of(signal, t);
            for (MapId id : kAllMaps) {
                const Matrix s = slab(z, node, id);
                dense[static_cast<int>(id)].block(t * map_rows(id), 0, s.rows(), s.cols()) = s;
            }
        }
        const std::vector<int> nd(T + 1, n_), pd(T + 1, p_), md(T + 1, m_);
        return {wrap_lower(nd, nd, dense[0]), wrap_lower(nd, md, dense[1]), wrap_lower(pd, nd, dense[2]),
                wrap_lower(pd, md, dense[3])};
    }

    // Inverse of reconstruct for a single signal's response (rows along its path).
    void scatter(const SystemResponse& phi, int signal, Vector& z) const {
        const int T = tree_.horizon();
        const std::array<const BlockLTMatrix*, 4> maps{&phi.xx, &phi.xy, &phi.ux, &phi.uy};
        for (int t = 0; t <= T; ++t) {
            const int node = tree_.node_of(signal, t);
            for (MapId id : kAllMaps) {
                const Matrix row = maps[static_cast<int>(id)]->block_row(t);
                Eigen::Map<Matrix>(z.data() + offsets_[node] + map_offset(id, t), row.rows(), row.cols()) = row;
            }
        }
    }

private:
    PrefixTree tree_;
    std::vector<int> offsets_;
    int total_ = 0;
    int n_ = 0, p_ = 0, m_ = 0;
};

inline PrefixLayout assemble_layout(const SwitchedModel& model, const PrefixTree& tree) { return PrefixLayout(model, tree); }

// Output-feedback gains indexed by prefix-tree node: node at depth t stores
// block row t of K, i.e. K_(t,0..t).
class PrefixController {
public:
    PrefixController() = default;

    PrefixController(PrefixTree tree, int p, int m, std::vector<Matrix> rows)
        : tree_(std::move(tree)), p_(p), m_(m), rows_(std::move(rows)) {
        if (static_cast<int>(rows_.size()) != tree_.size()) throw DimensionError("PrefixController: one gain row per node");
        for (int i = 0; i < tree_.size(); ++i) {
            const int t = tree_.node(i).depth;
            if (rows_[i].rows() != p_ || rows_[i].cols() != m_ * (t + 1))
                throw DimensionError("PrefixController: gain row has the wrong shape");
        }
    }

    [[nodiscard]] const PrefixTree& tree() const { return tree_; }
    [[nodiscard]] int p() const { return p_; }
    [[nodiscard]] int m() const { return m_; }
    [[nodiscard]] int horizon() const { return tree_.horizon(); }
    [[nodiscard]] const Matrix& gain_row(int node) const { return rows_.at(node); }
    [[nodiscard]] const std::vector<Matrix>& gain_rows() const { return rows_; }

    [[nodiscard]] Matrix gain(int node, int tau) const { return rows_.at(node).middleCols(tau * m_, m_); }

    // K^sigma for the language signal with index `signal`.
    [[nodiscard]] BlockLTMatrix for_signal(int signal) const {
        const int T = horizon();
        BlockLTMatrix k(BlockGrid::uniform(T, p_, m_));
        for (int t = 0; t <= T; ++t) {
            const Matrix& row = rows_[tree_.node_of(signal, t)];
            for (int tau = 0; tau <= t; ++tau) k.set_block(t, tau, row.middleCols(tau * m_, m_));
        }
        return k;
    }

    // Node used at time t given the modes observed so far (sigma_0..sigma_t).
    [[nodiscard]] int node_for(int t, const SwitchingSignal& sigma) const {
        auto node = tree_.lookup(t, sigma.prefix(t - tree_.delay()));
        if (!node)
            throw UnknownSignalError("prefix " + SwitchingSignal::join(sigma.prefix(t - tree_.delay())) +
                                     " at time " + std::to_string(t) + " is not in the controller's tree");
        return *node;
    }

    // Builds the per-node rows from per-signal gains, verifying that signals
    // sharing a node agree on that node's row.
    static PrefixController from_signal_gains(const PrefixTree& tree, const std::vector<BlockLTMatrix>& gains,
                                              double tol = 1e-7) {
        if (static_cast<int>(gains.size()) != tree.signal_count())
            throw DimensionError("PrefixController: one gain matrix per signal");
        const int p = gains.front().grid().row_dim(0);
        const int m = gains.front().grid().col_dim(0);
        std::vector<Matrix> rows(tree.size());
        for (int i = 0; i < tree.size(); ++i) {
            const auto& node = tree.node(i);
            const int first = node.signals.front();
            rows[i] = gains[first].block_row(node.depth);
            const double scale = std::max(1.0, rows[i].cwiseAbs().maxCoeff());
            for (int s : node.signals) {
                const double diff = (gains[s].block_row(node.depth) - rows[i]).cwiseAbs().maxCoeff();
                if (diff > tol * scale)
                    throw SynthesisBugError("gain rows disagree at depth " + std::to_string(node.depth) +
                                            " between signals sharing prefix " + SwitchingSignal::join(node.key) +
                                            " (difference " + std::to_string(diff) + ")");
            }
        }
        return PrefixController(tree, p, m, std::move(rows));
    }

    // Same K for every signal.
    static PrefixController common(const PrefixTree& tree, const BlockLTMatrix& k) {
        return from_signal_gains(tree, std::vector<BlockLTMatrix>(tree.signal_count(), k), 0.0);
    }

private:
    PrefixTree tree_;
    int p_ = 0, m_ = 0;
    std::vector<Matrix> rows_;
};

// Recovers K^sigma from every signal's response and stores one gain row per node.
inline PrefixController realize_online(const std::vector<SystemResponse>& responses, const PrefixTree& tree,
                                       double tol = 1e-7) {
    std::vector<BlockLTMatrix> gains;
    gains.reserve(responses.size());
    for (const auto& phi : responses) gains.push_back(recover_controller(phi));
    return PrefixController::from_signal_gains(tree, gains, tol);
}

}  // namespace psls
