#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "psls/error.hpp"

namespace psls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Partition of a (T+1) x (T+1) block grid.
class BlockGrid {
public:
    BlockGrid() = default;

    BlockGrid(std::vector<int> row_dims, std::vector<int> col_dims)
        : row_dims_(std::move(row_dims)), col_dims_(std::move(col_dims)) {
        if (row_dims_.empty() || row_dims_.size() != col_dims_.size())
            throw DimensionError("BlockGrid: row and column block counts must match and be non-empty");
        for (auto d : row_dims_)
            if (d < 1) throw DimensionError("BlockGrid: block dimensions must be >= 1");
        for (auto d : col_dims_)
            if (d < 1) throw DimensionError("BlockGrid: block dimensions must be >= 1");
        build_offsets();
    }

    // Uniform grid: every row block has `rows` rows, every column block `cols` columns.
    static BlockGrid uniform(int horizon, int rows, int cols) {
        if (horizon < 0) throw DimensionError("BlockGrid: horizon must be >= 0");
        return BlockGrid(std::vector<int>(horizon + 1, rows), std::vector<int>(horizon + 1, cols));
    }

    [[nodiscard]] int horizon() const { return static_cast<int>(row_dims_.size()) - 1; }
    [[nodiscard]] int blocks() const { return static_cast<int>(row_dims_.size()); }
    [[nodiscard]] int row_dim(int t) const { return row_dims_.at(t); }
    [[nodiscard]] int col_dim(int t) const { return col_dims_.at(t); }
    [[nodiscard]] int row_offset(int t) const { return row_off_.at(t); }
    [[nodiscard]] int col_offset(int t) const { return col_off_.at(t); }
    [[nodiscard]] int rows() const { return row_off_.back(); }
    [[nodiscard]] int cols() const { return col_off_.back(); }
    [[nodiscard]] const std::vector<int>& row_dims() const { return row_dims_; }
    [[nodiscard]] const std::vector<int>& col_dims() const { return col_dims_; }

    // Grid restricted to the leading (t+1) blocks.
    [[nodiscard]] BlockGrid leading(int t) const {
        return BlockGrid({row_dims_.begin(), row_dims_.begin() + t + 1},
                         {col_dims_.begin(), col_dims_.begin() + t + 1});
    }

    [[nodiscard]] BlockGrid transposed() const { return BlockGrid(col_dims_, row_dims_); }

    friend bool operator==(const BlockGrid& a, const BlockGrid& b) {
        return a.row_dims_ == b.row_dims_ && a.col_dims_ == b.col_dims_;
    }

private:
    void build_offsets() {
        row_off_.assign(row_dims_.size() + 1, 0);
        col_off_.assign(col_dims_.size() + 1, 0);
        std::partial_sum(row_dims_.begin(), row_dims_.end(), row_off_.begin() + 1);
        std::partial_sum(col_dims_.begin(), col_dims_.end(), col_off_.begin() + 1);
    }

    std::vector<int> row_dims_;
    std::vector<int> col_dims_;
    std::vector<int> row_off_{0};
    std::vector<int> col_off_{0};
};

// Block lower-triangular matrix. Blocks strictly above the block diagonal are
// held at exactly zero.
class BlockLTMatrix {
public:
    BlockLTMatrix() = default;

    explicit BlockLTMatrix(BlockGrid grid) : grid_(std::move(grid)), dense_(Matrix::Zero(grid_.rows(), grid_.cols())) {}

    BlockLTMatrix(BlockGrid grid, Matrix dense) : grid_(std::move(grid)), dense_(std::move(dense)) {
        if (dense_.rows() != grid_.rows() || dense_.cols() != grid_.cols())
            throw DimensionError("BlockLTMatrix: dense storage does not match grid");
        zero_upper();
    }

    static BlockLTMatrix identity(int horizon, int n) {
        return BlockLTMatrix(BlockGrid::uniform(horizon, n, n), Matrix::Identity(n * (horizon + 1), n * (horizon + 1)));
    }

    [[nodiscard]] const BlockGrid& grid() const { return grid_; }
    [[nodiscard]] const Matrix& dense() const { return dense_; }
    [[nodiscard]] int horizon() const { return grid_.horizon(); }
    [[nodiscard]] int rows() const { return grid_.rows(); }
    [[nodiscard]] int cols() const { return grid_.cols(); }

    [[nodiscard]] auto block(int t, int tau) const {
        return dense_.block(grid_.row_offset(t), grid_.col_offset(tau), grid_.row_dim(t), grid_.col_dim(tau));
    }

    // Writable access is limited to the lower triangle.
    void set_block(int t, int tau, const Matrix& value) {
        if (tau > t) throw StructuralError("BlockLTMatrix: cannot set a block above the diagonal");
        if (value.rows() != grid_.row_dim(t) || value.cols() != grid_.col_dim(tau))
            throw DimensionError("BlockLTMatrix: block shape mismatch");
        dense_.block(grid_.row_offset(t), grid_.col_offset(tau), value.rows(), value.cols()) = value;
    }

    // Block row t restricted to columns 0..t.
    [[nodiscard]] Matrix block_row(int t) const {
        return dense_.block(grid_.row_offset(t), 0, grid_.row_dim(t), grid_.col_offset(t + 1));
    }

    friend BlockLTMatrix operator*(const BlockLTMatrix& a, const BlockLTMatrix& b) {
        if (a.grid_.col_dims() != b.grid_.row_dims())
            throw DimensionError("BlockLTMatrix product: incompatible grids");
        return BlockLTMatrix(BlockGrid(a.grid_.row_dims(), b.grid_.col_dims()), a.dense_ * b.dense_);
    }
    friend BlockLTMatrix operator+(const BlockLTMatrix& a, const BlockLTMatrix& b) {
        if (!(a.grid_ == b.grid_)) throw DimensionError("BlockLTMatrix sum: grid mismatch");
        return BlockLTMatrix(a.grid_, a.dense_ + b.dense_);
    }
    friend BlockLTMatrix operator-(const BlockLTMatrix& a, const BlockLTMatrix& b) {
        if (!(a.grid_ == b.grid_)) throw DimensionError("BlockLTMatrix difference: grid mismatch");
        return BlockLTMatrix(a.grid_, a.dense_ - b.dense_);
    }
    friend BlockLTMatrix operator*(double s, const BlockLTMatrix& a) { return BlockLTMatrix(a.grid_, s * a.dense_); }

    [[nodiscard]] Vector operator*(const Vector& x) const { return dense_ * x; }

    // True iff every block above the diagonal is exactly zero.
    [[nodiscard]] bool is_block_lower() const {
        for (int t = 0; t < grid_.blocks(); ++t)
            for (int tau = t + 1; tau < grid_.blocks(); ++tau)
                if (block(t, tau).cwiseAbs().maxCoeff() != 0.0) return false;
        return true;
    }

private:
    void zero_upper() {
        for (int t = 0; t < grid_.blocks(); ++t) {
            const int c0 = grid_.col_offset(t + 1);
            const int ncols = grid_.cols() - c0;
            if (ncols > 0) dense_.block(grid_.row_offset(t), c0, grid_.row_dim(t), ncols).setZero();
        }
    }

    BlockGrid grid_;
    Matrix dense_;
};

class BlockDiagMatrix {
public:
    BlockDiagMatrix() = default;

    explicit BlockDiagMatrix(std::vector<Matrix> diagonal_blocks) : blocks_(std::move(diagonal_blocks)) {
        if (blocks_.empty()) throw DimensionError("BlockDiagMatrix: at least one block required");
        std::vector<int> rd, cd;
        for (const auto& b : blocks_) {
            rd.push_back(static_cast<int>(b.rows()));
            cd.push_back(static_cast<int>(b.cols()));
        }
        // Zero-sized blocks are representable in the dense form but not in a BlockGrid.
        bool positive = true;
        for (std::size_t i = 0; i < rd.size(); ++i) positive = positive && rd[i] > 0 && cd[i] > 0;
        if (positive) grid_ = BlockGrid(rd, cd);
        rows_ = std::accumulate(rd.begin(), rd.end(), 0);
        cols_ = std::accumulate(cd.begin(), cd.end(), 0);
    }

    [[nodiscard]] const BlockGrid& grid() const { return grid_; }
    [[nodiscard]] const std::vector<Matrix>& blocks() const { return blocks_; }
    [[nodiscard]] const Matrix& block(int t) const { return blocks_.at(t); }
    [[nodiscard]] int size() const { return static_cast<int>(blocks_.size()); }
    [[nodiscard]] int rows() const { return rows_; }
    [[nodiscard]] int cols() const { return cols_; }

    [[nodiscard]] Matrix dense() const {
        Matrix out = Matrix::Zero(rows_, cols_);
        int r = 0, c = 0;
        for (const auto& b : blocks_) {
            out.block(r, c, b.rows(), b.cols()) = b;
            r += static_cast<int>(b.rows());
            c += static_cast<int>(b.cols());
        }
        return out;
    }

    // Views the block-diagonal matrix as block lower-triangular on its grid.
    [[nodiscard]] BlockLTMatrix as_lower() const { return BlockLTMatrix(grid_, dense()); }

private:
    std::vector<Matrix> blocks_;
    BlockGrid grid_;
    int rows_ = 0;
    int cols_ = 0;
};

inline BlockDiagMatrix blkdiag(std::vector<Matrix> blocks) { return BlockDiagMatrix(std::move(blocks)); }

// Block downshift operator: T copies of I_n on the first block subdiagonal.
inline BlockLTMatrix downshift(int horizon, int n) {
    if (horizon < 0 || n < 1) throw DimensionError("downshift: need T >= 0 and n >= 1");
    BlockLTMatrix z(BlockGrid::uniform(horizon, n, n));
    for (int t = 1; t <= horizon; ++t) z.set_block(t, t - 1, Matrix::Identity(n, n));
    return z;
}

// Leading (t+1) x (t+1) block submatrix M(:t).
inline BlockLTMatrix truncate(const BlockLTMatrix& m, int t) {
    if (t < 0 || t > m.horizon())
        throw DimensionError("truncate: t = " + std::to_string(t) + " outside 0.." + std::to_string(m.horizon()));
    const BlockGrid sub = m.grid().leading(t);
    return BlockLTMatrix(sub, m.dense().topLeftCorner(sub.rows(), sub.cols()));
}

// Inverse of a block unit lower-triangular matrix by block forward substitution.
inline BlockLTMatrix invert_unit_lower(const BlockLTMatrix& m, double tol = 1e-12) {
    const BlockGrid& g = m.grid();
    if (g.row_dims() != g.col_dims()) throw StructuralError("invert_unit_lower: diagonal blocks must be square");
    const int nb = g.blocks();
    for (int t = 0; t < nb; ++t) {
        const Matrix d = m.block(t, t);
        if ((d - Matrix::Identity(d.rows(), d.cols())).cwiseAbs().maxCoeff() > tol)
            throw StructuralError("invert_unit_lower: diagonal block " + std::to_string(t) + " is not the identity");
    }
    // X = M^{-1}; row block t: X(t,tau) = -sum_{k=tau}^{t-1} M(t,k) X(k,tau) for tau < t, X(t,t) = I.
    BlockLTMatrix x(g);
    for (int t = 0; t < nb; ++t) {
        x.set_block(t, t, Matrix::Identity(g.row_dim(t), g.row_dim(t)));
        for (int tau = 0; tau < t; ++tau) {
            Matrix acc = Matrix::Zero(g.row_dim(t), g.col_dim(tau));
            for (int k = tau; k < t; ++k) acc.noalias() -= m.block(t, k) * x.block(k, tau);
            x.set_block(t, tau, acc);
        }
    }
    return x;
}

}  // namespace psls
