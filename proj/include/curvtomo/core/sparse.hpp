#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/parallel.hpp"

namespace curvtomo {

/// Accumulates (column, value) contributions for one matrix row; duplicate
/// columns are merged by finish().
class RowAccumulator {
  public:
    void add(std::uint32_t col, double value) { entries_.emplace_back(col, value); }
    void clear() { entries_.clear(); }

    /// Sorts by column and sums duplicates. Entries are summed in insertion
    /// order within a column, so the result is deterministic.
    std::vector<std::pair<std::uint32_t, double>> finish() {
        std::stable_sort(entries_.begin(), entries_.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::pair<std::uint32_t, double>> merged;
        for (const auto& e : entries_) {
            if (!merged.empty() && merged.back().first == e.first)
                merged.back().second += e.second;
            else
                merged.push_back(e);
        }
        entries_.clear();
        return merged;
    }

  private:
    std::vector<std::pair<std::uint32_t, double>> entries_;
};

/// Compressed sparse row matrix.
class SparseMatrix {
  public:
    SparseMatrix() = default;

    /// Builds the matrix from per-row entry lists (already merged).
    SparseMatrix(std::size_t rows, std::size_t cols,
                 const std::vector<std::vector<std::pair<std::uint32_t, double>>>& row_entries)
        : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {
        if (row_entries.size() != rows) throw ArgumentError("SparseMatrix: row count mismatch");
        for (std::size_t r = 0; r < rows; ++r) row_ptr_[r + 1] = row_ptr_[r] + row_entries[r].size();
        col_.resize(row_ptr_.back());
        val_.resize(row_ptr_.back());
        for (std::size_t r = 0; r < rows; ++r) {
            std::size_t k = row_ptr_[r];
            for (const auto& [c, v] : row_entries[r]) {
                if (c >= cols) throw ArgumentError("SparseMatrix: column out of range");
                col_[k] = c;
                val_[k] = v;
                ++k;
            }
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nonzeros() const { return val_.size(); }

    /// y = A x
    void apply(std::span<const double> x, std::span<double> y) const {
        if (x.size() != cols_ || y.size() != rows_) throw ArgumentError("SparseMatrix::apply: size mismatch");
        parallel_for(rows_, [&](std::size_t r) {
            double s = 0.0;
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += val_[k] * x[col_[k]];
            y[r] = s;
        });
    }

    /// y = A^T x. Row ranges are reduced into fixed chunks and summed in
    /// chunk order, so the result is independent of the thread count.
    void apply_transpose(std::span<const double> x, std::span<double> y) const {
        if (x.size() != rows_ || y.size() != cols_)
            throw ArgumentError("SparseMatrix::apply_transpose: size mismatch");
        std::vector<std::vector<double>> partial(kReductionChunks);
        for_each_chunk(rows_, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            auto& acc = partial[chunk];
            acc.assign(cols_, 0.0);
            for (std::size_t r = begin; r < end; ++r) {
                const double xr = x[r];
                if (xr == 0.0) continue;
                for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc[col_[k]] += val_[k] * xr;
            }
        });
        std::fill(y.begin(), y.end(), 0.0);
        for (const auto& acc : partial) {
            if (acc.empty()) continue;
            for (std::size_t c = 0; c < cols_; ++c) y[c] += acc[c];
        }
    }

    /// Entries of row r as parallel spans.
    std::span<const std::uint32_t> row_cols(std::size_t r) const {
        return {col_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }
    std::span<const double> row_values(std::size_t r) const {
        return {val_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::uint32_t> col_;
    std::vector<double> val_;
};

/// Builds a sparse matrix row by row in parallel. fill(row, acc) adds the
/// contributions of one row to the accumulator.
template <class Fill>
SparseMatrix build_sparse_rows(std::size_t rows, std::size_t cols, Fill&& fill) {
    std::vector<std::vector<std::pair<std::uint32_t, double>>> entries(rows);
    parallel_for(rows, [&](std::size_t r) {
        RowAccumulator acc;
        fill(r, acc);
        entries[r] = acc.finish();
    });
    return SparseMatrix(rows, cols, entries);
}

}  // namespace curvtomo
