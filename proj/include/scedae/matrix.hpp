#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace scedae {

/// Row-major dense matrix of 64-bit reals.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), values(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

    double* row(std::size_t i) { return values.data() + i * cols; }
    const double* row(std::size_t i) const { return values.data() + i * cols; }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void require_finite(const std::string& what) const {
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                if (!std::isfinite((*this)(i, j)))
                    throw std::runtime_error(what + ": non-finite entry at row " +
                                             std::to_string(i) + ", column " + std::to_string(j));
    }
};

/// Compressed-sparse-row matrix. Within each row column indices are strictly
/// increasing and no explicit zeros are stored.
struct SparseRowMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_offsets;  // length rows+1, row_offsets[0] == 0
    std::vector<std::size_t> col_indices;
    std::vector<double> values;

    SparseRowMatrix() : row_offsets(1, 0) {}
    SparseRowMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), row_offsets(r + 1, 0) {}

    std::size_t nnz() const { return values.size(); }

    /// Builds from per-row (column, value) lists. Entries are sorted by
    /// column; duplicates are an error and zeros are dropped.
    static SparseRowMatrix from_rows(std::size_t rows, std::size_t cols,
                                     std::vector<std::vector<std::pair<std::size_t, double>>> entries);

    DenseMatrix to_dense() const;

    /// Checks the CSR structural invariants, throws on violation.
    void validate() const;
};

inline SparseRowMatrix SparseRowMatrix::from_rows(
    std::size_t rows, std::size_t cols,
    std::vector<std::vector<std::pair<std::size_t, double>>> entries) {
    if (entries.size() != rows) throw std::invalid_argument("from_rows: row count mismatch");
    SparseRowMatrix z(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        auto& row = entries[i];
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t t = 0; t < row.size(); ++t) {
            const auto& [c, v] = row[t];
            if (c >= cols) throw std::invalid_argument("from_rows: column index out of range");
            if (t > 0 && row[t - 1].first == c)
                throw std::invalid_argument("from_rows: duplicate column in row " + std::to_string(i));
            if (v == 0.0) continue;
            z.col_indices.push_back(c);
            z.values.push_back(v);
        }
        z.row_offsets[i + 1] = z.values.size();
    }
    return z;
}

inline DenseMatrix SparseRowMatrix::to_dense() const {
    DenseMatrix d(rows, cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t t = row_offsets[i]; t < row_offsets[i + 1]; ++t)
            d(i, col_indices[t]) = values[t];
    return d;
}

inline void SparseRowMatrix::validate() const {
    if (row_offsets.size() != rows + 1 || row_offsets[0] != 0 || row_offsets[rows] != nnz())
        throw std::logic_error("SparseRowMatrix: bad row_offsets");
    for (std::size_t i = 0; i < rows; ++i) {
        if (row_offsets[i] > row_offsets[i + 1]) throw std::logic_error("SparseRowMatrix: offsets not monotone");
        for (std::size_t t = row_offsets[i]; t < row_offsets[i + 1]; ++t) {
            if (col_indices[t] >= cols) throw std::logic_error("SparseRowMatrix: column out of range");
            if (t > row_offsets[i] && col_indices[t - 1] >= col_indices[t])
                throw std::logic_error("SparseRowMatrix: columns not strictly increasing");
            if (values[t] == 0.0) throw std::logic_error("SparseRowMatrix: stored explicit zero");
        }
    }
}

}  // namespace scedae
