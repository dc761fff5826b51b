#pragma once

#include <cstdint>
#include <vector>

#include "scedae/matrix.hpp"

namespace scedae {

/// Minimum-cost perfect matching on a rectangular cost matrix (rows are
/// zero-padded or columns zero-padded internally to make it square).
/// col_of_row[i] is the matched column for row i, or -1 when the row was
/// matched to a padding column.
struct Assignment {
    std::vector<std::int32_t> col_of_row;
    double cost = 0.0;
};

Assignment hungarian(const DenseMatrix& cost);

/// Cross-tabulation of two labelings over the same points. Label values are
/// compacted: row r of counts corresponds to pred_values[r] (ascending),
/// column c to truth_values[c].
struct Contingency {
    std::vector<std::int32_t> pred_values;
    std::vector<std::int32_t> truth_values;
    DenseMatrix counts;  // |pred_values| x |truth_values|
    std::size_t n = 0;
};

Contingency contingency(const std::vector<std::int32_t>& pred,
                        const std::vector<std::int32_t>& truth);

/// Clustering accuracy: best one-to-one matching of predicted clusters to
/// true classes (Hungarian on negated contingency counts), in [0, 1].
double accuracy(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth);

/// Normalized mutual information with geometric-mean normalization,
/// natural logarithms. Two constant labelings give 1; exactly one constant
/// labeling gives 0. Result clamped to [0, 1].
double nmi(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth);

/// Adjusted Rand index via pair counting. Degenerate cases where the
/// expected and maximum index coincide give 1.
double ari(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth);

}  // namespace scedae
