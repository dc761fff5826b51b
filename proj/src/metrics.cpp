#include "scedae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace scedae {

namespace {

void check_pair(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth,
                const char* who) {
    if (pred.empty()) {
        throw std::invalid_argument(std::string(who) + ": empty labelings");
    }
    if (pred.size() != truth.size()) {
        throw std::invalid_argument(std::string(who) + ": length mismatch (" +
                                    std::to_string(pred.size()) + " vs " +
                                    std::to_string(truth.size()) + ")");
    }
}

double entropy_nats(const std::vector<double>& cluster_sizes, double n) {
    double h = 0.0;
    for (double c : cluster_sizes) {
        if (c > 0.0) {
            const double p = c / n;
            h -= p * std::log(p);
        }
    }
    return h;
}

double pairs_of(double c) { return 0.5 * c * (c - 1.0); }

}  // namespace

Assignment hungarian(const DenseMatrix& cost) {
    if (cost.rows == 0 || cost.cols == 0) {
        throw std::invalid_argument("hungarian: empty cost matrix");
    }
    cost.require_finite("hungarian cost");
    const std::size_t side = std::max(cost.rows, cost.cols);

    // Zero-padded square copy, 1-indexed for the potential method below.
    auto at = [&cost](std::size_t i, std::size_t j) -> double {
        return (i < cost.rows && j < cost.cols) ? cost(i, j) : 0.0;
    };

    // Kuhn's algorithm with row/column potentials, O(side^3).
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(side + 1, 0.0), v(side + 1, 0.0), minv(side + 1, 0.0);
    std::vector<std::size_t> row_of_col(side + 1, 0), way(side + 1, 0);
    std::vector<char> used(side + 1, 0);

    for (std::size_t i = 1; i <= side; ++i) {
        row_of_col[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = row_of_col[j0];
            std::size_t j1 = 0;
            double delta = kInf;
            for (std::size_t j = 1; j <= side; ++j) {
                if (used[j]) continue;
                const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= side; ++j) {
                if (used[j]) {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of_col[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    Assignment out;
    out.col_of_row.assign(cost.rows, -1);
    for (std::size_t j = 1; j <= side; ++j) {
        const std::size_t i = row_of_col[j] - 1;
        if (i < cost.rows && j - 1 < cost.cols) {
            out.col_of_row[i] = static_cast<std::int32_t>(j - 1);
            out.cost += cost(i, j - 1);
        }
    }
    return out;
}

Contingency contingency(const std::vector<std::int32_t>& pred,
                        const std::vector<std::int32_t>& truth) {
    check_pair(pred, truth, "contingency");

    std::map<std::int32_t, std::size_t> pred_index, truth_index;
    for (std::int32_t v : pred) pred_index.emplace(v, 0);
    for (std::int32_t v : truth) truth_index.emplace(v, 0);
    Contingency out;
    for (auto& [value, idx] : pred_index) {
        idx = out.pred_values.size();
        out.pred_values.push_back(value);
    }
    for (auto& [value, idx] : truth_index) {
        idx = out.truth_values.size();
        out.truth_values.push_back(value);
    }

    out.n = pred.size();
    out.counts = DenseMatrix(out.pred_values.size(), out.truth_values.size(), 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        out.counts(pred_index[pred[i]], truth_index[truth[i]]) += 1.0;
    }
    return out;
}

double accuracy(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth) {
    check_pair(pred, truth, "accuracy");
    const Contingency table = contingency(pred, truth);

    DenseMatrix negated = table.counts;
    for (double& v : negated.values) v = -v;
    const Assignment match = hungarian(negated);

    return -match.cost / static_cast<double>(table.n);
}

double nmi(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth) {
    check_pair(pred, truth, "nmi");
    const Contingency table = contingency(pred, truth);
    const double n = static_cast<double>(table.n);

    std::vector<double> row_sums(table.counts.rows, 0.0), col_sums(table.counts.cols, 0.0);
    for (std::size_t i = 0; i < table.counts.rows; ++i) {
        for (std::size_t j = 0; j < table.counts.cols; ++j) {
            row_sums[i] += table.counts(i, j);
            col_sums[j] += table.counts(i, j);
        }
    }
    const double h_pred = entropy_nats(row_sums, n);
    const double h_truth = entropy_nats(col_sums, n);
    if (h_pred == 0.0 && h_truth == 0.0) return 1.0;
    if (h_pred == 0.0 || h_truth == 0.0) return 0.0;

    double mutual = 0.0;
    for (std::size_t i = 0; i < table.counts.rows; ++i) {
        for (std::size_t j = 0; j < table.counts.cols; ++j) {
            const double nij = table.counts(i, j);
            if (nij > 0.0) {
                mutual += (nij / n) * std::log(n * nij / (row_sums[i] * col_sums[j]));
            }
        }
    }
    return std::clamp(mutual / std::sqrt(h_pred * h_truth), 0.0, 1.0);
}

double ari(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth) {
    check_pair(pred, truth, "ari");
    if (pred.size() < 2) return 1.0;
    const Contingency table = contingency(pred, truth);
    const double n = static_cast<double>(table.n);

    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    std::vector<double> row_sums(table.counts.rows, 0.0), col_sums(table.counts.cols, 0.0);
    for (std::size_t i = 0; i < table.counts.rows; ++i) {
        for (std::size_t j = 0; j < table.counts.cols; ++j) {
            const double nij = table.counts(i, j);
            sum_cells += pairs_of(nij);
            row_sums[i] += nij;
            col_sums[j] += nij;
        }
    }
    for (double r : row_sums) sum_rows += pairs_of(r);
    for (double c : col_sums) sum_cols += pairs_of(c);

    const double expected = sum_rows * sum_cols / pairs_of(n);
    const double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum == expected) return 1.0;
    return (sum_cells - expected) / (maximum - expected);
}

}  // namespace scedae
