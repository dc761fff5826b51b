#include "scedae/spectral_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "scedae/ensemble.hpp"
#include "scedae/kernels.hpp"

namespace scedae {

namespace {

// Verify near-symmetry, then make it exact so the rotations below see a
// bitwise-symmetric matrix.
void symmetrize_checked(DenseMatrix& a) {
    if (a.rows != a.cols) {
        throw std::invalid_argument("jacobi_eigensym: matrix is " + std::to_string(a.rows) +
                                    " x " + std::to_string(a.cols) + ", expected square");
    }
    double scale = 0.0;
    for (double v : a.values) scale = std::max(scale, std::abs(v));
    const double tol = 1e-8 * std::max(1.0, scale);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = i + 1; j < a.cols; ++j) {
            const double d = std::abs(a(i, j) - a(j, i));
            if (!(d <= tol)) {
                throw std::invalid_argument("jacobi_eigensym: entries (" + std::to_string(i) +
                                            "," + std::to_string(j) + ") and transpose differ by " +
                                            std::to_string(d) + "; matrix is not symmetric");
            }
            const double mean = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = mean;
            a(j, i) = mean;
        }
    }
}

double offdiag_norm(const DenseMatrix& a) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = i + 1; j < a.cols; ++j) {
            sq += 2.0 * a(i, j) * a(i, j);
        }
    }
    return std::sqrt(sq);
}

}  // namespace

SymEig jacobi_eigensym(DenseMatrix a) {
    symmetrize_checked(a);
    a.require_finite("jacobi_eigensym input");
    const std::size_t n = a.rows;

    DenseMatrix v(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    if (n > 1) {
        double total = 0.0;
        for (double x : a.values) total += x * x;
        total = std::sqrt(total);
        const double target = 1e-13 * std::max(1.0, total);

        constexpr int kMaxSweeps = 60;
        int sweep = 0;
        while (offdiag_norm(a) > target) {
            if (++sweep > kMaxSweeps) {
                throw std::runtime_error("jacobi_eigensym: no convergence after " +
                                         std::to_string(kMaxSweeps) + " sweeps (n = " +
                                         std::to_string(n) + ")");
            }
            // Per-sweep threshold: skip rotations that cannot move the
            // off-diagonal mass meaningfully, but never skip everything
            // while the convergence test still fails.
            const double skip = target / static_cast<double>(n);
            for (std::size_t p = 0; p < n - 1; ++p) {
                for (std::size_t q = p + 1; q < n; ++q) {
                    const double apq = a(p, q);
                    if (std::abs(apq) <= skip) continue;

                    // Stable rotation: tan(2 phi) = 2 a_pq / (a_pp - a_qq).
                    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                    const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                     (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    const double c = 1.0 / std::sqrt(t * t + 1.0);
                    const double s = t * c;
                    const double tau = s / (1.0 + c);

                    const double delta = t * apq;
                    a(p, p) -= delta;
                    a(q, q) += delta;
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        if (i == p || i == q) continue;
                        const double aip = a(i, p);
                        const double aiq = a(i, q);
                        a(i, p) = aip - s * (aiq + tau * aip);
                        a(i, q) = aiq + s * (aip - tau * aiq);
                        a(p, i) = a(i, p);
                        a(q, i) = a(i, q);
                    }
                    for (std::size_t i = 0; i < n; ++i) {
                        const double vip = v(i, p);
                        const double viq = v(i, q);
                        v(i, p) = vip - s * (viq + tau * vip);
                        v(i, q) = viq + s * (vip - tau * viq);
                    }
                }
            }
        }
    }

    // Sort eigenpairs by descending eigenvalue; ties keep the lower original
    // index first so results are reproducible.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&a](std::size_t lhs, std::size_t rhs) { return a(lhs, lhs) > a(rhs, rhs); });

    SymEig out;
    out.eigenvalues.resize(n);
    out.eigenvectors = DenseMatrix(n, n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        out.eigenvalues[c] = a(src, src);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, c) = v(i, src);
    }
    return out;
}

DenseSimilarity dense_normalized_similarity(const DenseMatrix& x, double sigma) {
    if (x.rows == 0) {
        throw std::invalid_argument("dense_normalized_similarity: empty input");
    }
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("dense_normalized_similarity: sigma must be positive, got " +
                                    std::to_string(sigma));
    }
    const std::size_t n = x.rows;
    const DenseMatrix d2 = serial_ref::pairwise_sq_dists(x, x);

    DenseMatrix k(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            k(i, j) = gaussian_kernel(std::max(0.0, d2(i, j)), sigma);
        }
    }
    std::vector<double> inv_sqrt_degree(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < n; ++j) deg += k(i, j);
        if (!(deg > 0.0)) {
            throw std::runtime_error("dense_normalized_similarity: zero degree at row " +
                                     std::to_string(i));
        }
        inv_sqrt_degree[i] = 1.0 / std::sqrt(deg);
    }
    DenseSimilarity out;
    out.s = DenseMatrix(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out.s(i, j) = inv_sqrt_degree[i] * k(i, j) * inv_sqrt_degree[j];
        }
    }
    return out;
}

double median_pairwise_distance(const DenseMatrix& x) {
    if (x.rows < 2) {
        throw std::invalid_argument("median_pairwise_distance: need at least 2 rows, got " +
                                    std::to_string(x.rows));
    }
    const DenseMatrix d2 = serial_ref::pairwise_sq_dists(x, x);
    std::vector<double> dists;
    dists.reserve(x.rows * (x.rows - 1) / 2);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = i + 1; j < x.rows; ++j) {
            dists.push_back(std::sqrt(std::max(0.0, d2(i, j))));
        }
    }
    std::sort(dists.begin(), dists.end());
    const std::size_t m = dists.size();
    if (m % 2 == 1) return dists[m / 2];
    return 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
}

DenseEmbedding dense_embedding(const DenseMatrix& s, std::size_t k) {
    if (s.rows != s.cols) {
        throw std::invalid_argument("dense_embedding: similarity must be square");
    }
    if (k == 0 || k > s.rows) {
        throw std::invalid_argument("dense_embedding: k = " + std::to_string(k) +
                                    " out of range for n = " + std::to_string(s.rows));
    }
    const SymEig eig = jacobi_eigensym(s);
    DenseEmbedding out;
    out.b = DenseMatrix(s.rows, k, 0.0);
    out.eigenvalues.assign(eig.eigenvalues.begin(),
                           eig.eigenvalues.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t i = 0; i < s.rows; ++i) {
        for (std::size_t c = 0; c < k; ++c) out.b(i, c) = eig.eigenvectors(i, c);
    }
    fix_column_signs(out.b);
    return out;
}

DenseSpectralResult dense_spectral_clustering(const DenseSimilarity& s, std::size_t k,
                                              const KMeansConfig& kmeans_cfg,
                                              bool renormalize_rows) {
    DenseEmbedding emb = dense_embedding(s.s, k);
    DenseSpectralResult out;
    out.b = emb.b;
    out.eigenvalues = std::move(emb.eigenvalues);

    DenseMatrix features = out.b;
    if (renormalize_rows) features = serial_ref::row_l2_normalize(features);

    KMeansConfig cfg = kmeans_cfg;
    cfg.k = k;
    out.partition = kmeans(features, cfg);
    return out;
}

DenseSimilarity dense_ensemble_similarity(const std::vector<SparseAffinity>& affinities) {
    if (affinities.empty()) {
        throw std::invalid_argument("dense_ensemble_similarity: no ensemble members");
    }
    const std::size_t n = affinities.front().z_hat.rows;
    if (n > 2000) {
        throw std::invalid_argument("dense_ensemble_similarity: limited to 2000 rows, got " +
                                    std::to_string(n));
    }
    for (const SparseAffinity& a : affinities) {
        if (a.z_hat.rows != n) {
            throw std::invalid_argument(
                "dense_ensemble_similarity: members disagree on row count (" + std::to_string(n) +
                " vs " + std::to_string(a.z_hat.rows) + ")");
        }
    }
    const double inv_m = 1.0 / static_cast<double>(affinities.size());
    DenseSimilarity out;
    out.s = DenseMatrix(n, n, 0.0);
    for (const SparseAffinity& a : affinities) {
        const DenseMatrix part = serial_ref::sparse_aat(a.z_hat);
        for (std::size_t idx = 0; idx < out.s.values.size(); ++idx) {
            out.s.values[idx] += inv_m * part.values[idx];
        }
    }
    return out;
}

}  // namespace scedae
