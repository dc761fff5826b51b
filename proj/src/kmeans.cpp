#include "scedae/kmeans.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

namespace scedae {

namespace {

// Nearest-centroid assignment; ties go to the lowest centroid index.
// Fills labels and per-point squared distances (summed serially by callers
// in ascending order so totals are thread-count independent).
void assign_points(const DenseMatrix& x, const DenseMatrix& centroids,
                   std::vector<std::int32_t>& labels, std::vector<double>& sq_dist) {
    const std::size_t n = x.rows, k = centroids.rows, d = x.cols;
    labels.resize(n);
    sq_dist.resize(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double* xi = x.row(i);
        double best = std::numeric_limits<double>::infinity();
        std::int32_t best_c = 0;
        for (std::size_t c = 0; c < k; ++c) {
            const double* mc = centroids.row(c);
            double acc = 0.0;
            for (std::size_t t = 0; t < d; ++t) {
                const double diff = xi[t] - mc[t];
                acc += diff * diff;
            }
            if (acc < best) {
                best = acc;
                best_c = static_cast<std::int32_t>(c);
            }
        }
        labels[i] = best_c;
        sq_dist[i] = best;
    }
}

double sum_ascending(const std::vector<double>& v) {
    double total = 0.0;
    for (double x : v) total += x;
    return total;
}

}  // namespace

DenseMatrix kmeanspp_seed(const DenseMatrix& x, std::size_t k, SeededRng& rng) {
    const std::size_t n = x.rows, d = x.cols;
    if (k == 0) throw std::invalid_argument("kmeanspp_seed: k must be positive");
    if (k > n)
        throw std::invalid_argument("kmeanspp_seed: k=" + std::to_string(k) +
                                    " exceeds sample count " + std::to_string(n));

    DenseMatrix centroids(k, d);
    std::size_t first = rng.below(n);
    std::memcpy(centroids.row(0), x.row(first), d * sizeof(double));

    // Squared distance to the nearest centroid chosen so far.
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row(i);
        const double* c0 = centroids.row(0);
        double acc = 0.0;
        for (std::size_t t = 0; t < d; ++t) {
            const double diff = xi[t] - c0[t];
            acc += diff * diff;
        }
        d2[i] = acc;
    }

    for (std::size_t c = 1; c < k; ++c) {
        const double total = sum_ascending(d2);
        std::size_t chosen;
        if (total > 0.0) {
            const double target = rng.u01() * total;
            double cum = 0.0;
            chosen = n;  // sentinel
            std::size_t last_positive = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                cum += d2[i];
                last_positive = i;
                if (cum > target) {
                    chosen = i;
                    break;
                }
            }
            if (chosen == n) chosen = last_positive;  // rounding pushed target past cum
        } else {
            // Every point coincides with a chosen centroid; fall back to a
            // uniform draw.
            chosen = rng.below(n);
        }
        std::memcpy(centroids.row(c), x.row(chosen), d * sizeof(double));
        for (std::size_t i = 0; i < n; ++i) {
            const double* xi = x.row(i);
            const double* cc = centroids.row(c);
            double acc = 0.0;
            for (std::size_t t = 0; t < d; ++t) {
                const double diff = xi[t] - cc[t];
                acc += diff * diff;
            }
            if (acc < d2[i]) d2[i] = acc;
        }
    }
    return centroids;
}

LloydResult lloyd(const DenseMatrix& x, const DenseMatrix& init_centroids, const KMeansConfig& cfg) {
    const std::size_t n = x.rows, d = x.cols, k = init_centroids.rows;
    if (k == 0 || k > n) throw std::invalid_argument("lloyd: need 1 <= k <= sample count");
    if (init_centroids.cols != d) throw std::invalid_argument("lloyd: centroid dimension mismatch");
    if (cfg.max_iter == 0) throw std::invalid_argument("lloyd: max_iter must be positive");

    LloydResult res;
    res.centroids = init_centroids;
    std::vector<std::int32_t> labels;
    std::vector<double> sq_dist;

    for (std::size_t iter = 1; iter <= cfg.max_iter; ++iter) {
        res.iterations = iter;
        assign_points(x, res.centroids, labels, sq_dist);

        // Means of the assigned points, accumulated in ascending point order.
        DenseMatrix next(k, d, 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = static_cast<std::size_t>(labels[i]);
            const double* xi = x.row(i);
            double* nc = next.row(c);
            for (std::size_t t = 0; t < d; ++t) nc[t] += xi[t];
            ++counts[c];
        }
        std::vector<bool> taken(n, false);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                const double inv = 1.0 / static_cast<double>(counts[c]);
                double* nc = next.row(c);
                for (std::size_t t = 0; t < d; ++t) nc[t] *= inv;
            } else {
                // Re-seed an emptied cluster at the point currently farthest
                // from its own centroid (first point on ties, skipping
                // points already consumed by another empty cluster).
                std::size_t far_idx = 0;
                double far = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (taken[i]) continue;
                    if (sq_dist[i] > far) {
                        far = sq_dist[i];
                        far_idx = i;
                    }
                }
                taken[far_idx] = true;
                std::memcpy(next.row(c), x.row(far_idx), d * sizeof(double));
            }
        }

        double max_shift_sq = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double* oc = res.centroids.row(c);
            const double* nc = next.row(c);
            double acc = 0.0;
            for (std::size_t t = 0; t < d; ++t) {
                const double diff = oc[t] - nc[t];
                acc += diff * diff;
            }
            if (acc > max_shift_sq) max_shift_sq = acc;
        }
        res.centroids = std::move(next);
        if (std::sqrt(max_shift_sq) < cfg.tol) break;
    }

    // Final assignment against the converged centroids so labels, centroids,
    // and inertia describe the same state.
    assign_points(x, res.centroids, labels, sq_dist);
    res.partition.labels = std::move(labels);
    res.partition.inertia = sum_ascending(sq_dist);
    res.partition.k = k;
    return res;
}

Partition kmeans(const DenseMatrix& x, const KMeansConfig& cfg) {
    if (cfg.n_init == 0) throw std::invalid_argument("kmeans: n_init must be positive");
    const SeededRng base(cfg.seed);
    Partition best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < cfg.n_init; ++r) {
        SeededRng restart_rng = base.derive(r);
        const DenseMatrix seeds = kmeanspp_seed(x, cfg.k, restart_rng);
        LloydResult res = lloyd(x, seeds, cfg);
        if (res.partition.inertia < best.inertia) best = std::move(res.partition);
    }
    return best;
}

}  // namespace scedae
