#include "scedae/anchor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "scedae/kernels.hpp"

namespace scedae {

BandwidthMode bandwidth_mode_from_string(const std::string& s) {
    if (s == "per_point_mean") return BandwidthMode::per_point_mean;
    if (s == "global_fixed") return BandwidthMode::global_fixed;
    throw std::invalid_argument("unknown bandwidth mode '" + s +
                                "' (expected per_point_mean or global_fixed)");
}

std::string to_string(BandwidthMode mode) {
    switch (mode) {
        case BandwidthMode::per_point_mean: return "per_point_mean";
        case BandwidthMode::global_fixed: return "global_fixed";
    }
    throw std::logic_error("invalid BandwidthMode");
}

LandmarkSet select_landmarks(const DenseMatrix& y, std::size_t p, SeededRng rng) {
    if (p == 0) throw std::invalid_argument("select_landmarks: p must be positive");
    if (p > y.rows)
        throw std::invalid_argument("select_landmarks: p=" + std::to_string(p) +
                                    " exceeds sample count " + std::to_string(y.rows));
    KMeansConfig cfg;
    cfg.k = p;
    cfg.n_init = 1;  // one seeded pass is enough for landmark placement
    cfg.seed = rng.key();
    DenseMatrix seeds = kmeanspp_seed(y, p, rng);
    LloydResult res = lloyd(y, seeds, cfg);
    LandmarkSet set;
    set.u = std::move(res.centroids);
    set.u.require_finite("select_landmarks");
    return set;
}

AffinityBuild build_z(const DenseMatrix& y, const LandmarkSet& landmarks, const AnchorConfig& cfg) {
    const std::size_t n = y.rows, p = landmarks.u.rows, d = y.cols;
    if (n == 0) throw std::invalid_argument("build_z: empty input");
    if (landmarks.u.cols != d)
        throw std::invalid_argument("build_z: encoding and landmark dimensions disagree");
    if (p != cfg.p)
        throw std::invalid_argument("build_z: landmark count " + std::to_string(p) +
                                    " differs from configured p=" + std::to_string(cfg.p));
    if (cfg.r == 0 || cfg.r > p)
        throw std::invalid_argument("build_z: need 1 <= r <= p, got r=" + std::to_string(cfg.r) +
                                    ", p=" + std::to_string(p));
    if (cfg.bandwidth_mode == BandwidthMode::global_fixed && !(cfg.sigma > 0.0))
        throw std::invalid_argument("build_z: global_fixed requires sigma > 0");

    const std::size_t r = cfg.r;
    AffinityBuild out;
    out.z.rows = n;
    out.z.cols = p;
    out.z.row_offsets.assign(n + 1, 0);
    out.z.col_indices.assign(n * r, 0);
    out.z.values.assign(n * r, 0.0);
    out.sigma_used.assign(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) out.z.row_offsets[i] = i * r;

    std::string error_msg;  // first row-level failure, reported after the loop
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double* yi = y.row(i);

        // All squared landmark distances, then the r nearest by
        // (distance, index) so ties pick the lower landmark index.
        std::vector<std::pair<double, std::size_t>> dist(p);
        for (std::size_t j = 0; j < p; ++j) {
            const double* uj = landmarks.u.row(j);
            double acc = 0.0;
            for (std::size_t t = 0; t < d; ++t) {
                const double diff = yi[t] - uj[t];
                acc += diff * diff;
            }
            dist[j] = {acc, j};
        }
        std::partial_sort(dist.begin(), dist.begin() + r, dist.end());
        std::sort(dist.begin(), dist.begin() + r,
                  [](const auto& a, const auto& b) { return a.second < b.second; });

        double sigma;
        if (cfg.bandwidth_mode == BandwidthMode::per_point_mean) {
            double mean_dist = 0.0;
            for (std::size_t t = 0; t < r; ++t) mean_dist += std::sqrt(dist[t].first);
            sigma = mean_dist / static_cast<double>(r);
        } else {
            sigma = cfg.sigma;
        }
        out.sigma_used[i] = sigma;

        double* vals = out.z.values.data() + i * r;
        std::size_t* cols = out.z.col_indices.data() + i * r;
        for (std::size_t t = 0; t < r; ++t) cols[t] = dist[t].second;

        if (sigma == 0.0) {
            // All r distances are zero: degenerate bandwidth, uniform weights.
            for (std::size_t t = 0; t < r; ++t) vals[t] = 1.0 / static_cast<double>(r);
            continue;
        }
        // Shift exponents so the nearest landmark has weight exp(0)=1; this
        // only cancels in the normalization but keeps the sum well scaled.
        double min_sq = dist[0].first;
        for (std::size_t t = 1; t < r; ++t) min_sq = std::min(min_sq, dist[t].first);
        double sum = 0.0;
        for (std::size_t t = 0; t < r; ++t) {
            vals[t] = std::exp(-(dist[t].first - min_sq) / (2.0 * sigma * sigma));
            sum += vals[t];
        }
        bool underflow = false;
        for (std::size_t t = 0; t < r; ++t) {
            vals[t] /= sum;
            if (vals[t] == 0.0) underflow = true;
        }
        if (underflow) {
#pragma omp critical
            if (error_msg.empty())
                error_msg = "build_z: affinity underflow at row " + std::to_string(i) +
                            " (bandwidth too small for the distance spread)";
        }
    }
    if (!error_msg.empty()) throw std::runtime_error(error_msg);
    return out;
}

SparseRowMatrix normalize_z(const SparseRowMatrix& z) {
    for (double v : z.values)
        if (v < 0.0) throw std::invalid_argument("normalize_z: negative entry");

    // Column sums of z, accumulated in ascending row order.
    std::vector<double> col_sum(z.cols, 0.0);
    for (std::size_t i = 0; i < z.rows; ++i)
        for (std::size_t t = z.row_offsets[i]; t < z.row_offsets[i + 1]; ++t)
            col_sum[z.col_indices[t]] += z.values[t];

    std::vector<double> scale(z.cols, 0.0);
    for (std::size_t j = 0; j < z.cols; ++j)
        if (col_sum[j] > 0.0) scale[j] = 1.0 / std::sqrt(col_sum[j]);

    SparseRowMatrix out = z;
    const std::int64_t n = static_cast<std::int64_t>(z.rows);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        for (std::size_t t = z.row_offsets[static_cast<std::size_t>(i)];
             t < z.row_offsets[static_cast<std::size_t>(i) + 1]; ++t)
            out.values[t] = z.values[t] * scale[z.col_indices[t]];
    return out;
}

SparseAffinity build_affinity(const DenseMatrix& y, const AnchorConfig& cfg, SeededRng rng) {
    SparseAffinity out;
    out.landmarks = select_landmarks(y, cfg.p, rng);
    AffinityBuild built = build_z(y, out.landmarks, cfg);
    out.z_hat = normalize_z(built.z);
    out.sigma_used = std::move(built.sigma_used);
    return out;
}

void dump_triplets(const SparseRowMatrix& z, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    std::ostringstream text;
    text.precision(17);
    for (std::size_t i = 0; i < z.rows; ++i)
        for (std::size_t t = z.row_offsets[i]; t < z.row_offsets[i + 1]; ++t)
            text << i << ' ' << z.col_indices[t] << ' ' << z.values[t] << '\n';
    out << text.str();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace scedae
