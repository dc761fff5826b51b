#include "scedae/ensemble.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "scedae/kernels.hpp"

namespace scedae {

namespace {

// Stream labels for work derived from the pipeline rng.
constexpr std::uint64_t kStreamLandmarks = 11;
constexpr std::uint64_t kStreamKMeans = 12;

}  // namespace

EnsembleAffinity concat_ensemble(const std::vector<SparseAffinity>& affinities) {
    if (affinities.empty()) throw std::invalid_argument("concat_ensemble: no affinities");
    const std::size_t m = affinities.size();
    const std::size_t n = affinities[0].z_hat.rows;

    EnsembleAffinity out;
    out.m = m;
    out.block_offsets.assign(m + 1, 0);
    std::size_t nnz = 0;
    for (std::size_t l = 0; l < m; ++l) {
        if (affinities[l].z_hat.rows != n)
            throw std::invalid_argument("concat_ensemble: affinity " + std::to_string(l) +
                                        " has " + std::to_string(affinities[l].z_hat.rows) +
                                        " rows, expected " + std::to_string(n));
        out.block_offsets[l + 1] = out.block_offsets[l] + affinities[l].z_hat.cols;
        nnz += affinities[l].z_hat.nnz();
    }

    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    SparseRowMatrix& z = out.z_bar;
    z.rows = n;
    z.cols = out.block_offsets[m];
    z.row_offsets.assign(n + 1, 0);
    z.col_indices.reserve(nnz);
    z.values.reserve(nnz);
    // Per row, blocks in ascending l keep column indices strictly increasing.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t l = 0; l < m; ++l) {
            const SparseRowMatrix& part = affinities[l].z_hat;
            const std::size_t shift = out.block_offsets[l];
            for (std::size_t t = part.row_offsets[i]; t < part.row_offsets[i + 1]; ++t) {
                z.col_indices.push_back(part.col_indices[t] + shift);
                z.values.push_back(part.values[t] * scale);
            }
        }
        z.row_offsets[i + 1] = z.values.size();
    }
    return out;
}

void fix_column_signs(DenseMatrix& b) {
    for (std::size_t j = 0; j < b.cols; ++j) {
        double best = -1.0;
        double best_value = 0.0;
        for (std::size_t i = 0; i < b.rows; ++i) {
            const double mag = std::abs(b(i, j));
            if (mag > best) {
                best = mag;
                best_value = b(i, j);
            }
        }
        if (best_value < 0.0)
            for (std::size_t i = 0; i < b.rows; ++i) b(i, j) = -b(i, j);
    }
}

SpectralEmbedding topk_left_singular(const SparseRowMatrix& z, std::size_t k) {
    const std::size_t n = z.rows, p = z.cols;
    if (k == 0) throw std::invalid_argument("topk_left_singular: k must be positive");
    if (k > p || k > n)
        throw std::invalid_argument("topk_left_singular: k=" + std::to_string(k) +
                                    " exceeds matrix bounds " + std::to_string(n) + "x" +
                                    std::to_string(p));

    const DenseMatrix gram = kernels::sparse_gram(z);

    Eigen::MatrixXd g(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = gram(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("topk_left_singular: eigendecomposition failed");

    // Eigen returns ascending eigenvalues; walk from the top.
    const auto& evals = solver.eigenvalues();
    const auto& evecs = solver.eigenvectors();
    constexpr double kPositiveTol = 1e-12;
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < evals.size(); ++i)
        if (evals(i) > kPositiveTol) ++rank;
    if (rank < k)
        throw std::runtime_error("topk_left_singular: requested k=" + std::to_string(k) +
                                 " embedding columns but the numerical rank is only " +
                                 std::to_string(rank));

    DenseMatrix v(p, k);
    SpectralEmbedding out;
    out.singular_values.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        const Eigen::Index src = evals.size() - 1 - static_cast<Eigen::Index>(c);
        out.singular_values[c] = std::sqrt(evals(src));
        for (std::size_t i = 0; i < p; ++i) v(i, c) = evecs(static_cast<Eigen::Index>(i), src);
    }

    out.b = kernels::sparse_dense(z, v);
    for (std::size_t c = 0; c < k; ++c) {
        const double inv = 1.0 / out.singular_values[c];
        for (std::size_t i = 0; i < n; ++i) out.b(i, c) *= inv;
    }
    fix_column_signs(out.b);
    out.b.require_finite("topk_left_singular");
    return out;
}

ScEdaeResult sc_edae(const EncodingSet& encodings, const std::vector<AnchorConfig>& anchor_cfgs,
                     const KMeansConfig& kmeans_cfg, std::size_t k, SeededRng rng,
                     const ScEdaeOptions& opts) {
    const std::size_t m = encodings.size();
    if (m == 0) throw std::invalid_argument("sc_edae: no encodings");
    if (k < 2) throw std::invalid_argument("sc_edae: k must be at least 2");
    if (anchor_cfgs.size() != 1 && anchor_cfgs.size() != m)
        throw std::invalid_argument("sc_edae: need 1 or m anchor configs, got " +
                                    std::to_string(anchor_cfgs.size()));
    const std::size_t n = encodings.encodings[0].rows;
    for (std::size_t l = 1; l < m; ++l)
        if (encodings.encodings[l].rows != n)
            throw std::invalid_argument("sc_edae: encoding " + std::to_string(l) +
                                        " row count differs");

    ScEdaeResult result;
    result.affinities.resize(m);
    for (std::size_t l = 0; l < m; ++l) {
        const AnchorConfig& acfg = anchor_cfgs.size() == 1 ? anchor_cfgs[0] : anchor_cfgs[l];
        try {
            result.affinities[l] = build_affinity(encodings.encodings[l], acfg,
                                                  rng.derive(kStreamLandmarks).derive(l));
        } catch (const std::exception& e) {
            throw StageError("anchor graph (member " + std::to_string(l) + ")", e.what());
        }
    }

    try {
        result.ensemble = concat_ensemble(result.affinities);
        result.embedding = topk_left_singular(result.ensemble.z_bar, k);
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("spectral embedding", e.what());
    }

    try {
        KMeansConfig kcfg = kmeans_cfg;
        kcfg.k = k;
        kcfg.seed = rng.derive(kStreamKMeans).key();
        const DenseMatrix points =
            opts.row_normalize_b ? kernels::row_l2_normalize(result.embedding.b) : result.embedding.b;
        result.partition = kmeans(points, kcfg);
    } catch (const std::exception& e) {
        throw StageError("k-means", e.what());
    }
    return result;
}

}  // namespace scedae
