#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "scedae/anchor_graph.hpp"
#include "scedae/autoencoder.hpp"
#include "scedae/kmeans.hpp"
#include "scedae/matrix.hpp"
#include "scedae/rng.hpp"

namespace scedae {

/// Error carrying the pipeline stage it came from, so replicate reports can
/// say where a run died.
struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string stage_name, const std::string& message)
        : std::runtime_error(stage_name + ": " + message), stage(std::move(stage_name)) {}
};

/// Horizontal concatenation of the per-encoding affinities, scaled by
/// 1/sqrt(m); block l occupies columns [block_offsets[l], block_offsets[l+1]).
struct EnsembleAffinity {
    SparseRowMatrix z_bar;
    std::vector<std::size_t> block_offsets;  // length m+1
    std::size_t m = 0;
};

EnsembleAffinity concat_ensemble(const std::vector<SparseAffinity>& affinities);

struct SpectralEmbedding {
    DenseMatrix b;                        // n x k, orthonormal columns
    std::vector<double> singular_values;  // descending, length k
};

/// Top-k left singular vectors of the tall sparse matrix via the small Gram
/// eigenproblem: g = z^T z, g v = lambda v, column i of b = z v_i /
/// sqrt(lambda_i). Throws if fewer than k eigenvalues are positive,
/// reporting the numerical rank. Columns are sign-fixed (see
/// fix_column_signs).
SpectralEmbedding topk_left_singular(const SparseRowMatrix& z, std::size_t k);

/// Flips every column whose largest-magnitude entry (earliest row on ties)
/// is negative; shared by the production and dense reference paths so
/// embeddings are comparable entry-wise.
void fix_column_signs(DenseMatrix& b);

struct ScEdaeOptions {
    bool row_normalize_b = false;  // L2-normalize embedding rows before k-means
};

struct ScEdaeResult {
    Partition partition;
    SpectralEmbedding embedding;
    EnsembleAffinity ensemble;
    std::vector<SparseAffinity> affinities;
};

/// Full ensemble pipeline: per-encoding landmark selection and anchor
/// affinity, concatenation, spectral embedding, k-means on the embedding
/// rows. anchor_cfgs holds either one shared config or one per encoding.
/// Stage failures surface as StageError tagged with the stage and member.
ScEdaeResult sc_edae(const EncodingSet& encodings, const std::vector<AnchorConfig>& anchor_cfgs,
                     const KMeansConfig& kmeans_cfg, std::size_t k, SeededRng rng,
                     const ScEdaeOptions& opts = {});

}  // namespace scedae
