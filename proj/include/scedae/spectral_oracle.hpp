#pragma once

#include <vector>

#include "scedae/anchor_graph.hpp"
#include "scedae/kmeans.hpp"
#include "scedae/matrix.hpp"
#include "scedae/rng.hpp"

namespace scedae {

// Dense, small-n reference implementations of classical normalized spectral
// clustering and of the densified ensemble similarity. Everything here is
// single-threaded and deliberately independent of the production SVD path
// (its own eigensolver), so the two can cross-check each other.

/// Symmetric n x n similarity with nonnegative entries.
struct DenseSimilarity {
    DenseMatrix s;
};

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations;
/// eigenvalues descending, eigenvectors in the matching columns. Residuals
/// ||A v - lambda v|| are driven below 1e-9 relative for reference-grade
/// sizes (n up to a couple thousand).
struct SymEig {
    std::vector<double> eigenvalues;
    DenseMatrix eigenvectors;
};

SymEig jacobi_eigensym(DenseMatrix a);

/// Full Gaussian kernel on all pairs, symmetrically degree-normalized:
/// s = D^{-1/2} K D^{-1/2} with D = diag(K 1).
DenseSimilarity dense_normalized_similarity(const DenseMatrix& x, double sigma);

/// Median of all pairwise Euclidean distances; the oracle's default
/// bandwidth on raw data.
double median_pairwise_distance(const DenseMatrix& x);

/// Top-k eigenvector embedding of a dense symmetric similarity, columns
/// sign-fixed like the production path.
struct DenseEmbedding {
    DenseMatrix b;                    // n x k
    std::vector<double> eigenvalues;  // descending, length k
};

DenseEmbedding dense_embedding(const DenseMatrix& s, std::size_t k);

struct DenseSpectralResult {
    Partition partition;
    DenseMatrix b;                    // pre-renormalization embedding
    std::vector<double> eigenvalues;  // top-k, descending
};

/// Classical pipeline: top-k eigenvectors, optional row L2-renormalization
/// (the classical default), k-means on the rows.
DenseSpectralResult dense_spectral_clustering(const DenseSimilarity& s, std::size_t k,
                                              const KMeansConfig& kmeans_cfg,
                                              bool renormalize_rows = true);

/// Densified ensemble similarity (1/m) sum_l zhat_l zhat_l^T; bi-stochastic.
/// Guarded to n <= 2000 — this path is a small-scale reference by design.
DenseSimilarity dense_ensemble_similarity(const std::vector<SparseAffinity>& affinities);

}  // namespace scedae
