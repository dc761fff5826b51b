#pragma once

#include <string>
#include <vector>

#include "scedae/kmeans.hpp"
#include "scedae/matrix.hpp"
#include "scedae/rng.hpp"

namespace scedae {

enum class BandwidthMode { per_point_mean, global_fixed };

BandwidthMode bandwidth_mode_from_string(const std::string& s);
std::string to_string(BandwidthMode mode);

struct AnchorConfig {
    std::size_t p = 100;  // landmark count
    std::size_t r = 5;    // nearest landmarks kept per point
    BandwidthMode bandwidth_mode = BandwidthMode::per_point_mean;
    double sigma = 1.0;   // bandwidth for global_fixed
};

struct LandmarkSet {
    DenseMatrix u;  // p x e centroids
};

/// Landmarks are the centroids of a single seeded k-means pass (n_init=1)
/// with k=p on the encoding.
LandmarkSet select_landmarks(const DenseMatrix& y, std::size_t p, SeededRng rng);

struct AffinityBuild {
    SparseRowMatrix z;               // row-stochastic, exactly r nonzeros per row
    std::vector<double> sigma_used;  // effective bandwidth per row
};

/// Per row: the r nearest landmarks by squared distance (ties to the lower
/// landmark index) get Gaussian kernel weights normalized to sum 1; all
/// other entries are structurally zero. With per_point_mean the bandwidth is
/// the mean distance to those r landmarks; sigma_used records it. Rows whose
/// r distances are all zero fall back to uniform weights 1/r.
AffinityBuild build_z(const DenseMatrix& y, const LandmarkSet& landmarks, const AnchorConfig& cfg);

/// Column-degree normalization z_hat = z diag(z^T 1)^{-1/2}; all-zero
/// columns (unused landmarks) stay zero. z_hat z_hat^T is bi-stochastic.
SparseRowMatrix normalize_z(const SparseRowMatrix& z);

struct SparseAffinity {
    SparseRowMatrix z_hat;
    LandmarkSet landmarks;
    std::vector<double> sigma_used;
};

/// select_landmarks + build_z + normalize_z in one call.
SparseAffinity build_affinity(const DenseMatrix& y, const AnchorConfig& cfg, SeededRng rng);

/// Writes "row col value" per line, row-major (so sorted by row then column).
void dump_triplets(const SparseRowMatrix& z, const std::string& path);

}  // namespace scedae
