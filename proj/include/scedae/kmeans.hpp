#pragma once

#include <cstdint>
#include <vector>

#include "scedae/matrix.hpp"
#include "scedae/rng.hpp"

namespace scedae {

/// A hard clustering: labels[i] in [0, k) plus the within-cluster sum of
/// squared distances it achieves.
struct Partition {
    std::vector<std::int32_t> labels;
    std::size_t k = 0;
    double inertia = 0.0;
};

struct KMeansConfig {
    std::size_t k = 2;
    std::size_t n_init = 10;   // independent seedings, best inertia wins
    std::size_t max_iter = 300;
    double tol = 1e-4;         // stop when the largest centroid shift drops below this
    std::uint64_t seed = 0;
};

/// D^2-weighted seeding: the first centroid is uniform, each further one is
/// drawn with probability proportional to the squared distance to the
/// nearest centroid chosen so far.
DenseMatrix kmeanspp_seed(const DenseMatrix& x, std::size_t k, SeededRng& rng);

struct LloydResult {
    Partition partition;
    DenseMatrix centroids;
    std::size_t iterations = 0;
};

/// Alternating assignment/update from the given centroids until the largest
/// centroid shift drops below cfg.tol or cfg.max_iter passes. Distance ties
/// assign to the lowest centroid index; a cluster that loses all points is
/// re-seeded at the point farthest from its assigned centroid.
LloydResult lloyd(const DenseMatrix& x, const DenseMatrix& init_centroids, const KMeansConfig& cfg);

/// cfg.n_init restarts of kmeanspp_seed + lloyd on streams derived from
/// cfg.seed; returns the lowest-inertia partition (ties keep the earliest
/// restart).
Partition kmeans(const DenseMatrix& x, const KMeansConfig& cfg);

}  // namespace scedae
