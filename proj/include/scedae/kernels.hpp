#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "scedae/matrix.hpp"

namespace scedae {

// Dense and sparse linear-algebra kernels.
//
// Two implementations share every signature:
//   kernels::     OpenMP-parallel production variants
//   serial_ref::  plain single-threaded reference variants
//
// Parallel variants distribute whole output elements across threads and
// accumulate each element in a fixed ascending-index order, so their results
// are required to be bit-identical to the serial references for every thread
// count. The test suite and the bench tool compare the two families.

namespace kernels {

/// c = a * b with a (n x k), b (k x m).
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

/// c = a * b^T with a (n x k), b (m x k).
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

/// c = a^T * b with a (s x n), b (s x m).
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);

/// Squared Euclidean distances between rows: out(i, j) = ||a_i - b_j||^2.
DenseMatrix pairwise_sq_dists(const DenseMatrix& a, const DenseMatrix& b);

/// Rows rescaled to unit Euclidean norm; all-zero rows are left as zeros.
DenseMatrix row_l2_normalize(const DenseMatrix& m);

/// out = z * v with z sparse (n x p), v dense length p.
std::vector<double> sparse_matvec(const SparseRowMatrix& z, const std::vector<double>& v);

/// out = z^T * v with z sparse (n x p), v dense length n.
std::vector<double> sparse_transpose_matvec(const SparseRowMatrix& z, const std::vector<double>& v);

/// Dense Gram matrix z^T * z (p x p).
DenseMatrix sparse_gram(const SparseRowMatrix& z);

/// Dense product z * v with v dense (p x k).
DenseMatrix sparse_dense(const SparseRowMatrix& z, const DenseMatrix& v);

/// Dense similarity z * z^T (n x n). Intended for small test problems.
DenseMatrix sparse_aat(const SparseRowMatrix& z);

}  // namespace kernels

namespace serial_ref {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix pairwise_sq_dists(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix row_l2_normalize(const DenseMatrix& m);
std::vector<double> sparse_matvec(const SparseRowMatrix& z, const std::vector<double>& v);
std::vector<double> sparse_transpose_matvec(const SparseRowMatrix& z, const std::vector<double>& v);
DenseMatrix sparse_gram(const SparseRowMatrix& z);
DenseMatrix sparse_dense(const SparseRowMatrix& z, const DenseMatrix& v);
DenseMatrix sparse_aat(const SparseRowMatrix& z);

}  // namespace serial_ref

/// Gaussian kernel exp(-d2 / (2 sigma^2)) from a squared distance.
inline double gaussian_kernel(double sq_dist, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
    if (!(sq_dist >= 0.0)) throw std::invalid_argument("gaussian_kernel: squared distance must be nonnegative");
    return std::exp(-sq_dist / (2.0 * sigma * sigma));
}

}  // namespace scedae
