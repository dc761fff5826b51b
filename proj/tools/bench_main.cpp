// Times each OpenMP kernel against its serial reference and verifies the
// two produce bit-identical output. Exits nonzero on any mismatch, so this
// doubles as a determinism smoke test at larger sizes than the unit tests.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "scedae/kernels.hpp"
#include "scedae/matrix.hpp"
#include "scedae/rng.hpp"

namespace {

using scedae::DenseMatrix;
using scedae::SeededRng;
using scedae::SparseRowMatrix;

int failures = 0;

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, SeededRng& rng) {
    DenseMatrix m(rows, cols);
    for (double& v : m.values) v = rng.uniform(-1.0, 1.0);
    return m;
}

SparseRowMatrix random_sparse(std::size_t rows, std::size_t cols, std::size_t per_row,
                              SeededRng& rng) {
    std::vector<std::vector<std::pair<std::size_t, double>>> entries(rows);
    std::vector<std::size_t> all(cols);
    for (std::size_t c = 0; c < cols; ++c) all[c] = c;
    for (auto& row : entries) {
        rng.shuffle(all);
        for (std::size_t t = 0; t < per_row; ++t) {
            row.emplace_back(all[t], rng.uniform(0.1, 1.0));
        }
    }
    return SparseRowMatrix::from_rows(rows, cols, std::move(entries));
}

template <class F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (s < best) best = s;
    }
    return best;
}

bool identical(const DenseMatrix& a, const DenseMatrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.values == b.values;
}

bool identical(const std::vector<double>& a, const std::vector<double>& b) { return a == b; }

template <class Out, class Serial, class Parallel>
void compare(const std::string& name, Serial&& serial, Parallel&& parallel) {
    Out ref, par;
    const double t_serial = time_best_of(3, [&] { ref = serial(); });
    const double t_parallel = time_best_of(3, [&] { par = parallel(); });
    const bool same = identical(ref, par);
    std::printf("%-24s serial %8.2f ms   parallel %8.2f ms   speedup %5.2fx   %s\n", name.c_str(),
                t_serial * 1e3, t_parallel * 1e3, t_serial / t_parallel,
                same ? "bit-identical" : "MISMATCH");
    if (!same) ++failures;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = 1200;
    if (argc > 1) n = static_cast<std::size_t>(std::strtoull(argv[1], nullptr, 10));
    std::printf("threads: %d, problem size n = %zu\n", omp_get_max_threads(), n);

    SeededRng rng(42);
    const DenseMatrix a = random_matrix(n, 256, rng);
    const DenseMatrix b = random_matrix(256, n, rng);
    const DenseMatrix c = random_matrix(n, 256, rng);
    const SparseRowMatrix z = random_sparse(n, n / 4, 5, rng);
    const DenseMatrix v = random_matrix(n / 4, 16, rng);
    std::vector<double> vec(n / 4);
    for (std::size_t i = 0; i < vec.size(); ++i) vec[i] = rng.uniform(-1.0, 1.0);
    std::vector<double> vec_n(n);
    for (std::size_t i = 0; i < n; ++i) vec_n[i] = rng.uniform(-1.0, 1.0);

    namespace ser = scedae::serial_ref;
    namespace par = scedae::kernels;

    compare<DenseMatrix>("matmul", [&] { return ser::matmul(a, b); },
                         [&] { return par::matmul(a, b); });
    compare<DenseMatrix>("matmul_nt", [&] { return ser::matmul_nt(a, c); },
                         [&] { return par::matmul_nt(a, c); });
    compare<DenseMatrix>("matmul_tn", [&] { return ser::matmul_tn(a, c); },
                         [&] { return par::matmul_tn(a, c); });
    compare<DenseMatrix>("pairwise_sq_dists", [&] { return ser::pairwise_sq_dists(a, c); },
                         [&] { return par::pairwise_sq_dists(a, c); });
    compare<DenseMatrix>("row_l2_normalize", [&] { return ser::row_l2_normalize(a); },
                         [&] { return par::row_l2_normalize(a); });
    compare<std::vector<double>>("sparse_matvec", [&] { return ser::sparse_matvec(z, vec); },
                                 [&] { return par::sparse_matvec(z, vec); });
    compare<std::vector<double>>("sparse_transpose_matvec",
                                 [&] { return ser::sparse_transpose_matvec(z, vec_n); },
                                 [&] { return par::sparse_transpose_matvec(z, vec_n); });
    compare<DenseMatrix>("sparse_gram", [&] { return ser::sparse_gram(z); },
                         [&] { return par::sparse_gram(z); });
    compare<DenseMatrix>("sparse_dense", [&] { return ser::sparse_dense(z, v); },
                         [&] { return par::sparse_dense(z, v); });
    compare<DenseMatrix>("sparse_aat", [&] { return ser::sparse_aat(z); },
                         [&] { return par::sparse_aat(z); });

    if (failures > 0) {
        std::printf("%d kernel(s) diverged from the serial reference\n", failures);
        return 1;
    }
    std::printf("all kernels bit-identical to the serial reference\n");
    return 0;
}
