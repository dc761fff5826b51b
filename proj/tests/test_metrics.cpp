#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "scedae/metrics.hpp"
#include "scedae/rng.hpp"

using namespace scedae;

namespace {

std::vector<std::int32_t> random_labels(std::size_t n, std::int32_t k, SeededRng& rng) {
    std::vector<std::int32_t> v(n);
    for (auto& x : v) x = static_cast<std::int32_t>(rng.below(static_cast<std::size_t>(k)));
    return v;
}

}  // namespace

TEST_CASE("hungarian solves small hand instances") {
    // classic 3x3 instance; optimum picks 1+2+1 = 4 via (0,1),(1,0),(2,2)
    DenseMatrix cost(3, 3);
    cost(0, 0) = 4.0; cost(0, 1) = 1.0; cost(0, 2) = 3.0;
    cost(1, 0) = 2.0; cost(1, 1) = 0.0; cost(1, 2) = 5.0;
    cost(2, 0) = 3.0; cost(2, 1) = 2.0; cost(2, 2) = 2.0;
    auto a = hungarian(cost);
    CHECK(a.cost == doctest::Approx(5.0).epsilon(1e-12));
    // matching is a permutation
    std::vector<bool> used(3, false);
    for (auto c : a.col_of_row) {
        CHECK(c >= 0);
        CHECK(!used[c]);
        used[c] = true;
    }
    // verify optimality by brute force
    std::vector<std::size_t> perm = {0, 1, 2};
    double best = 1e300;
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < 3; ++i) total += cost(i, perm[i]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(a.cost == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("hungarian matches brute force on random square instances") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        SeededRng rng(seed + 100);
        std::size_t n = 2 + rng.below(5);  // up to 6x6
        DenseMatrix cost(n, n);
        for (double& v : cost.values) v = rng.uniform(-5.0, 5.0);
        auto a = hungarian(cost);
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        double best = 1e300;
        do {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += cost(i, perm[i]);
            best = std::min(best, total);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(a.cost == doctest::Approx(best).epsilon(1e-10));
    }
}

TEST_CASE("hungarian handles rectangular inputs") {
    // 2 rows, 3 columns: every row must be matched, one column unused
    DenseMatrix cost(2, 3);
    cost(0, 0) = 5.0; cost(0, 1) = 1.0; cost(0, 2) = 9.0;
    cost(1, 0) = 2.0; cost(1, 1) = 8.0; cost(1, 2) = 7.0;
    auto a = hungarian(cost);
    CHECK(a.cost == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(a.col_of_row[0] == 1);
    CHECK(a.col_of_row[1] == 0);

    // 3 rows, 2 columns: one row gets the padding column (-1)
    DenseMatrix tall(3, 2);
    tall(0, 0) = 1.0; tall(0, 1) = 4.0;
    tall(1, 0) = 2.0; tall(1, 1) = 1.0;
    tall(2, 0) = 3.0; tall(2, 1) = 3.0;
    auto b = hungarian(tall);
    CHECK(b.cost == doctest::Approx(2.0).epsilon(1e-12));
    int padded = 0;
    for (auto c : b.col_of_row)
        if (c == -1) ++padded;
    CHECK(padded == 1);
    CHECK(b.col_of_row[2] == -1);
}

TEST_CASE("contingency compacts label values in ascending order") {
    std::vector<std::int32_t> pred = {5, 5, 2, 2, 9};
    std::vector<std::int32_t> truth = {1, 0, 0, 1, 1};
    auto c = contingency(pred, truth);
    CHECK(c.n == 5);
    CHECK(c.pred_values == std::vector<std::int32_t>({2, 5, 9}));
    CHECK(c.truth_values == std::vector<std::int32_t>({0, 1}));
    CHECK(c.counts(0, 0) == 1.0);  // pred 2, truth 0
    CHECK(c.counts(0, 1) == 1.0);  // pred 2, truth 1
    CHECK(c.counts(1, 0) == 1.0);  // pred 5, truth 0
    CHECK(c.counts(1, 1) == 1.0);  // pred 5, truth 1
    CHECK(c.counts(2, 1) == 1.0);  // pred 9, truth 1
    CHECK(c.counts(2, 0) == 0.0);
}

TEST_CASE("accuracy hand values") {
    // perfect up to renaming
    std::vector<std::int32_t> pred = {1, 1, 0, 0};
    std::vector<std::int32_t> truth = {7, 7, 3, 3};
    CHECK(accuracy(pred, truth) == doctest::Approx(1.0));
    // one of four misassigned
    std::vector<std::int32_t> off = {1, 1, 0, 1};
    CHECK(accuracy(off, truth) == doctest::Approx(0.75));
    // more predicted clusters than classes still scores the best matching
    std::vector<std::int32_t> split = {0, 1, 2, 2};
    CHECK(accuracy(split, truth) == doctest::Approx(0.75));
}

TEST_CASE("ari hand values") {
    std::vector<std::int32_t> a = {0, 0, 1, 1};
    CHECK(ari(a, a) == doctest::Approx(1.0));
    // the classic anti-correlated case
    std::vector<std::int32_t> b = {0, 1, 0, 1};
    CHECK(ari(a, b) == doctest::Approx(-0.5).epsilon(1e-12));
    // single point and empty-adjacent degenerate cases
    std::vector<std::int32_t> one = {3};
    CHECK(ari(one, one) == 1.0);
    // identical constant labelings
    std::vector<std::int32_t> c = {2, 2, 2};
    CHECK(ari(c, c) == 1.0);
}

TEST_CASE("nmi hand values and conventions") {
    std::vector<std::int32_t> a = {0, 0, 1, 1};
    CHECK(nmi(a, a) == doctest::Approx(1.0));
    std::vector<std::int32_t> rename = {6, 6, 4, 4};
    CHECK(nmi(a, rename) == doctest::Approx(1.0));
    // independent halves: I = 0
    std::vector<std::int32_t> b = {0, 1, 0, 1};
    CHECK(nmi(a, b) == doctest::Approx(0.0).epsilon(1e-12));
    // both constant -> 1, one constant -> 0
    std::vector<std::int32_t> c = {5, 5, 5, 5};
    CHECK(nmi(c, c) == 1.0);
    CHECK(nmi(a, c) == 0.0);
    CHECK(nmi(c, a) == 0.0);
}

TEST_CASE("metrics match brute-force oracles on random labelings") {
    // small n so the permutation-search accuracy oracle is exact
    int failures = 0;
    for (std::uint64_t trial = 0; trial < 500; ++trial) {
        SeededRng rng(trial * 7 + 1);
        std::size_t n = 2 + rng.below(11);  // 2..12
        std::int32_t k1 = 1 + static_cast<std::int32_t>(rng.below(4));
        std::int32_t k2 = 1 + static_cast<std::int32_t>(rng.below(4));
        auto pred = random_labels(n, k1, rng);
        auto truth = random_labels(n, k2, rng);
        if (std::abs(accuracy(pred, truth) - oracles::permutation_accuracy(pred, truth)) > 1e-12)
            ++failures;
        if (std::abs(ari(pred, truth) - oracles::pair_counting_ari(pred, truth)) > 1e-12)
            ++failures;
        if (std::abs(nmi(pred, truth) - oracles::entropy_nmi(pred, truth)) > 1e-12)
            ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("metrics validate their inputs") {
    std::vector<std::int32_t> a = {0, 1};
    std::vector<std::int32_t> shorter = {0};
    std::vector<std::int32_t> empty;
    CHECK_THROWS(accuracy(a, shorter));
    CHECK_THROWS(nmi(a, shorter));
    CHECK_THROWS(ari(a, shorter));
    CHECK_THROWS(accuracy(empty, empty));
}

TEST_CASE("metrics are symmetric where they should be") {
    SeededRng rng(77);
    auto a = random_labels(40, 4, rng);
    auto b = random_labels(40, 3, rng);
    CHECK(nmi(a, b) == doctest::Approx(nmi(b, a)).epsilon(1e-12));
    CHECK(ari(a, b) == doctest::Approx(ari(b, a)).epsilon(1e-12));
    CHECK(accuracy(a, b) == doctest::Approx(accuracy(b, a)).epsilon(1e-12));
}
