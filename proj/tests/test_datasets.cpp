#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "scedae/datasets.hpp"
#include "scedae/kernels.hpp"
#include "scedae/rng.hpp"

using namespace scedae;

namespace {

std::string temp_path(const std::string& name) { return "/tmp/scedae_test_" + name; }

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("tetra: shape, labels, geometry") {
    auto ds = gen_tetra(7);
    CHECK(ds.x.rows == 400);
    CHECK(ds.x.cols == 3);
    CHECK(ds.k_true == 4);
    CHECK(ds.labels.size() == 400);
    std::set<std::int32_t> distinct(ds.labels.begin(), ds.labels.end());
    CHECK(distinct.size() == 4);
    // balanced clusters
    for (int c = 0; c < 4; ++c)
        CHECK(std::count(ds.labels.begin(), ds.labels.end(), c) == 100);
    // same seed, same bytes; different seed, different draw
    auto again = gen_tetra(7);
    CHECK(ds.x.values == again.x.values);
    auto other = gen_tetra(8);
    CHECK(ds.x.values != other.x.values);
}

TEST_CASE("chainlink: two interlocked rings are not linearly separable") {
    auto ds = gen_chainlink(3);
    CHECK(ds.x.rows == 1000);
    CHECK(ds.x.cols == 3);
    CHECK(ds.k_true == 2);

    // a perceptron fails on the rings but succeeds on a linearly separable
    // control set of the same size
    auto train_perceptron = [](const DenseMatrix& x, const std::vector<std::int32_t>& y) {
        std::vector<double> w(x.cols + 1, 0.0);
        for (int epoch = 0; epoch < 200; ++epoch) {
            std::size_t errors = 0;
            for (std::size_t i = 0; i < x.rows; ++i) {
                double z = w[x.cols];
                for (std::size_t j = 0; j < x.cols; ++j) z += w[j] * x(i, j);
                int pred = z >= 0.0 ? 1 : 0;
                if (pred != y[i]) {
                    double step = y[i] == 1 ? 1.0 : -1.0;
                    for (std::size_t j = 0; j < x.cols; ++j) w[j] += 0.01 * step * x(i, j);
                    w[x.cols] += 0.01 * step;
                    ++errors;
                }
            }
            if (errors == 0) break;
        }
        std::size_t hits = 0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            double z = w[x.cols];
            for (std::size_t j = 0; j < x.cols; ++j) z += w[j] * x(i, j);
            if ((z >= 0.0 ? 1 : 0) == y[i]) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(x.rows);
    };

    double ring_acc = train_perceptron(ds.x, ds.labels);
    CHECK(ring_acc < 0.85);

    SeededRng rng(9);
    DenseMatrix ctrl(1000, 3);
    std::vector<std::int32_t> ctrl_y(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        int c = i < 500 ? 0 : 1;
        ctrl_y[i] = c;
        ctrl(i, 0) = rng.normal() * 0.3 + (c == 0 ? -2.0 : 2.0);
        ctrl(i, 1) = rng.normal() * 0.3;
        ctrl(i, 2) = rng.normal() * 0.3;
    }
    CHECK(train_perceptron(ctrl, ctrl_y) > 0.99);
}

TEST_CASE("lsun: shape and three distinct parts") {
    auto ds = gen_lsun(1);
    CHECK(ds.x.rows == 400);
    CHECK(ds.x.cols == 2);
    CHECK(ds.k_true == 3);
    std::set<std::int32_t> distinct(ds.labels.begin(), ds.labels.end());
    CHECK(distinct.size() == 3);
    ds.x.require_finite("lsun");
}

TEST_CASE("gen_by_name dispatches and rejects unknown names") {
    auto a = gen_by_name("tetra", 5);
    auto b = gen_tetra(5);
    CHECK(a.x.values == b.x.values);
    CHECK_THROWS(gen_by_name("twomoons", 5));
}

TEST_CASE("lift kinds round trip through strings") {
    for (auto kind : {LiftKind::sigmoid_stack, LiftKind::sigmoid_squared, LiftKind::tan_sigmoid})
        CHECK(lift_kind_from_string(to_string(kind)) == kind);
    CHECK_THROWS(lift_kind_from_string("quadratic"));
}

TEST_CASE("sigmoid_stack lift: dims, range, and the zero-input hand value") {
    SeededRng rng(13);
    auto t = make_lift(LiftKind::sigmoid_stack, 3, rng);
    CHECK(t.w.rows == 10);
    CHECK(t.w.cols == 3);
    CHECK(t.u.rows == 100);
    CHECK(t.u.cols == 10);

    auto ds = gen_tetra(2);
    auto x = lift(ds.x, t);
    CHECK(x.rows == 400);
    CHECK(x.cols == 100);
    for (double v : x.values) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }

    // h = 0 passes sigmoid(W*0) = 0.5 through each inner unit, so the output
    // is sigmoid of the row sums of U scaled by 0.5
    DenseMatrix zero(1, 3);
    auto out = lift(zero, t);
    for (std::size_t j = 0; j < 100; ++j) {
        double z = 0.0;
        for (std::size_t l = 0; l < 10; ++l) z += t.u(j, l) * 0.5;
        CHECK(out(0, j) == doctest::Approx(sigmoid(z)).epsilon(1e-12));
    }
}

TEST_CASE("sigmoid_squared lift: scalar hand evaluation") {
    SeededRng rng(17);
    auto t = make_lift(LiftKind::sigmoid_squared, 2, rng);
    DenseMatrix h(1, 2);
    h(0, 0) = 0.4;
    h(0, 1) = -1.1;
    auto out = lift(h, t);
    CHECK(out.cols == 10);
    for (std::size_t l = 0; l < 10; ++l) {
        double z = t.w(l, 0) * 0.4 + t.w(l, 1) * -1.1;
        double s = sigmoid(sigmoid(z));
        CHECK(out(0, l) == doctest::Approx(s * s).epsilon(1e-12));
    }
}

TEST_CASE("tan_sigmoid lift: scalar hand evaluation and range") {
    SeededRng rng(19);
    auto t = make_lift(LiftKind::tan_sigmoid, 3, rng);
    DenseMatrix h(1, 3);
    h(0, 0) = 0.2;
    h(0, 1) = 0.9;
    h(0, 2) = -0.5;
    auto out = lift(h, t);
    CHECK(out.cols == 10);
    for (std::size_t l = 0; l < 10; ++l) {
        double z = t.w(l, 0) * 0.2 + t.w(l, 1) * 0.9 + t.w(l, 2) * -0.5;
        CHECK(out(0, l) == doctest::Approx(std::tan(sigmoid(z))).epsilon(1e-12));
    }
    // range is (0, tan(1)) with no clipping
    auto ds = gen_lsun(4);
    auto lifted = lift(ds.x, make_lift(LiftKind::tan_sigmoid, 2, rng));
    for (double v : lifted.values) {
        CHECK(v > 0.0);
        CHECK(v < std::tan(1.0));
    }
}

TEST_CASE("lift preserves neighborhood structure") {
    // nearest neighbors in generator space should mostly share labels after
    // lifting; otherwise the lift has destroyed the clusters
    auto ds = gen_tetra(6);
    SeededRng rng(23);
    auto t = make_lift(LiftKind::sigmoid_stack, 3, rng);
    auto x = lift(ds.x, t);
    auto d = kernels::pairwise_sq_dists(x, x);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        double best = 1e300;
        std::size_t arg = i;
        for (std::size_t j = 0; j < x.rows; ++j) {
            if (j == i) continue;
            if (d(i, j) < best) {
                best = d(i, j);
                arg = j;
            }
        }
        if (ds.labels[i] == ds.labels[arg]) ++agree;
    }
    CHECK(static_cast<double>(agree) / static_cast<double>(x.rows) > 0.9);
}

TEST_CASE("rescale_unit divides by the divisor") {
    DenseMatrix m(2, 2);
    m(0, 0) = 0.0;
    m(0, 1) = 255.0;
    m(1, 0) = 51.0;
    m(1, 1) = 102.0;
    auto out = rescale_unit(m, 255.0);
    CHECK(out(0, 0) == 0.0);
    CHECK(out(0, 1) == doctest::Approx(1.0));
    CHECK(out(1, 0) == doctest::Approx(0.2));
    CHECK(out(1, 1) == doctest::Approx(0.4));

    // divisor 1 is the identity
    auto same = rescale_unit(m, 1.0);
    CHECK(same.values == m.values);

    DenseMatrix pct(1, 2);
    pct(0, 0) = 0.0;
    pct(0, 1) = 100.0;
    auto unit = rescale_unit(pct, 100.0);
    CHECK(unit(0, 1) == doctest::Approx(1.0));

    CHECK_THROWS(rescale_unit(m, 0.0));
}

TEST_CASE("csv round trip with and without labels") {
    auto ds = gen_lsun(11);
    auto path = temp_path("round.csv");
    save_csv(ds, path);
    auto back = load_csv(path);
    CHECK(back.x.rows == ds.x.rows);
    CHECK(back.x.cols == ds.x.cols);
    CHECK(back.labels == ds.labels);
    for (std::size_t i = 0; i < ds.x.values.size(); ++i)
        CHECK(back.x.values[i] == doctest::Approx(ds.x.values[i]).epsilon(1e-12));

    Dataset unlabeled;
    unlabeled.name = "plain";
    unlabeled.x = DenseMatrix(3, 2);
    unlabeled.x(0, 0) = 1.5;
    unlabeled.x(2, 1) = -0.25;
    auto path2 = temp_path("plain.csv");
    save_csv(unlabeled, path2);
    auto back2 = load_csv(path2);
    CHECK(!back2.has_labels());
    CHECK(back2.x.rows == 3);
    CHECK(back2.x.values == unlabeled.x.values);
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("binary round trip is exact") {
    auto ds = gen_chainlink(13);
    auto path = temp_path("round.bin");
    save_binary(ds, path);
    auto back = load_binary(path);
    CHECK(back.x.values == ds.x.values);  // bit-exact, not approximate
    CHECK(back.labels == ds.labels);
    CHECK(back.x.rows == ds.x.rows);
    CHECK(back.x.cols == ds.x.cols);
    std::remove(path.c_str());
}

TEST_CASE("load_dataset sniffs the format") {
    auto ds = gen_tetra(17);
    auto bpath = temp_path("sniff.bin");
    auto cpath = temp_path("sniff.csv");
    save_binary(ds, bpath);
    save_csv(ds, cpath);
    auto from_bin = load_dataset(bpath);
    auto from_csv = load_dataset(cpath);
    CHECK(from_bin.x.values == ds.x.values);
    CHECK(from_csv.x.rows == ds.x.rows);
    std::remove(bpath.c_str());
    std::remove(cpath.c_str());
}

TEST_CASE("loaders reject malformed input") {
    auto path = temp_path("bad.csv");
    {
        std::ofstream out(path);
        out << "x0,x1\n1.0,2.0\n3.0\n";  // ragged row
    }
    CHECK_THROWS(load_csv(path));
    std::remove(path.c_str());

    CHECK_THROWS(load_csv(temp_path("missing_file.csv")));
    CHECK_THROWS(load_binary(temp_path("missing_file.bin")));

    auto trunc = temp_path("trunc.bin");
    {
        std::ofstream out(trunc, std::ios::binary);
        out << "SCE1";  // header only
    }
    CHECK_THROWS(load_binary(trunc));
    std::remove(trunc.c_str());
}
