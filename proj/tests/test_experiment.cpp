#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "scedae/datasets.hpp"
#include "scedae/ensemble.hpp"
#include "scedae/experiment.hpp"
#include "scedae/kernels.hpp"

using namespace scedae;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open ", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Minimal valid config body; callers splice extra fields into the object.
std::string tetra_config(const std::string& extra) {
    std::string base = R"({
        "dataset": {"generator": "tetra", "seed": 1},
        "mode": "baseline_kmeanspp",
        "master_seed": 5)";
    if (!extra.empty()) base += ",\n" + extra;
    return base + "\n}";
}

}  // namespace

TEST_CASE("mode strings round trip and classify") {
    for (auto m : {Mode::ens_init, Mode::ens_epochs, Mode::ens_struct, Mode::ens_landmarks,
                   Mode::baseline_kmeanspp, Mode::baseline_lsc, Mode::baseline_dae_kmeans,
                   Mode::baseline_dae_lsc})
        CHECK(mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(mode_from_string("ensemble"), config_error);

    CHECK(is_baseline(Mode::baseline_lsc));
    CHECK(!is_baseline(Mode::ens_struct));
    CHECK(mode_trains(Mode::ens_init));
    CHECK(mode_trains(Mode::baseline_dae_lsc));
    CHECK(!mode_trains(Mode::baseline_kmeanspp));
    CHECK(!mode_trains(Mode::baseline_lsc));
    CHECK(mode_spectral(Mode::ens_landmarks));
    CHECK(mode_spectral(Mode::baseline_lsc));
    CHECK(!mode_spectral(Mode::baseline_kmeanspp));
    CHECK(!mode_spectral(Mode::baseline_dae_kmeans));
}

TEST_CASE("config parsing applies mode defaults") {
    auto c = config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 3},
        "mode": "ens_init",
        "master_seed": 9
    })");
    CHECK(c.mode == Mode::ens_init);
    CHECK(c.m == 5);  // default member count
    CHECK(c.seeds == std::vector<std::uint64_t>({0, 1, 2, 3, 4}));
    CHECK(c.structures.size() == 1);
    CHECK(c.replicates == 1);
    CHECK(c.anchor.p == 100);
    CHECK(c.anchor.r == 5);

    auto e = config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 3},
        "mode": "ens_epochs"
    })");
    CHECK(e.epochs == std::vector<std::size_t>({50, 100, 150, 200, 250}));
    CHECK(e.m == 5);
}

TEST_CASE("ens_struct expands a single structure into width permutations") {
    auto c = config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 1},
        "mode": "ens_struct",
        "m": 6,
        "structures": [[50, 75, 100]]
    })");
    CHECK(c.structures.size() == 6);
    // all six orderings of {50, 75, 100}, each used once
    std::set<std::vector<std::size_t>> seen(c.structures.begin(), c.structures.end());
    CHECK(seen.size() == 6);
    for (const auto& s : c.structures) {
        auto sorted = s;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == std::vector<std::size_t>({50, 75, 100}));
    }

    // m = 1 keeps the structure as written
    auto single = config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 1},
        "mode": "ens_struct",
        "m": 1,
        "structures": [[100, 50, 75]]
    })");
    CHECK(single.structures == std::vector<std::vector<std::size_t>>({{100, 50, 75}}));

    // member count must match the permutation count
    CHECK_THROWS_AS(config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 1},
        "mode": "ens_struct",
        "m": 4,
        "structures": [[50, 75, 100]]
    })"), config_error);
}

TEST_CASE("config validation rejects bad input") {
    // unknown top-level key
    CHECK_THROWS_AS(config_from_json_text(tetra_config(R"("typo_key": 1)")), config_error);
    // unknown nested key
    CHECK_THROWS_AS(config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 1, "rows": 10},
        "mode": "baseline_kmeanspp"
    })"), config_error);
    // generator and path are mutually exclusive, and one is required
    CHECK_THROWS_AS(config_from_json_text(R"({
        "dataset": {"generator": "tetra", "path": "x.csv"},
        "mode": "baseline_kmeanspp"
    })"), config_error);
    CHECK_THROWS_AS(config_from_json_text(R"({
        "dataset": {"seed": 1},
        "mode": "baseline_kmeanspp"
    })"), config_error);
    // unknown generator
    CHECK_THROWS_AS(config_from_json_text(R"({
        "dataset": {"generator": "moons", "seed": 1},
        "mode": "baseline_kmeanspp"
    })"), config_error);
    // malformed json
    CHECK_THROWS_AS(config_from_json_text("{"), config_error);
    // list fields are mode-gated
    CHECK_THROWS_AS(config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 1},
        "mode": "ens_struct",
        "seeds": [1, 2]
    })"), config_error);
    CHECK_THROWS_AS(config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 1},
        "mode": "ens_init",
        "epochs": [10, 20]
    })"), config_error);
    // r > p
    CHECK_THROWS_AS(config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 1},
        "mode": "baseline_lsc",
        "anchor": {"p": 4, "r": 9}
    })"), config_error);
    // baselines are single-member
    CHECK_THROWS_AS(config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 1},
        "mode": "baseline_lsc",
        "m": 3
    })"), config_error);
    // global_fixed needs a positive sigma
    CHECK_THROWS_AS(config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 1},
        "mode": "baseline_lsc",
        "anchor": {"bandwidth_mode": "global_fixed", "sigma": 0.0}
    })"), config_error);
    // bad lift kind
    CHECK_THROWS_AS(config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 1},
        "lift": {"kind": "cubic", "seed": 1},
        "mode": "baseline_kmeanspp"
    })"), config_error);
}

TEST_CASE("resolved config echo round trips") {
    auto c = config_from_json_text(R"({
        "dataset": {"generator": "lsun", "seed": 4},
        "lift": {"kind": "sigmoid_squared", "seed": 2},
        "preprocessing": {"divisor": 2.0, "l2_normalize": true},
        "mode": "ens_struct",
        "m": 6,
        "structures": [[50, 75, 100]],
        "anchor": {"p": 64, "r": 3},
        "kmeans": {"n_init": 7},
        "train": {"epochs": 33, "batch_size": 64},
        "replicates": 2,
        "master_seed": 123,
        "threads": 2,
        "row_normalize_b": true,
        "export_b": true
    })");
    auto text = config_to_json_text(c);
    auto back = config_from_json_text(text);
    CHECK(back.dataset.generator == c.dataset.generator);
    CHECK(back.dataset.seed == c.dataset.seed);
    CHECK(back.lift.enabled == c.lift.enabled);
    CHECK(back.lift.kind == c.lift.kind);
    CHECK(back.preprocessing.divisor == c.preprocessing.divisor);
    CHECK(back.preprocessing.l2_normalize == c.preprocessing.l2_normalize);
    CHECK(back.mode == c.mode);
    CHECK(back.m == c.m);
    CHECK(back.structures == c.structures);
    CHECK(back.anchor.p == c.anchor.p);
    CHECK(back.anchor.r == c.anchor.r);
    CHECK(back.kmeans.n_init == c.kmeans.n_init);
    CHECK(back.train.epochs == c.train.epochs);
    CHECK(back.train.batch_size == c.train.batch_size);
    CHECK(back.replicates == c.replicates);
    CHECK(back.master_seed == c.master_seed);
    CHECK(back.threads == c.threads);
    CHECK(back.row_normalize_b == c.row_normalize_b);
    CHECK(back.export_b == c.export_b);
    // echo of the echo is byte-stable
    CHECK(config_to_json_text(back) == text);
}

TEST_CASE("member stream labels depend on values, not positions") {
    auto c = config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 1},
        "mode": "ens_init",
        "m": 3,
        "seeds": [10, 20, 30]
    })");
    auto dropped = config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 1},
        "mode": "ens_init",
        "m": 2,
        "seeds": [10, 30]
    })");
    CHECK(member_stream_label(c, 0) == member_stream_label(dropped, 0));
    CHECK(member_stream_label(c, 2) == member_stream_label(dropped, 1));
    CHECK(member_stream_label(c, 0) != member_stream_label(c, 1));

    // structure fingerprints are order-sensitive and collision-free across
    // the six permutations used by ens_struct
    auto perms = config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 1},
        "mode": "ens_struct",
        "m": 6,
        "structures": [[50, 75, 100]]
    })");
    std::set<std::uint64_t> labels;
    for (std::size_t l = 0; l < 6; ++l) labels.insert(member_stream_label(perms, l));
    CHECK(labels.size() == 6);
    CHECK(structure_fingerprint({50, 75}) != structure_fingerprint({75, 50}));
    CHECK(structure_fingerprint({50}) != structure_fingerprint({50, 50}));
}

TEST_CASE("run_experiment on a k-means baseline fills the report") {
    auto c = config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 2},
        "mode": "baseline_kmeanspp",
        "replicates": 2,
        "master_seed": 7
    })");
    auto report = run_experiment(c);
    CHECK(report.replicates.size() == 2);
    for (const auto& r : report.replicates) {
        CHECK(r.ok);
        CHECK(r.has_metrics);
        CHECK(r.acc > 0.9);  // raw tetra is easy for k-means
        CHECK(r.labels.size() == 400);
    }

    auto parsed = nlohmann::json::parse(report.json);
    CHECK(parsed["dataset"]["rows"] == 400);
    CHECK(parsed["dataset"]["k_true"] == 4);
    CHECK(parsed["config"]["mode"] == "baseline_kmeanspp");
    CHECK(parsed["config"]["k"] == 4);  // resolved from ground truth
    CHECK(parsed["replicates"].size() == 2);
    CHECK(parsed["summary"]["replicates_ok"] == 2);
    CHECK(parsed["summary"]["acc"].contains("mean"));
    CHECK(parsed["summary"]["acc"].contains("std"));
    CHECK(parsed["summary"]["acc"].contains("median"));
    CHECK(parsed["members"].empty());  // kmeanspp has no trained members

    // timings live outside the json
    CHECK(report.json.find("seconds") == std::string::npos);
    CHECK(!report.stage_seconds.empty());
}

TEST_CASE("summary statistics match a recomputation from the replicates") {
    auto c = config_from_json_text(R"({
        "dataset": {"generator": "lsun", "seed": 3},
        "mode": "baseline_kmeanspp",
        "replicates": 3,
        "master_seed": 21
    })");
    auto report = run_experiment(c);
    std::vector<double> accs;
    for (const auto& r : report.replicates) accs.push_back(r.acc);
    double mean = (accs[0] + accs[1] + accs[2]) / 3.0;
    double var = 0.0;
    for (double a : accs) var += (a - mean) * (a - mean);
    double std_dev = std::sqrt(var / 2.0);  // sample standard deviation
    std::sort(accs.begin(), accs.end());

    auto parsed = nlohmann::json::parse(report.json);
    CHECK(parsed["summary"]["acc"]["mean"].get<double>() == doctest::Approx(mean).epsilon(1e-12));
    CHECK(parsed["summary"]["acc"]["std"].get<double>() == doctest::Approx(std_dev).epsilon(1e-12));
    CHECK(parsed["summary"]["acc"]["median"].get<double>() ==
          doctest::Approx(accs[1]).epsilon(1e-12));
}

TEST_CASE("identical configs produce byte-identical reports") {
    std::string body = R"({
        "dataset": {"generator": "lsun", "seed": 6},
        "lift": {"kind": "sigmoid_stack", "seed": 2},
        "mode": "ens_init",
        "m": 2,
        "k": 3,
        "structures": [[20, 10]],
        "train": {"epochs": 3},
        "anchor": {"p": 30, "r": 3},
        "replicates": 2,
        "master_seed": 31,
        "threads": 2
    })";
    auto a = run_experiment(config_from_json_text(body));
    auto b = run_experiment(config_from_json_text(body));
    for (const auto& r : a.replicates) CHECK(r.ok);
    CHECK(a.json == b.json);
    // threads setting must not leak into results
    auto serial = body;
    auto pos = serial.find("\"threads\": 2");
    serial.replace(pos, 12, "\"threads\": 1");
    auto c = run_experiment(config_from_json_text(serial));
    auto ja = nlohmann::json::parse(a.json);
    auto jc = nlohmann::json::parse(c.json);
    CHECK(ja["replicates"] == jc["replicates"]);
}

TEST_CASE("baseline_lsc equals the library pipeline called directly") {
    auto body = R"({
        "dataset": {"generator": "tetra", "seed": 8},
        "mode": "baseline_lsc",
        "anchor": {"p": 40, "r": 4},
        "master_seed": 17
    })";
    auto c = config_from_json_text(body);
    auto report = run_experiment(c);
    REQUIRE(report.replicates[0].ok);

    // reproduce by hand from the exposed stream constants
    auto ds = gen_tetra(8);
    EncodingSet set;
    set.encodings.push_back(ds.x);
    EncodingProvenance prov;
    prov.trained = false;
    set.provenance.push_back(prov);
    auto rep_rng = SeededRng(17).derive(kStreamReplicate).derive(0);
    auto result = sc_edae(set, {c.anchor}, c.kmeans, 4, rep_rng.derive(kStreamPipeline));
    CHECK(result.partition.labels == report.replicates[0].labels);
}

TEST_CASE("run_experiment records stage failures without killing the run") {
    // k cannot be resolved: unlabeled dataset and no k in the config
    auto path = std::string("/tmp/scedae_test_unlabeled.csv");
    {
        Dataset ds;
        ds.x = DenseMatrix(10, 2);
        for (std::size_t i = 0; i < 10; ++i) ds.x(i, 0) = static_cast<double>(i);
        save_csv(ds, path);
    }
    auto c = config_from_json_text(std::string(R"({
        "dataset": {"path": ")") + path + R"("},
        "mode": "baseline_kmeanspp"
    })");
    CHECK_THROWS(run_experiment(c));
    std::remove(path.c_str());

    // a failing replicate is reported per-replicate, not thrown: force the
    // spectral stage to die with r close to p on a tiny dataset where
    // landmark selection cannot produce p distinct centroids
    auto bad = config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 1},
        "k": 400,
        "mode": "baseline_lsc",
        "anchor": {"p": 10, "r": 2},
        "master_seed": 3
    })");
    auto report = run_experiment(bad);
    CHECK(report.replicates.size() == 1);
    CHECK(!report.replicates[0].ok);
    CHECK(!report.replicates[0].stage.empty());
    CHECK(!report.replicates[0].error.empty());
    auto parsed = nlohmann::json::parse(report.json);
    CHECK(parsed["replicates"][0]["ok"] == false);
    CHECK(parsed["summary"]["replicates_ok"] == 0);
}

TEST_CASE("run_experiment writes report, sidecar, and artifacts") {
    std::string out = "/tmp/scedae_test_report.json";
    auto c = config_from_json_text(std::string(R"({
        "dataset": {"generator": "lsun", "seed": 9},
        "mode": "baseline_lsc",
        "anchor": {"p": 20, "r": 3},
        "master_seed": 13,
        "output": ")") + out + R"(",
        "export_b": true,
        "dump_z_hat": true
    })");
    auto report = run_experiment(c);
    CHECK(slurp(out) == report.json);
    auto timings = nlohmann::json::parse(slurp(out + ".timings.json"));
    CHECK(timings.contains("stages"));

    // the exported embedding matches the report's dimensions
    auto b = load_binary(out + ".b.bin");
    CHECK(b.x.rows == 400);
    CHECK(b.x.cols == 3);
    CHECK(b.labels.size() == 400);  // predicted labels ride along

    // the affinity dump parses as "row col value" triplets
    std::ifstream zin(out + ".zhat0.txt");
    std::size_t r_, c_;
    double v_;
    std::size_t lines = 0;
    while (zin >> r_ >> c_ >> v_) ++lines;
    CHECK(lines == 400 * 3);

    std::remove(out.c_str());
    std::remove((out + ".timings.json").c_str());
    std::remove((out + ".b.bin").c_str());
    std::remove((out + ".zhat0.txt").c_str());
}

TEST_CASE("ens_landmarks varies only the anchor count across members") {
    auto c = config_from_json_text(R"({
        "dataset": {"generator": "tetra", "seed": 5},
        "lift": {"kind": "sigmoid_stack", "seed": 1},
        "mode": "ens_landmarks",
        "m": 2,
        "landmarks": [20, 35],
        "structures": [[30, 10]],
        "train": {"epochs": 2},
        "master_seed": 19
    })");
    auto report = run_experiment(c);
    REQUIRE(report.replicates[0].ok);
    auto parsed = nlohmann::json::parse(report.json);
    REQUIRE(parsed["members"].size() == 2);
    CHECK(parsed["members"][0]["landmarks"] == 20);
    CHECK(parsed["members"][1]["landmarks"] == 35);
}
