#include "scedae/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "scedae/ensemble.hpp"
#include "scedae/kernels.hpp"
#include "scedae/metrics.hpp"

namespace scedae {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& msg) { throw config_error("config: " + msg); }

// --- json field access, strict about types ---------------------------------

void check_keys(const Json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (item.key() == a) {
                known = true;
                break;
            }
        }
        if (!known) bad("unknown key '" + item.key() + "' in " + where);
    }
}

const Json* find(const Json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

std::uint64_t as_u64(const Json& v, const std::string& name) {
    if (!v.is_number_unsigned()) bad("'" + name + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::size_t as_count(const Json& v, const std::string& name) {
    const std::uint64_t raw = as_u64(v, name);
    if (raw == 0) bad("'" + name + "' must be at least 1");
    return static_cast<std::size_t>(raw);
}

double as_real(const Json& v, const std::string& name) {
    if (!v.is_number()) bad("'" + name + "' must be a number");
    return v.get<double>();
}

bool as_bool(const Json& v, const std::string& name) {
    if (!v.is_boolean()) bad("'" + name + "' must be true or false");
    return v.get<bool>();
}

std::string as_str(const Json& v, const std::string& name) {
    if (!v.is_string()) bad("'" + name + "' must be a string");
    return v.get<std::string>();
}

// --- mode-aware validation + default expansion ------------------------------

LayerSpec layer_spec_from_widths(const std::vector<std::size_t>& widths) {
    LayerSpec spec;
    spec.hidden.assign(widths.begin(), widths.end() - 1);
    spec.encoding_dim = widths.back();
    return spec;
}

void resolve(ExperimentConfig& c) {
    if (c.dataset.generator.empty() == c.dataset.path.empty()) {
        bad("dataset needs exactly one of 'generator' or 'path'");
    }
    if (!c.dataset.generator.empty() && c.dataset.generator != "tetra" &&
        c.dataset.generator != "chainlink" && c.dataset.generator != "lsun") {
        bad("unknown dataset generator '" + c.dataset.generator + "'");
    }
    if (c.replicates == 0) bad("'replicates' must be at least 1");
    if (c.threads < 0) bad("'threads' must be nonnegative");
    if (!(c.preprocessing.divisor > 0.0)) bad("preprocessing 'divisor' must be positive");

    for (const auto& widths : c.structures) {
        if (widths.empty()) bad("every structure needs at least one width");
        for (std::size_t w : widths) {
            if (w == 0) bad("structure widths must be positive");
        }
    }

    const bool trains = mode_trains(c.mode);
    if (!c.seeds.empty() && c.mode != Mode::ens_init) {
        bad("'seeds' is only valid for mode ens_init");
    }
    if (!c.epochs.empty() && c.mode != Mode::ens_epochs) {
        bad("'epochs' is only valid for mode ens_epochs");
    }
    if (!c.landmarks.empty() && c.mode != Mode::ens_landmarks) {
        bad("'landmarks' is only valid for mode ens_landmarks");
    }
    if (!trains && !c.structures.empty()) {
        bad("'structures' is only valid for modes that train autoencoders");
    }
    if (trains && c.structures.empty()) c.structures = {{50, 75, 100}};

    switch (c.mode) {
        case Mode::ens_init: {
            if (c.structures.size() != 1) bad("ens_init uses exactly one structure");
            if (c.seeds.empty()) {
                const std::size_t target = c.m == 0 ? 5 : c.m;
                for (std::size_t i = 0; i < target; ++i) c.seeds.push_back(i);
            }
            if (c.m == 0) c.m = c.seeds.size();
            if (c.m != c.seeds.size()) {
                bad("mode ens_init needs one seed per member (m = " + std::to_string(c.m) +
                    ", seeds = " + std::to_string(c.seeds.size()) + ")");
            }
            break;
        }
        case Mode::ens_epochs: {
            if (c.structures.size() != 1) bad("ens_epochs uses exactly one structure");
            if (c.epochs.empty()) c.epochs = {50, 100, 150, 200, 250};
            if (c.m == 0) c.m = c.epochs.size();
            if (c.m != c.epochs.size()) {
                bad("mode ens_epochs needs one epoch count per member (m = " +
                    std::to_string(c.m) + ", epochs = " + std::to_string(c.epochs.size()) + ")");
            }
            break;
        }
        case Mode::ens_struct: {
            if (c.structures.size() == 1 && c.m != 1) {
                // One width list stands for all of its permutations.
                std::vector<std::size_t> w = c.structures[0];
                std::sort(w.begin(), w.end());
                std::vector<std::vector<std::size_t>> expanded;
                do {
                    expanded.push_back(w);
                } while (std::next_permutation(w.begin(), w.end()));
                c.structures = std::move(expanded);
            }
            if (c.m == 0) c.m = c.structures.size();
            if (c.m != c.structures.size()) {
                bad("mode ens_struct needs one structure per member (m = " + std::to_string(c.m) +
                    ", structures = " + std::to_string(c.structures.size()) + ")");
            }
            break;
        }
        case Mode::ens_landmarks: {
            if (c.structures.size() != 1) bad("ens_landmarks uses exactly one structure");
            if (c.landmarks.empty()) bad("mode ens_landmarks needs a 'landmarks' list");
            for (std::size_t p : c.landmarks) {
                if (p == 0) bad("landmark counts must be positive");
            }
            if (c.m == 0) c.m = c.landmarks.size();
            if (c.m != c.landmarks.size()) {
                bad("mode ens_landmarks needs one landmark count per member (m = " +
                    std::to_string(c.m) + ", landmarks = " + std::to_string(c.landmarks.size()) +
                    ")");
            }
            break;
        }
        case Mode::baseline_kmeanspp:
        case Mode::baseline_lsc:
        case Mode::baseline_dae_kmeans:
        case Mode::baseline_dae_lsc: {
            if (c.m > 1) bad("baseline modes run a single member (m = " + std::to_string(c.m) + ")");
            c.m = 1;
            if (trains && c.structures.size() != 1) bad("baseline modes use exactly one structure");
            break;
        }
    }

    if (mode_spectral(c.mode)) {
        if (c.anchor.r == 0) bad("anchor 'r' must be at least 1");
        if (c.mode == Mode::ens_landmarks) {
            for (std::size_t p : c.landmarks) {
                if (c.anchor.r > p) {
                    bad("anchor r = " + std::to_string(c.anchor.r) + " exceeds landmark count " +
                        std::to_string(p));
                }
            }
        } else {
            if (c.anchor.p == 0) bad("anchor 'p' must be at least 1");
            if (c.anchor.r > c.anchor.p) {
                bad("anchor r = " + std::to_string(c.anchor.r) + " exceeds landmark count " +
                    std::to_string(c.anchor.p));
            }
        }
        if (c.anchor.bandwidth_mode == BandwidthMode::global_fixed && !(c.anchor.sigma > 0.0)) {
            bad("anchor 'sigma' must be positive for bandwidth_mode global_fixed");
        }
    }
    if (c.kmeans.n_init == 0) bad("kmeans 'n_init' must be at least 1");
    if (c.kmeans.max_iter == 0) bad("kmeans 'max_iter' must be at least 1");
    if (!(c.kmeans.tol >= 0.0)) bad("kmeans 'tol' must be nonnegative");
    if (trains) {
        if (c.train.epochs == 0) bad("train 'epochs' must be at least 1");
        if (c.train.batch_size == 0) bad("train 'batch_size' must be at least 1");
        if (!(c.train.learning_rate > 0.0)) bad("train 'learning_rate' must be positive");
        if (!(c.train.beta1 >= 0.0 && c.train.beta1 < 1.0)) bad("train 'beta1' must lie in [0, 1)");
        if (!(c.train.beta2 >= 0.0 && c.train.beta2 < 1.0)) bad("train 'beta2' must lie in [0, 1)");
        if (!(c.train.epsilon > 0.0)) bad("train 'epsilon' must be positive");
    }
}

// --- config <-> json ---------------------------------------------------------

Json config_json(const ExperimentConfig& c) {
    Json j;
    Json ds;
    if (!c.dataset.generator.empty()) {
        ds["generator"] = c.dataset.generator;
        ds["seed"] = c.dataset.seed;
    } else {
        ds["path"] = c.dataset.path;
    }
    j["dataset"] = std::move(ds);
    if (c.lift.enabled) {
        Json lift;
        lift["kind"] = to_string(c.lift.kind);
        lift["seed"] = c.lift.seed;
        j["lift"] = std::move(lift);
    }
    Json pre;
    pre["divisor"] = c.preprocessing.divisor;
    pre["l2_normalize"] = c.preprocessing.l2_normalize;
    j["preprocessing"] = std::move(pre);
    j["mode"] = to_string(c.mode);
    j["m"] = c.m;
    if (c.k > 0) j["k"] = c.k;
    if (!c.structures.empty()) j["structures"] = c.structures;
    if (!c.epochs.empty()) j["epochs"] = c.epochs;
    if (!c.seeds.empty()) j["seeds"] = c.seeds;
    if (!c.landmarks.empty()) j["landmarks"] = c.landmarks;
    Json anchor;
    anchor["p"] = c.anchor.p;
    anchor["r"] = c.anchor.r;
    anchor["bandwidth_mode"] = to_string(c.anchor.bandwidth_mode);
    anchor["sigma"] = c.anchor.sigma;
    j["anchor"] = std::move(anchor);
    Json km;
    km["n_init"] = c.kmeans.n_init;
    km["max_iter"] = c.kmeans.max_iter;
    km["tol"] = c.kmeans.tol;
    j["kmeans"] = std::move(km);
    Json train;
    train["epochs"] = c.train.epochs;
    train["batch_size"] = c.train.batch_size;
    train["learning_rate"] = c.train.learning_rate;
    train["beta1"] = c.train.beta1;
    train["beta2"] = c.train.beta2;
    train["epsilon"] = c.train.epsilon;
    j["train"] = std::move(train);
    j["replicates"] = c.replicates;
    j["master_seed"] = c.master_seed;
    j["threads"] = c.threads;
    j["row_normalize_b"] = c.row_normalize_b;
    if (!c.output.empty()) j["output"] = c.output;
    j["export_b"] = c.export_b;
    j["dump_z_hat"] = c.dump_z_hat;
    return j;
}

// --- run helpers -------------------------------------------------------------

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void add_stage_seconds(std::vector<std::pair<std::string, double>>& stages,
                       const std::string& name, double secs) {
    for (auto& [n, s] : stages) {
        if (n == name) {
            s += secs;
            return;
        }
    }
    stages.emplace_back(name, secs);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

struct MetricStats {
    double mean = 0.0;
    double std_dev = 0.0;
    double median = 0.0;
};

MetricStats stats_of(std::vector<double> v) {
    MetricStats s;
    const double n = static_cast<double>(v.size());
    for (double x : v) s.mean += x;
    s.mean /= n;
    if (v.size() > 1) {
        double sq = 0.0;
        for (double x : v) sq += (x - s.mean) * (x - s.mean);
        s.std_dev = std::sqrt(sq / (n - 1.0));
    }
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    s.median = (v.size() % 2 == 1) ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
    return s;
}

Json stats_json(const MetricStats& s) {
    Json j;
    j["mean"] = s.mean;
    j["std"] = s.std_dev;
    j["median"] = s.median;
    return j;
}

// One autoencoder to train: which widths, how long, and the stream label
// that pins its seed.
struct SlotPlan {
    LayerSpec spec;
    std::size_t epochs = 0;
    std::uint64_t label = 0;
};

struct SlotOutcome {
    bool ok = false;
    std::string error;
    DenseMatrix encoding;
};

}  // namespace

Mode mode_from_string(const std::string& s) {
    if (s == "ens_init") return Mode::ens_init;
    if (s == "ens_epochs") return Mode::ens_epochs;
    if (s == "ens_struct") return Mode::ens_struct;
    if (s == "ens_landmarks") return Mode::ens_landmarks;
    if (s == "baseline_kmeanspp") return Mode::baseline_kmeanspp;
    if (s == "baseline_lsc") return Mode::baseline_lsc;
    if (s == "baseline_dae_kmeans") return Mode::baseline_dae_kmeans;
    if (s == "baseline_dae_lsc") return Mode::baseline_dae_lsc;
    throw config_error("unknown mode '" + s + "'");
}

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::ens_init: return "ens_init";
        case Mode::ens_epochs: return "ens_epochs";
        case Mode::ens_struct: return "ens_struct";
        case Mode::ens_landmarks: return "ens_landmarks";
        case Mode::baseline_kmeanspp: return "baseline_kmeanspp";
        case Mode::baseline_lsc: return "baseline_lsc";
        case Mode::baseline_dae_kmeans: return "baseline_dae_kmeans";
        case Mode::baseline_dae_lsc: return "baseline_dae_lsc";
    }
    throw std::logic_error("unreachable mode");
}

bool is_baseline(Mode mode) {
    return mode == Mode::baseline_kmeanspp || mode == Mode::baseline_lsc ||
           mode == Mode::baseline_dae_kmeans || mode == Mode::baseline_dae_lsc;
}

bool mode_trains(Mode mode) {
    return mode == Mode::ens_init || mode == Mode::ens_epochs || mode == Mode::ens_struct ||
           mode == Mode::ens_landmarks || mode == Mode::baseline_dae_kmeans ||
           mode == Mode::baseline_dae_lsc;
}

bool mode_spectral(Mode mode) {
    return mode == Mode::ens_init || mode == Mode::ens_epochs || mode == Mode::ens_struct ||
           mode == Mode::ens_landmarks || mode == Mode::baseline_lsc ||
           mode == Mode::baseline_dae_lsc;
}

std::uint64_t structure_fingerprint(const std::vector<std::size_t>& widths) {
    // FNV-1a over the 64-bit widths, length first.
    std::uint64_t h = 0xcbf29ce484222325ull;
    const auto fold = [&h](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ull;
    };
    fold(widths.size());
    for (std::size_t w : widths) fold(w);
    return h;
}

std::uint64_t member_stream_label(const ExperimentConfig& config, std::size_t l) {
    switch (config.mode) {
        case Mode::ens_init: return config.seeds.at(l);
        case Mode::ens_epochs: return config.epochs.at(l);
        case Mode::ens_struct: return structure_fingerprint(config.structures.at(l));
        default: return 0;
    }
}

ExperimentConfig config_from_json_text(const std::string& text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        bad(std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) bad("top level must be a JSON object");
    check_keys(root, "the top level",
               {"dataset", "lift", "preprocessing", "mode", "m", "k", "structures", "epochs",
                "seeds", "landmarks", "anchor", "kmeans", "train", "replicates", "master_seed",
                "threads", "row_normalize_b", "output", "export_b", "dump_z_hat"});

    ExperimentConfig c;

    const Json* dataset = find(root, "dataset");
    if (!dataset) bad("missing required key 'dataset'");
    if (!dataset->is_object()) bad("'dataset' must be an object");
    check_keys(*dataset, "'dataset'", {"generator", "seed", "path"});
    if (const Json* v = find(*dataset, "generator")) c.dataset.generator = as_str(*v, "dataset.generator");
    if (const Json* v = find(*dataset, "seed")) c.dataset.seed = as_u64(*v, "dataset.seed");
    if (const Json* v = find(*dataset, "path")) c.dataset.path = as_str(*v, "dataset.path");

    if (const Json* lift = find(root, "lift")) {
        if (!lift->is_object()) bad("'lift' must be an object");
        check_keys(*lift, "'lift'", {"kind", "seed"});
        c.lift.enabled = true;
        if (const Json* v = find(*lift, "kind")) {
            try {
                c.lift.kind = lift_kind_from_string(as_str(*v, "lift.kind"));
            } catch (const config_error&) {
                throw;
            } catch (const std::exception& e) {
                bad(e.what());
            }
        }
        if (const Json* v = find(*lift, "seed")) c.lift.seed = as_u64(*v, "lift.seed");
    }

    if (const Json* pre = find(root, "preprocessing")) {
        if (!pre->is_object()) bad("'preprocessing' must be an object");
        check_keys(*pre, "'preprocessing'", {"divisor", "l2_normalize"});
        if (const Json* v = find(*pre, "divisor")) c.preprocessing.divisor = as_real(*v, "preprocessing.divisor");
        if (const Json* v = find(*pre, "l2_normalize")) c.preprocessing.l2_normalize = as_bool(*v, "preprocessing.l2_normalize");
    }

    const Json* mode = find(root, "mode");
    if (!mode) bad("missing required key 'mode'");
    try {
        c.mode = mode_from_string(as_str(*mode, "mode"));
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& e) {
        bad(e.what());
    }

    if (const Json* v = find(root, "m")) c.m = as_count(*v, "m");
    if (const Json* v = find(root, "k")) c.k = as_count(*v, "k");

    if (const Json* v = find(root, "structures")) {
        if (!v->is_array()) bad("'structures' must be an array of width lists");
        for (const Json& entry : *v) {
            if (!entry.is_array()) bad("every entry of 'structures' must be a width list");
            std::vector<std::size_t> widths;
            for (const Json& w : entry) widths.push_back(as_count(w, "structure width"));
            c.structures.push_back(std::move(widths));
        }
    }
    if (const Json* v = find(root, "epochs")) {
        if (!v->is_array()) bad("'epochs' must be an array");
        for (const Json& e : *v) c.epochs.push_back(as_count(e, "epochs entry"));
    }
    if (const Json* v = find(root, "seeds")) {
        if (!v->is_array()) bad("'seeds' must be an array");
        for (const Json& e : *v) c.seeds.push_back(as_u64(e, "seeds entry"));
    }
    if (const Json* v = find(root, "landmarks")) {
        if (!v->is_array()) bad("'landmarks' must be an array");
        for (const Json& e : *v) c.landmarks.push_back(as_count(e, "landmarks entry"));
    }

    if (const Json* anchor = find(root, "anchor")) {
        if (!anchor->is_object()) bad("'anchor' must be an object");
        check_keys(*anchor, "'anchor'", {"p", "r", "bandwidth_mode", "sigma"});
        if (const Json* v = find(*anchor, "p")) c.anchor.p = as_count(*v, "anchor.p");
        if (const Json* v = find(*anchor, "r")) c.anchor.r = as_count(*v, "anchor.r");
        if (const Json* v = find(*anchor, "bandwidth_mode")) {
            try {
                c.anchor.bandwidth_mode = bandwidth_mode_from_string(as_str(*v, "anchor.bandwidth_mode"));
            } catch (const config_error&) {
                throw;
            } catch (const std::exception& e) {
                bad(e.what());
            }
        }
        if (const Json* v = find(*anchor, "sigma")) c.anchor.sigma = as_real(*v, "anchor.sigma");
    }

    if (const Json* km = find(root, "kmeans")) {
        if (!km->is_object()) bad("'kmeans' must be an object");
        check_keys(*km, "'kmeans'", {"n_init", "max_iter", "tol"});
        if (const Json* v = find(*km, "n_init")) c.kmeans.n_init = as_count(*v, "kmeans.n_init");
        if (const Json* v = find(*km, "max_iter")) c.kmeans.max_iter = as_count(*v, "kmeans.max_iter");
        if (const Json* v = find(*km, "tol")) c.kmeans.tol = as_real(*v, "kmeans.tol");
    }

    if (const Json* train = find(root, "train")) {
        if (!train->is_object()) bad("'train' must be an object");
        check_keys(*train, "'train'",
                   {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon"});
        if (const Json* v = find(*train, "epochs")) c.train.epochs = as_count(*v, "train.epochs");
        if (const Json* v = find(*train, "batch_size")) c.train.batch_size = as_count(*v, "train.batch_size");
        if (const Json* v = find(*train, "learning_rate")) c.train.learning_rate = as_real(*v, "train.learning_rate");
        if (const Json* v = find(*train, "beta1")) c.train.beta1 = as_real(*v, "train.beta1");
        if (const Json* v = find(*train, "beta2")) c.train.beta2 = as_real(*v, "train.beta2");
        if (const Json* v = find(*train, "epsilon")) c.train.epsilon = as_real(*v, "train.epsilon");
    }

    if (const Json* v = find(root, "replicates")) c.replicates = as_count(*v, "replicates");
    if (const Json* v = find(root, "master_seed")) c.master_seed = as_u64(*v, "master_seed");
    if (const Json* v = find(root, "threads")) {
        c.threads = static_cast<int>(as_u64(*v, "threads"));
    }
    if (const Json* v = find(root, "row_normalize_b")) c.row_normalize_b = as_bool(*v, "row_normalize_b");
    if (const Json* v = find(root, "output")) c.output = as_str(*v, "output");
    if (const Json* v = find(root, "export_b")) c.export_b = as_bool(*v, "export_b");
    if (const Json* v = find(root, "dump_z_hat")) c.dump_z_hat = as_bool(*v, "dump_z_hat");

    resolve(c);
    return c;
}

std::string config_to_json_text(const ExperimentConfig& config) {
    return config_json(config).dump(2) + "\n";
}

RunReport run_experiment(const ExperimentConfig& config_in) {
    ExperimentConfig config = config_in;
    resolve(config);  // idempotent; lets struct-built configs rely on the same defaults
    if (config.threads > 0) omp_set_num_threads(config.threads);

    RunReport report;
    const auto t_total = Clock::now();

    // --- data ----------------------------------------------------------------
    auto t_stage = Clock::now();
    Dataset ds = config.dataset.path.empty()
                     ? gen_by_name(config.dataset.generator, config.dataset.seed)
                     : load_dataset(config.dataset.path);
    if (config.lift.enabled) {
        const LiftingTransform t = make_lift(config.lift.kind, ds.x.cols, SeededRng(config.lift.seed));
        ds.x = lift(ds.x, t);
    }
    if (config.preprocessing.divisor != 1.0) ds.x = rescale_unit(ds.x, config.preprocessing.divisor);
    if (config.preprocessing.l2_normalize) ds.x = kernels::row_l2_normalize(ds.x);
    add_stage_seconds(report.stage_seconds, "dataset", seconds_since(t_stage));

    std::size_t k = config.k;
    if (k == 0) {
        if (ds.k_true <= 0) {
            throw std::runtime_error(
                "run: config gives no k and the dataset carries no ground-truth cluster count");
        }
        k = static_cast<std::size_t>(ds.k_true);
    }
    if (k < 2) throw std::runtime_error("run: k must be at least 2, got " + std::to_string(k));

    // --- member plans ----------------------------------------------------------
    const std::size_t m = config.m;
    const bool trains = mode_trains(config.mode);
    const bool multi_slot =
        config.mode == Mode::ens_init || config.mode == Mode::ens_epochs || config.mode == Mode::ens_struct;
    const std::size_t slots = trains ? (multi_slot ? m : 1) : 0;

    std::vector<SlotPlan> slot_plans(slots);
    for (std::size_t s = 0; s < slots; ++s) {
        const auto& widths =
            config.mode == Mode::ens_struct ? config.structures[s] : config.structures[0];
        slot_plans[s].spec = layer_spec_from_widths(widths);
        slot_plans[s].epochs =
            config.mode == Mode::ens_epochs ? config.epochs[s] : config.train.epochs;
        slot_plans[s].label = member_stream_label(config, s);
    }

    const SeededRng master(config.master_seed);

    // --- phase A: every (replicate, member) autoencoder, in parallel ----------
    std::vector<SlotOutcome> slot_outcomes(config.replicates * slots);
    if (slots > 0) {
        t_stage = Clock::now();
        const std::int64_t total = static_cast<std::int64_t>(config.replicates * slots);
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t t = 0; t < total; ++t) {
            const std::size_t rep = static_cast<std::size_t>(t) / slots;
            const std::size_t slot = static_cast<std::size_t>(t) % slots;
            const SlotPlan& plan = slot_plans[slot];
            SlotOutcome& out = slot_outcomes[static_cast<std::size_t>(t)];
            try {
                TrainConfig tc = config.train;
                tc.epochs = plan.epochs;
                tc.seed = master.derive(kStreamReplicate)
                              .derive(rep)
                              .derive(kStreamTrain)
                              .derive(plan.label)
                              .key();
                const TrainResult trained = train(ds.x, plan.spec, tc);
                out.encoding = encode(trained.model, ds.x);
                out.ok = true;
            } catch (const std::exception& e) {
                out.error = "member " + std::to_string(slot) + " (" + plan.spec.label() +
                            "): " + e.what();
            }
        }
        add_stage_seconds(report.stage_seconds, "training", seconds_since(t_stage));
    }

    // --- phase B: the clustering path, one replicate at a time ----------------
    report.replicates.resize(config.replicates);
    DenseMatrix b_export;
    std::vector<SparseAffinity> zhat_export;
    bool have_export = false;

    for (std::size_t rep = 0; rep < config.replicates; ++rep) {
        ReplicateOutcome& out = report.replicates[rep];
        bool training_failed = false;
        for (std::size_t s = 0; s < slots; ++s) {
            const SlotOutcome& slot = slot_outcomes[rep * slots + s];
            if (!slot.ok) {
                out.stage = "training";
                out.error = slot.error;
                training_failed = true;
                break;
            }
        }
        if (training_failed) continue;

        const SeededRng rep_rng = master.derive(kStreamReplicate).derive(rep);
        try {
            Partition part;
            if (config.mode == Mode::baseline_kmeanspp || config.mode == Mode::baseline_dae_kmeans) {
                t_stage = Clock::now();
                const DenseMatrix& features = config.mode == Mode::baseline_kmeanspp
                                                  ? ds.x
                                                  : slot_outcomes[rep * slots].encoding;
                KMeansConfig kc = config.kmeans;
                kc.k = k;
                kc.seed = rep_rng.derive(kStreamDirectKMeans).key();
                try {
                    part = kmeans(features, kc);
                } catch (const std::exception& e) {
                    throw StageError("k-means", e.what());
                }
                add_stage_seconds(report.stage_seconds, "k-means", seconds_since(t_stage));
            } else {
                t_stage = Clock::now();
                EncodingSet set;
                std::vector<AnchorConfig> anchors;
                if (config.mode == Mode::baseline_lsc) {
                    set.encodings.push_back(ds.x);
                    set.provenance.push_back(EncodingProvenance{LayerSpec{}, config.train, false});
                    anchors.push_back(config.anchor);
                } else if (config.mode == Mode::ens_landmarks) {
                    for (std::size_t l = 0; l < m; ++l) {
                        set.encodings.push_back(slot_outcomes[rep * slots].encoding);
                        set.provenance.push_back(
                            EncodingProvenance{slot_plans[0].spec, config.train, true});
                        AnchorConfig a = config.anchor;
                        a.p = config.landmarks[l];
                        anchors.push_back(a);
                    }
                } else {
                    for (std::size_t s = 0; s < slots; ++s) {
                        set.encodings.push_back(slot_outcomes[rep * slots + s].encoding);
                        set.provenance.push_back(
                            EncodingProvenance{slot_plans[s].spec, config.train, true});
                    }
                    anchors.push_back(config.anchor);
                }
                ScEdaeOptions opts;
                opts.row_normalize_b = config.row_normalize_b;
                ScEdaeResult res = sc_edae(set, anchors, config.kmeans, k,
                                           rep_rng.derive(kStreamPipeline), opts);
                part = std::move(res.partition);
                if (rep == 0 && !config.output.empty() && (config.export_b || config.dump_z_hat)) {
                    b_export = std::move(res.embedding.b);
                    zhat_export = std::move(res.affinities);
                    have_export = true;
                }
                add_stage_seconds(report.stage_seconds, "pipeline", seconds_since(t_stage));
            }

            out.inertia = part.inertia;
            out.labels = std::move(part.labels);
            if (ds.has_labels()) {
                t_stage = Clock::now();
                try {
                    out.acc = accuracy(out.labels, ds.labels);
                    out.nmi = nmi(out.labels, ds.labels);
                    out.ari = ari(out.labels, ds.labels);
                } catch (const std::exception& e) {
                    throw StageError("metrics", e.what());
                }
                out.has_metrics = true;
                add_stage_seconds(report.stage_seconds, "metrics", seconds_since(t_stage));
            }
            out.ok = true;
        } catch (const StageError& e) {
            out.stage = e.stage;
            out.error = e.what();
            out.has_metrics = false;
        } catch (const std::exception& e) {
            out.stage = "pipeline";
            out.error = e.what();
            out.has_metrics = false;
        }
    }

    // --- report ---------------------------------------------------------------
    ExperimentConfig echo = config;
    echo.k = k;

    Json j;
    j["config"] = config_json(echo);
    Json dsj;
    dsj["name"] = ds.name;
    dsj["rows"] = ds.x.rows;
    dsj["cols"] = ds.x.cols;
    dsj["has_labels"] = ds.has_labels();
    if (ds.k_true > 0) dsj["k_true"] = ds.k_true;
    j["dataset"] = std::move(dsj);

    Json members = Json::array();
    if (mode_spectral(config.mode)) {
        for (std::size_t l = 0; l < m; ++l) {
            Json mj;
            mj["index"] = l;
            const bool member_trained = trains;
            mj["trained"] = member_trained;
            if (member_trained) {
                const SlotPlan& plan = multi_slot ? slot_plans[l] : slot_plans[0];
                mj["structure"] = plan.spec.label();
                mj["epochs"] = plan.epochs;
                mj["stream_label"] = plan.label;
            }
            mj["landmarks"] =
                config.mode == Mode::ens_landmarks ? config.landmarks[l] : config.anchor.p;
            members.push_back(std::move(mj));
        }
    } else if (config.mode == Mode::baseline_dae_kmeans) {
        Json mj;
        mj["index"] = 0;
        mj["trained"] = true;
        mj["structure"] = slot_plans[0].spec.label();
        mj["epochs"] = slot_plans[0].epochs;
        mj["stream_label"] = slot_plans[0].label;
        members.push_back(std::move(mj));
    }
    j["members"] = std::move(members);

    Json reps = Json::array();
    std::vector<double> accs, nmis, aris, inertias;
    for (std::size_t i = 0; i < report.replicates.size(); ++i) {
        const ReplicateOutcome& out = report.replicates[i];
        Json rj;
        rj["index"] = i;
        rj["ok"] = out.ok;
        if (out.ok) {
            if (out.has_metrics) {
                rj["acc"] = out.acc;
                rj["nmi"] = out.nmi;
                rj["ari"] = out.ari;
                accs.push_back(out.acc);
                nmis.push_back(out.nmi);
                aris.push_back(out.ari);
            }
            rj["inertia"] = out.inertia;
            inertias.push_back(out.inertia);
        } else {
            rj["stage"] = out.stage;
            rj["error"] = out.error;
        }
        reps.push_back(std::move(rj));
    }
    j["replicates"] = std::move(reps);

    Json summary;
    summary["replicates"] = config.replicates;
    summary["replicates_ok"] = inertias.size();
    if (!accs.empty()) {
        summary["acc"] = stats_json(stats_of(accs));
        summary["nmi"] = stats_json(stats_of(nmis));
        summary["ari"] = stats_json(stats_of(aris));
    }
    if (!inertias.empty()) summary["inertia"] = stats_json(stats_of(inertias));
    j["summary"] = std::move(summary);

    add_stage_seconds(report.stage_seconds, "total", seconds_since(t_total));
    report.json = j.dump(2) + "\n";

    // --- files ------------------------------------------------------------------
    if (!config.output.empty()) {
        write_text_file(config.output, report.json);

        Json timing;
        Json stages;
        for (const auto& [name, secs] : report.stage_seconds) stages[name] = secs;
        timing["stages"] = std::move(stages);
        timing["threads"] = omp_get_max_threads();
        write_text_file(config.output + ".timings.json", timing.dump(2) + "\n");

        if (config.export_b && have_export) {
            Dataset emb;
            emb.name = "embedding";
            emb.x = b_export;
            if (report.replicates[0].ok) emb.labels = report.replicates[0].labels;
            emb.k_true = static_cast<int>(k);
            save_binary(emb, config.output + ".b.bin");
        }
        if (config.dump_z_hat && have_export) {
            for (std::size_t l = 0; l < zhat_export.size(); ++l) {
                dump_triplets(zhat_export[l].z_hat,
                              config.output + ".zhat" + std::to_string(l) + ".txt");
            }
        }
    }
    return report;
}

}  // namespace scedae
