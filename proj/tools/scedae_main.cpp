#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scedae/datasets.hpp"
#include "scedae/experiment.hpp"
#include "scedae/metrics.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw scedae::config_error("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Truth/prediction columns for `eval`: either a full dataset file (labels
// attached) or a bare label list (CSV with a single `label` column, or one
// integer per line).
std::vector<std::int32_t> load_labels(const std::string& path) {
    scedae::Dataset ds;
    try {
        ds = scedae::load_dataset(path);
    } catch (const std::exception&) {
        // Not a dataset file; fall through to the bare-list reader.
        ds = scedae::Dataset{};
    }
    if (ds.has_labels()) return ds.labels;

    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<std::int32_t> labels;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first && line == "label") {
            first = false;
            continue;
        }
        first = false;
        try {
            labels.push_back(static_cast<std::int32_t>(std::stol(line)));
        } catch (const std::exception&) {
            throw std::runtime_error("'" + path + "': '" + line + "' is not an integer label");
        }
    }
    if (labels.empty()) throw std::runtime_error("'" + path + "': no labels found");
    return labels;
}

int cmd_run(const std::string& config_path) {
    scedae::ExperimentConfig config =
        scedae::config_from_json_text(read_text_file(config_path));
    const scedae::RunReport report = scedae::run_experiment(config);

    std::size_t ok = 0;
    for (std::size_t i = 0; i < report.replicates.size(); ++i) {
        const scedae::ReplicateOutcome& rep = report.replicates[i];
        if (!rep.ok) {
            std::printf("replicate %zu: failed at %s: %s\n", i, rep.stage.c_str(),
                        rep.error.c_str());
            continue;
        }
        ++ok;
        if (rep.has_metrics) {
            std::printf("replicate %zu: ACC %.4f  NMI %.4f  ARI %.4f  inertia %.6g\n", i, rep.acc,
                        rep.nmi, rep.ari, rep.inertia);
        } else {
            std::printf("replicate %zu: inertia %.6g (no ground truth)\n", i, rep.inertia);
        }
    }
    std::printf("replicates ok: %zu/%zu\n", ok, report.replicates.size());
    if (!config.output.empty()) std::printf("report: %s\n", config.output.c_str());
    return ok > 0 ? kExitOk : kExitRuntime;
}

int cmd_gen(const std::string& name, std::uint64_t seed, const std::string& out) {
    const scedae::Dataset ds = scedae::gen_by_name(name, seed);
    if (out.size() >= 4 && out.substr(out.size() - 4) == ".csv") {
        scedae::save_csv(ds, out);
    } else {
        scedae::save_binary(ds, out);
    }
    std::printf("%s: %zu x %zu, k=%d -> %s\n", ds.name.c_str(), ds.x.rows, ds.x.cols, ds.k_true,
                out.c_str());
    return kExitOk;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path) {
    const std::vector<std::int32_t> pred = load_labels(pred_path);
    const std::vector<std::int32_t> truth = load_labels(truth_path);
    std::printf("ACC %.6f\nNMI %.6f\nARI %.6f\n", scedae::accuracy(pred, truth),
                scedae::nmi(pred, truth), scedae::ari(pred, truth));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ensemble spectral clustering on autoencoder encodings"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "Run an experiment from a JSON config");
    run->add_option("--config", config_path, "Experiment config file")->required();

    std::string gen_name, gen_out;
    std::uint64_t gen_seed = 0;
    CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic dataset file");
    gen->add_option("--dataset", gen_name, "tetra | chainlink | lsun")
        ->required()
        ->check(CLI::IsMember({"tetra", "chainlink", "lsun"}));
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--out", gen_out, "Output file (.csv for text, anything else binary)")
        ->required();

    std::string pred_path, truth_path;
    CLI::App* eval = app.add_subcommand("eval", "Score predicted labels against ground truth");
    eval->add_option("--pred", pred_path, "Predicted labels (dataset file or label list)")
        ->required();
    eval->add_option("--truth", truth_path, "True labels (dataset file or label list)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(config_path);
        if (gen->parsed()) return cmd_gen(gen_name, gen_seed, gen_out);
        if (eval->parsed()) return cmd_eval(pred_path, truth_path);
    } catch (const scedae::config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitConfig;
}
