#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "scedae/anchor_graph.hpp"
#include "scedae/autoencoder.hpp"
#include "scedae/datasets.hpp"
#include "scedae/kmeans.hpp"

namespace scedae {

/// Configuration problems (bad keys, bad values, inconsistent lists). The
/// command line maps these to exit code 2; everything else raised during a
/// run maps to 3.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// How the ensemble members differ, or which single-model baseline runs.
enum class Mode {
    ens_init,       // m autoencoders, same structure, different initializations
    ens_epochs,     // m autoencoders stopped at different epoch counts
    ens_struct,     // m autoencoders with different layer structures
    ens_landmarks,  // one autoencoder, m anchor graphs with different landmark counts
    baseline_kmeanspp,     // k-means directly on the preprocessed data
    baseline_lsc,          // single anchor-graph spectral run on the preprocessed data
    baseline_dae_kmeans,   // k-means on one trained encoding
    baseline_dae_lsc,      // single anchor-graph spectral run on one trained encoding
};

Mode mode_from_string(const std::string& s);
std::string to_string(Mode mode);

/// True for the four baseline_* modes.
bool is_baseline(Mode mode);

/// True when the mode trains at least one autoencoder.
bool mode_trains(Mode mode);

/// True when the mode runs the anchor-graph + spectral-embedding path.
bool mode_spectral(Mode mode);

struct DatasetSource {
    std::string generator;  // "tetra" | "chainlink" | "lsun"; empty when path is set
    std::uint64_t seed = 0;
    std::string path;       // dataset file; empty when generator is set
};

struct LiftSpec {
    bool enabled = false;
    LiftKind kind = LiftKind::sigmoid_stack;
    std::uint64_t seed = 0;
};

struct Preprocessing {
    double divisor = 1.0;      // entries divided by this first
    bool l2_normalize = false; // then rows scaled to unit norm
};

/// A full experiment description. config_from_json_text() returns it with
/// all mode defaults expanded, so serializing it back echoes the resolved
/// run exactly.
struct ExperimentConfig {
    DatasetSource dataset;
    LiftSpec lift;
    Preprocessing preprocessing;
    Mode mode = Mode::ens_struct;
    std::size_t m = 0;  // member count; 0 lets the mode defaults decide
    std::size_t k = 0;  // cluster count; 0 means "use the dataset ground truth"
    std::vector<std::vector<std::size_t>> structures;  // widths, bottleneck last
    std::vector<std::size_t> epochs;                   // ens_epochs only
    std::vector<std::uint64_t> seeds;                  // ens_init stream labels only
    std::vector<std::size_t> landmarks;                // ens_landmarks only
    AnchorConfig anchor;
    KMeansConfig kmeans;  // k and seed fields are derived per run, not configured
    TrainConfig train;    // seed field is derived per member, not configured
    std::size_t replicates = 1;
    std::uint64_t master_seed = 0;
    int threads = 0;  // OpenMP thread cap; 0 keeps the runtime default
    bool row_normalize_b = false;
    std::string output;  // report path; empty writes no files
    bool export_b = false;    // also write replicate 0's embedding next to the report
    bool dump_z_hat = false;  // also write replicate 0's affinity triplets
};

/// Parse + validate + resolve defaults. Unknown keys, wrong types, and
/// mode-inconsistent lists all raise config_error.
ExperimentConfig config_from_json_text(const std::string& text);

/// Resolved-config echo; config_from_json_text(config_to_json_text(c))
/// reproduces c field-for-field.
std::string config_to_json_text(const ExperimentConfig& config);

// Stream labels used to derive per-replicate and per-member seeds from the
// master seed. Exposed so tests can reproduce any stage in isolation:
//   replicate rng  = SeededRng(master).derive(kStreamReplicate).derive(i)
//   member train   = replicate.derive(kStreamTrain).derive(member label).key()
//   spectral path  = replicate.derive(kStreamPipeline)  (handed to sc_edae)
//   direct k-means = replicate.derive(kStreamDirectKMeans).key()
inline constexpr std::uint64_t kStreamReplicate = 1;
inline constexpr std::uint64_t kStreamTrain = 2;
inline constexpr std::uint64_t kStreamPipeline = 3;
inline constexpr std::uint64_t kStreamDirectKMeans = 4;

/// Stream label of ensemble member l: its configured seed for ens_init, its
/// epoch count for ens_epochs, a structure fingerprint for ens_struct, and 0
/// for single-encoding modes — so dropping one member from the config never
/// changes the draws of the others.
std::uint64_t member_stream_label(const ExperimentConfig& config, std::size_t l);

/// Order-sensitive fingerprint of a width list (pure u64 function).
std::uint64_t structure_fingerprint(const std::vector<std::size_t>& widths);

struct ReplicateOutcome {
    bool ok = false;
    std::string stage;  // failing stage when !ok
    std::string error;  // failure message when !ok
    bool has_metrics = false;
    double acc = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
    double inertia = 0.0;
    std::vector<std::int32_t> labels;  // predicted labels when ok
};

struct RunReport {
    std::string json;  // deterministic serialized report (what lands on disk)
    std::vector<ReplicateOutcome> replicates;
    // Wall-clock seconds per stage, summed over replicates. Deliberately
    // kept out of `json` and written to a separate .timings.json sidecar so
    // identical configs produce byte-identical reports.
    std::vector<std::pair<std::string, double>> stage_seconds;
};

/// Execute the configured experiment: load data, train the member
/// autoencoders (replicates x members in parallel), run the clustering path
/// per replicate, score against ground truth, and assemble the report. A
/// failed replicate is recorded with its stage and message; the others
/// proceed. Writes the report, a timing sidecar, and any requested artifact
/// files when config.output is set.
RunReport run_experiment(const ExperimentConfig& config);

}  // namespace scedae
