#include "scedae/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "scedae/kernels.hpp"

namespace scedae {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Geometry constants for the synthetic generators. Chosen so that ground
// truth is recoverable by a full spectral pipeline while keeping each
// shape's defining difficulty (see the generator comments below).

// tetra: blob scale and spread
constexpr double kTetraSigma = 0.25;
// chainlink: ring radius (= ring-center offset) and point jitter; the
// figure is centered at the origin and sized so that random sigmoid maps
// of the coordinates stay out of their saturated range
constexpr double kChainRadius = 0.75;
constexpr double kChainJitter = 0.06;
// lsun: bar half-width and length, blob centers / spreads
constexpr double kLsunBar = 0.5;
constexpr double kLsunLen = 3.0;
constexpr double kBlob1X = 2.0, kBlob1Y = 2.7, kBlob1Sigma = 0.16;
constexpr double kBlob2X = 3.8, kBlob2Y = 1.6, kBlob2Sigma = 0.30;

void append_gaussian_blob(DenseMatrix& x, std::vector<std::int32_t>& labels, std::size_t& next,
                          std::int32_t label, std::size_t count, const double* center,
                          double sigma, std::size_t dim, SeededRng& rng) {
    for (std::size_t i = 0; i < count; ++i, ++next) {
        labels[next] = label;
        for (std::size_t c = 0; c < dim; ++c) x(next, c) = center[c] + sigma * rng.normal();
    }
}

}  // namespace

Dataset gen_tetra(std::uint64_t seed) {
    // Four equally spaced Gaussian blobs: inner spread is small against the
    // inter-center distance, so the clusters are compact and well separated.
    constexpr std::size_t kPerCluster = 100;
    const double inv = 1.0 / std::sqrt(3.0);
    const double centers[4][3] = {{inv, inv, inv},
                                  {inv, -inv, -inv},
                                  {-inv, inv, -inv},
                                  {-inv, -inv, inv}};
    Dataset ds;
    ds.name = "tetra";
    ds.k_true = 4;
    ds.x = DenseMatrix(4 * kPerCluster, 3);
    ds.labels.assign(4 * kPerCluster, 0);
    SeededRng rng(seed);
    std::size_t next = 0;
    for (std::int32_t c = 0; c < 4; ++c)
        append_gaussian_blob(ds.x, ds.labels, next, c, kPerCluster, centers[c], kTetraSigma, 3, rng);
    ds.x.require_finite("gen_tetra");
    return ds;
}

Dataset gen_chainlink(std::uint64_t seed) {
    // Two interlocked circles of radius kChainRadius in orthogonal planes:
    // one in the xy-plane around (-kChainRadius/2, 0, 0), one in the xz-plane
    // around (+kChainRadius/2, 0, 0), each with isotropic jitter. The rings
    // pass through each other, so no hyperplane separates them, yet the
    // closest approach of the ideal curves equals kChainRadius.
    constexpr std::size_t kPerRing = 500;
    Dataset ds;
    ds.name = "chainlink";
    ds.k_true = 2;
    ds.x = DenseMatrix(2 * kPerRing, 3);
    ds.labels.assign(2 * kPerRing, 0);
    SeededRng rng(seed);
    const double two_pi = 6.283185307179586476925286766559;
    std::size_t next = 0;
    for (std::size_t i = 0; i < kPerRing; ++i, ++next) {
        const double t = two_pi * rng.u01();
        ds.labels[next] = 0;
        ds.x(next, 0) = -0.5 * kChainRadius + kChainRadius * std::cos(t) +
                        kChainJitter * rng.normal();
        ds.x(next, 1) = kChainRadius * std::sin(t) + kChainJitter * rng.normal();
        ds.x(next, 2) = kChainJitter * rng.normal();
    }
    for (std::size_t i = 0; i < kPerRing; ++i, ++next) {
        const double t = two_pi * rng.u01();
        ds.labels[next] = 1;
        ds.x(next, 0) = 0.5 * kChainRadius + kChainRadius * std::cos(t) +
                        kChainJitter * rng.normal();
        ds.x(next, 1) = kChainJitter * rng.normal();
        ds.x(next, 2) = kChainRadius * std::sin(t) + kChainJitter * rng.normal();
    }
    ds.x.require_finite("gen_chainlink");
    return ds;
}

Dataset gen_lsun(std::uint64_t seed) {
    // An L-shaped uniform cluster (two perpendicular bars) plus one tight and
    // one wide Gaussian blob: three clusters with very different shapes and
    // variances.
    constexpr std::size_t kLCount = 200, kBlobCount = 100;
    Dataset ds;
    ds.name = "lsun";
    ds.k_true = 3;
    ds.x = DenseMatrix(kLCount + 2 * kBlobCount, 2);
    ds.labels.assign(kLCount + 2 * kBlobCount, 0);
    SeededRng rng(seed);
    std::size_t next = 0;
    for (std::size_t i = 0; i < kLCount; ++i, ++next) {
        // Rejection-sample the union of the vertical and horizontal bar.
        double px, py;
        do {
            px = kLsunLen * rng.u01();
            py = kLsunLen * rng.u01();
        } while (px >= kLsunBar && py >= kLsunBar);
        ds.labels[next] = 0;
        ds.x(next, 0) = px;
        ds.x(next, 1) = py;
    }
    const double c1[2] = {kBlob1X, kBlob1Y};
    const double c2[2] = {kBlob2X, kBlob2Y};
    append_gaussian_blob(ds.x, ds.labels, next, 1, kBlobCount, c1, kBlob1Sigma, 2, rng);
    append_gaussian_blob(ds.x, ds.labels, next, 2, kBlobCount, c2, kBlob2Sigma, 2, rng);
    ds.x.require_finite("gen_lsun");
    return ds;
}

Dataset gen_by_name(const std::string& name, std::uint64_t seed) {
    if (name == "tetra") return gen_tetra(seed);
    if (name == "chainlink") return gen_chainlink(seed);
    if (name == "lsun") return gen_lsun(seed);
    throw std::invalid_argument("unknown dataset generator '" + name +
                                "' (expected tetra, chainlink, or lsun)");
}

// --- lifting -----------------------------------------------------------------

LiftKind lift_kind_from_string(const std::string& s) {
    if (s == "sigmoid_stack") return LiftKind::sigmoid_stack;
    if (s == "sigmoid_squared") return LiftKind::sigmoid_squared;
    if (s == "tan_sigmoid") return LiftKind::tan_sigmoid;
    throw std::invalid_argument("unknown lift kind '" + s +
                                "' (expected sigmoid_stack, sigmoid_squared, or tan_sigmoid)");
}

std::string to_string(LiftKind kind) {
    switch (kind) {
        case LiftKind::sigmoid_stack: return "sigmoid_stack";
        case LiftKind::sigmoid_squared: return "sigmoid_squared";
        case LiftKind::tan_sigmoid: return "tan_sigmoid";
    }
    throw std::logic_error("invalid LiftKind");
}

LiftingTransform make_lift(LiftKind kind, std::size_t d_low, SeededRng rng) {
    if (d_low != 2 && d_low != 3)
        throw std::invalid_argument("make_lift: d_low must be 2 or 3, got " + std::to_string(d_low));
    LiftingTransform t;
    t.kind = kind;
    t.w = DenseMatrix(10, d_low);
    for (double& v : t.w.values) v = rng.normal();
    t.u = DenseMatrix(100, 10);
    for (double& v : t.u.values) v = rng.normal();
    return t;
}

DenseMatrix lift(const DenseMatrix& h, const LiftingTransform& t) {
    if (h.cols != t.w.cols)
        throw std::invalid_argument("lift: input has " + std::to_string(h.cols) +
                                    " columns, transform expects " + std::to_string(t.w.cols));
    // s = sigmoid(W h) per row, as a row-block product with W^T.
    DenseMatrix s = kernels::matmul_nt(h, t.w);
    for (double& v : s.values) v = sigmoid(v);
    DenseMatrix out;
    switch (t.kind) {
        case LiftKind::sigmoid_stack: {
            out = kernels::matmul_nt(s, t.u);
            for (double& v : out.values) v = sigmoid(v);
            break;
        }
        case LiftKind::sigmoid_squared: {
            out = s;
            for (double& v : out.values) {
                const double g = sigmoid(v);
                v = g * g;
            }
            break;
        }
        case LiftKind::tan_sigmoid: {
            out = s;
            for (double& v : out.values) v = std::tan(v);
            break;
        }
    }
    out.require_finite("lift");
    return out;
}

DenseMatrix rescale_unit(const DenseMatrix& m, double divisor) {
    if (!(divisor > 0.0) || !std::isfinite(divisor))
        throw std::invalid_argument("rescale_unit: divisor must be positive and finite");
    DenseMatrix out = m;
    const double inv = 1.0 / divisor;
    for (double& v : out.values) v *= inv;
    return out;
}

// --- file formats ------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'S', 'C', 'E', '1'};

std::string path_stem(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    const std::size_t start = slash == std::string::npos ? 0 : slash + 1;
    const std::size_t dot = path.find_last_of('.');
    const std::size_t end = (dot == std::string::npos || dot <= start) ? path.size() : dot;
    return path.substr(start, end - start);
}

int derive_k_true(const std::vector<std::int32_t>& labels, const std::string& path) {
    std::int32_t max_label = -1;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0)
            throw std::runtime_error(path + ": negative label at row " + std::to_string(i));
        max_label = std::max(max_label, labels[i]);
    }
    return static_cast<int>(max_label + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_double(const std::string& field, std::size_t line_no, const std::string& col_name) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw std::runtime_error("line " + std::to_string(line_no) + ", column " + col_name +
                                 ": not a number: '" + field + "'");
    if (!std::isfinite(value))
        throw std::runtime_error("line " + std::to_string(line_no) + ", column " + col_name +
                                 ": non-finite value");
    return value;
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header = split_fields(line);
    bool has_labels = false;
    std::size_t d = header.size();
    if (!header.empty() && header.back() == "label") {
        has_labels = true;
        --d;
    }
    if (d == 0) throw std::runtime_error(path + ": header has no feature columns");
    for (std::size_t j = 0; j < d; ++j)
        if (header[j] != "x" + std::to_string(j))
            throw std::runtime_error(path + ": header column " + std::to_string(j) +
                                     " is '" + header[j] + "', expected 'x" + std::to_string(j) + "'");

    std::vector<double> data;
    std::vector<std::int32_t> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        const std::size_t expected = d + (has_labels ? 1 : 0);
        if (fields.size() != expected)
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(expected) + " fields, got " +
                                     std::to_string(fields.size()));
        for (std::size_t j = 0; j < d; ++j)
            data.push_back(parse_double(fields[j], line_no, "x" + std::to_string(j)));
        if (has_labels) {
            const std::string& f = fields[d];
            std::int32_t lab = 0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), lab);
            if (ec != std::errc() || ptr != f.data() + f.size())
                throw std::runtime_error("line " + std::to_string(line_no) +
                                         ", column label: not an integer: '" + f + "'");
            labels.push_back(lab);
        }
    }
    if (data.empty()) throw std::runtime_error(path + ": no data rows");

    Dataset ds;
    ds.name = path_stem(path);
    ds.x.rows = data.size() / d;
    ds.x.cols = d;
    ds.x.values = std::move(data);
    ds.labels = std::move(labels);
    if (has_labels) ds.k_true = derive_k_true(ds.labels, path);
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    std::ostringstream text;
    text.precision(17);
    for (std::size_t j = 0; j < ds.x.cols; ++j) {
        if (j) text << ',';
        text << 'x' << j;
    }
    if (ds.has_labels()) text << ",label";
    text << '\n';
    for (std::size_t i = 0; i < ds.x.rows; ++i) {
        for (std::size_t j = 0; j < ds.x.cols; ++j) {
            if (j) text << ',';
            text << ds.x(i, j);
        }
        if (ds.has_labels()) text << ',' << ds.labels[i];
        text << '\n';
    }
    out << text.str();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Dataset load_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error(path + ": bad magic, not a dataset file");
    std::uint64_t rows = 0, cols = 0;
    std::uint8_t has_labels = 0;
    in.read(reinterpret_cast<char*>(&rows), 8);
    in.read(reinterpret_cast<char*>(&cols), 8);
    in.read(reinterpret_cast<char*>(&has_labels), 1);
    if (!in) throw std::runtime_error(path + ": truncated header");
    if (rows == 0 || cols == 0 || rows * cols > (1ull << 33))
        throw std::runtime_error(path + ": implausible dimensions " + std::to_string(rows) +
                                 " x " + std::to_string(cols));
    if (has_labels > 1) throw std::runtime_error(path + ": bad has_labels flag");

    Dataset ds;
    ds.name = path_stem(path);
    ds.x = DenseMatrix(rows, cols);
    in.read(reinterpret_cast<char*>(ds.x.values.data()),
            static_cast<std::streamsize>(rows * cols * sizeof(double)));
    if (!in) throw std::runtime_error(path + ": truncated data block");
    if (has_labels) {
        ds.labels.resize(rows);
        in.read(reinterpret_cast<char*>(ds.labels.data()),
                static_cast<std::streamsize>(rows * sizeof(std::int32_t)));
        if (!in) throw std::runtime_error(path + ": truncated label block");
        ds.k_true = derive_k_true(ds.labels, path);
    }
    ds.x.require_finite(path);
    return ds;
}

void save_binary(const Dataset& ds, const std::string& path) {
    // Fixed little-endian layout; this implementation assumes a
    // little-endian host, which the build targets.
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    const std::uint64_t rows = ds.x.rows, cols = ds.x.cols;
    const std::uint8_t has_labels = ds.has_labels() ? 1 : 0;
    if (has_labels && ds.labels.size() != ds.x.rows)
        throw std::invalid_argument("save_binary: label count differs from row count");
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    out.write(reinterpret_cast<const char*>(&has_labels), 1);
    out.write(reinterpret_cast<const char*>(ds.x.values.data()),
              static_cast<std::streamsize>(rows * cols * sizeof(double)));
    if (has_labels)
        out.write(reinterpret_cast<const char*>(ds.labels.data()),
                  static_cast<std::streamsize>(rows * sizeof(std::int32_t)));
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Dataset load_dataset(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot open '" + path + "'");
    char magic[4] = {0, 0, 0, 0};
    probe.read(magic, 4);
    probe.close();
    if (std::memcmp(magic, kMagic, 4) == 0) return load_binary(path);
    return load_csv(path);
}

}  // namespace scedae
