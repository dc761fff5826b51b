#include "scedae/autoencoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "scedae/kernels.hpp"

namespace scedae {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_model(const AutoencoderModel& model) {
    if (model.encoder.empty() || model.decoder.empty())
        throw std::invalid_argument("autoencoder: empty encoder or decoder");
    for (std::size_t i = 0; i + 1 < model.layer_count(); ++i)
        if (model.layer(i).w.cols != model.layer(i + 1).w.rows)
            throw std::invalid_argument("autoencoder: layer " + std::to_string(i) +
                                        " output width does not feed layer " + std::to_string(i + 1));
    if (model.decoder.back().w.cols != model.encoder.front().w.rows)
        throw std::invalid_argument("autoencoder: reconstruction width differs from input width");
    for (std::size_t i = 0; i < model.layer_count(); ++i)
        if (model.layer(i).b.size() != model.layer(i).w.cols)
            throw std::invalid_argument("autoencoder: bias width mismatch at layer " + std::to_string(i));
}

void check_input(const AutoencoderModel& model, const DenseMatrix& x, const char* who) {
    if (x.cols != model.input_dim())
        throw std::invalid_argument(std::string(who) + ": input has " + std::to_string(x.cols) +
                                    " columns, model expects " + std::to_string(model.input_dim()));
    if (x.rows == 0) throw std::invalid_argument(std::string(who) + ": empty batch");
}

// z = a W + b
DenseMatrix affine(const DenseMatrix& a, const DenseLayer& layer) {
    DenseMatrix z = kernels::matmul(a, layer.w);
    for (std::size_t i = 0; i < z.rows; ++i) {
        double* zi = z.row(i);
        for (std::size_t j = 0; j < z.cols; ++j) zi[j] += layer.b[j];
    }
    return z;
}

// Stable per-element binary cross-entropy from the pre-activation z of a
// sigmoid output: max(z,0) - x z + log(1 + exp(-|z|)).
double stable_bce_from_preact(const DenseMatrix& x, const DenseMatrix& preact) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        const double* zi = preact.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double z = zi[j];
            total += std::max(z, 0.0) - xi[j] * z + std::log1p(std::exp(-std::abs(z)));
        }
    }
    return total / static_cast<double>(x.rows);
}

}  // namespace

std::string LayerSpec::label() const {
    std::ostringstream out;
    for (std::size_t w : hidden) out << w << "--";
    out << encoding_dim;
    return out.str();
}

DenseLayer glorot_init(std::size_t fan_in, std::size_t fan_out, SeededRng& rng) {
    if (fan_in == 0 || fan_out == 0)
        throw std::invalid_argument("glorot_init: fan_in and fan_out must be positive");
    DenseLayer layer;
    layer.w = DenseMatrix(fan_in, fan_out);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : layer.w.values) v = rng.uniform(-limit, limit);
    layer.b.assign(fan_out, 0.0);
    return layer;
}

AutoencoderModel make_model(std::size_t input_dim, const LayerSpec& spec, SeededRng& rng) {
    if (input_dim == 0) throw std::invalid_argument("make_model: input_dim must be positive");
    if (spec.encoding_dim == 0) throw std::invalid_argument("make_model: encoding_dim must be positive");
    if (spec.hidden.empty()) throw std::invalid_argument("make_model: hidden widths must be non-empty");
    for (std::size_t w : spec.hidden)
        if (w == 0) throw std::invalid_argument("make_model: zero hidden width");

    std::vector<std::size_t> widths;
    widths.push_back(input_dim);
    widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
    widths.push_back(spec.encoding_dim);

    AutoencoderModel model;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i)
        model.encoder.push_back(glorot_init(widths[i], widths[i + 1], rng));
    for (std::size_t i = widths.size() - 1; i > 0; --i)
        model.decoder.push_back(glorot_init(widths[i], widths[i - 1], rng));
    return model;
}

ForwardPass forward(const AutoencoderModel& model, const DenseMatrix& x) {
    check_model(model);
    check_input(model, x, "forward");
    ForwardPass fp;
    fp.activations.reserve(model.layer_count() + 1);
    fp.activations.push_back(x);
    for (std::size_t i = 0; i < model.layer_count(); ++i) {
        DenseMatrix z = affine(fp.activations.back(), model.layer(i));
        if (i + 1 == model.layer_count()) {
            fp.output_preact = z;
            for (double& v : z.values) v = sigmoid(v);
        } else {
            for (double& v : z.values) v = std::max(v, 0.0);
        }
        fp.activations.push_back(std::move(z));
    }
    return fp;
}

DenseMatrix encode(const AutoencoderModel& model, const DenseMatrix& x) {
    check_model(model);
    check_input(model, x, "encode");
    DenseMatrix a = x;
    for (const DenseLayer& layer : model.encoder) {
        a = affine(a, layer);
        for (double& v : a.values) v = std::max(v, 0.0);
    }
    a.require_finite("encode");
    return a;
}

double bce_loss(const DenseMatrix& x, const DenseMatrix& x_hat) {
    if (x.rows != x_hat.rows || x.cols != x_hat.cols)
        throw std::invalid_argument("bce_loss: shape mismatch");
    if (x.rows == 0) throw std::invalid_argument("bce_loss: empty input");
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        const double* hi = x_hat.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double h = hi[j];
            if (!(h > 0.0 && h < 1.0))
                throw std::invalid_argument("bce_loss: reconstruction entry outside (0,1) at row " +
                                            std::to_string(i) + ", column " + std::to_string(j));
            total -= xi[j] * std::log(h) + (1.0 - xi[j]) * std::log(1.0 - h);
        }
    }
    return total / static_cast<double>(x.rows);
}

double reconstruction_bce(const AutoencoderModel& model, const DenseMatrix& x) {
    const ForwardPass fp = forward(model, x);
    return stable_bce_from_preact(x, fp.output_preact);
}

double reconstruction_sq_error(const AutoencoderModel& model, const DenseMatrix& x) {
    const ForwardPass fp = forward(model, x);
    const DenseMatrix& r = fp.reconstruction();
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        const double* ri = r.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double diff = xi[j] - ri[j];
            total += diff * diff;
        }
    }
    return total / static_cast<double>(x.rows);
}

BackwardResult backward(const AutoencoderModel& model, const DenseMatrix& x) {
    const ForwardPass fp = forward(model, x);
    BackwardResult out;
    out.loss = stable_bce_from_preact(x, fp.output_preact);

    const std::size_t layers = model.layer_count();
    out.grads.layers.resize(layers);

    // Output delta of the sigmoid + cross-entropy pair: (x_hat - x) / batch.
    const double inv_batch = 1.0 / static_cast<double>(x.rows);
    DenseMatrix delta = fp.reconstruction();
    for (std::size_t i = 0; i < delta.rows; ++i) {
        double* di = delta.row(i);
        const double* xi = x.row(i);
        for (std::size_t j = 0; j < delta.cols; ++j) di[j] = (di[j] - xi[j]) * inv_batch;
    }

    for (std::size_t li = layers; li-- > 0;) {
        const DenseMatrix& a_prev = fp.activations[li];
        DenseLayer& g = out.grads.layers[li];
        g.w = kernels::matmul_tn(a_prev, delta);
        g.b.assign(delta.cols, 0.0);
        for (std::size_t i = 0; i < delta.rows; ++i) {
            const double* di = delta.row(i);
            for (std::size_t j = 0; j < delta.cols; ++j) g.b[j] += di[j];
        }
        if (li == 0) break;
        // Pull the delta through the weights, then through the ReLU of the
        // previous layer (its post-activation is positive iff it passed).
        DenseMatrix prev_delta = kernels::matmul_nt(delta, model.layer(li).w);
        for (std::size_t i = 0; i < prev_delta.rows; ++i) {
            double* pi = prev_delta.row(i);
            const double* ai = a_prev.row(i);
            for (std::size_t j = 0; j < prev_delta.cols; ++j)
                if (ai[j] <= 0.0) pi[j] = 0.0;
        }
        delta = std::move(prev_delta);
    }
    return out;
}

AdamState make_adam_state(const AutoencoderModel& model) {
    AdamState st;
    st.m.resize(model.layer_count());
    st.v.resize(model.layer_count());
    for (std::size_t i = 0; i < model.layer_count(); ++i) {
        const DenseLayer& layer = model.layer(i);
        st.m[i].w = DenseMatrix(layer.w.rows, layer.w.cols, 0.0);
        st.m[i].b.assign(layer.b.size(), 0.0);
        st.v[i].w = DenseMatrix(layer.w.rows, layer.w.cols, 0.0);
        st.v[i].b.assign(layer.b.size(), 0.0);
    }
    return st;
}

void adam_step(AutoencoderModel& model, const Gradients& grads, AdamState& state,
               const TrainConfig& cfg) {
    if (grads.layers.size() != model.layer_count())
        throw std::invalid_argument("adam_step: gradient layer count mismatch");
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);

    auto update = [&](double* theta, double* m, double* v, const double* g, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            theta[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    };

    for (std::size_t li = 0; li < model.layer_count(); ++li) {
        DenseLayer& layer = model.layer(li);
        update(layer.w.values.data(), state.m[li].w.values.data(), state.v[li].w.values.data(),
               grads.layers[li].w.values.data(), layer.w.values.size());
        update(layer.b.data(), state.m[li].b.data(), state.v[li].b.data(),
               grads.layers[li].b.data(), layer.b.size());
    }
}

TrainResult train(const DenseMatrix& x, const LayerSpec& spec, const TrainConfig& cfg) {
    if (x.rows == 0 || x.cols == 0) throw std::invalid_argument("train: empty input");
    if (cfg.epochs == 0) throw std::invalid_argument("train: epochs must be positive");
    if (cfg.batch_size == 0) throw std::invalid_argument("train: batch_size must be positive");
    if (cfg.batch_size > x.rows)
        throw std::invalid_argument("train: batch_size " + std::to_string(cfg.batch_size) +
                                    " exceeds sample count " + std::to_string(x.rows));
    if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
        throw std::invalid_argument("train: learning_rate must be positive and finite");
    if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
        throw std::invalid_argument("train: beta1 and beta2 must lie in [0,1)");
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("train: epsilon must be positive");
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j)
            if (!(x(i, j) >= 0.0 && x(i, j) <= 1.0))
                throw std::invalid_argument("train: input entry outside [0,1] at row " +
                                            std::to_string(i) + ", column " + std::to_string(j));

    SeededRng rng(cfg.seed);
    TrainResult result;
    result.model = make_model(x.cols, spec, rng);
    AdamState adam = make_adam_state(result.model);

    std::vector<std::size_t> perm(x.rows);
    std::iota(perm.begin(), perm.end(), 0);

    DenseMatrix batch;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(perm);
        double epoch_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < x.rows; start += cfg.batch_size, ++batch_index) {
            const std::size_t count = std::min(cfg.batch_size, x.rows - start);
            batch = DenseMatrix(count, x.cols);
            for (std::size_t i = 0; i < count; ++i)
                std::memcpy(batch.row(i), x.row(perm[start + i]), x.cols * sizeof(double));
            BackwardResult br = backward(result.model, batch);
            if (!std::isfinite(br.loss))
                throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(batch_index));
            adam_step(result.model, br.grads, adam, cfg);
            epoch_sum += br.loss * static_cast<double>(count);
        }
        result.epoch_losses.push_back(epoch_sum / static_cast<double>(x.rows));
    }

    if (result.epoch_losses.back() > result.epoch_losses.front())
        throw std::runtime_error("training failed to reduce the loss (first epoch " +
                                 std::to_string(result.epoch_losses.front()) + ", last epoch " +
                                 std::to_string(result.epoch_losses.back()) + ")");
    result.final_sq_error = reconstruction_sq_error(result.model, x);
    return result;
}

// --- checkpoint I/O ----------------------------------------------------------

namespace {
constexpr char kModelMagic[4] = {'S', 'C', 'A', 'E'};

void write_layer(std::ofstream& out, const DenseLayer& layer) {
    const std::uint64_t fan_in = layer.w.rows, fan_out = layer.w.cols;
    out.write(reinterpret_cast<const char*>(&fan_in), 8);
    out.write(reinterpret_cast<const char*>(&fan_out), 8);
    out.write(reinterpret_cast<const char*>(layer.w.values.data()),
              static_cast<std::streamsize>(layer.w.values.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(layer.b.data()),
              static_cast<std::streamsize>(layer.b.size() * sizeof(double)));
}

DenseLayer read_layer(std::ifstream& in, const std::string& path) {
    std::uint64_t fan_in = 0, fan_out = 0;
    in.read(reinterpret_cast<char*>(&fan_in), 8);
    in.read(reinterpret_cast<char*>(&fan_out), 8);
    if (!in || fan_in == 0 || fan_out == 0 || fan_in * fan_out > (1ull << 32))
        throw std::runtime_error(path + ": bad layer header");
    DenseLayer layer;
    layer.w = DenseMatrix(fan_in, fan_out);
    layer.b.assign(fan_out, 0.0);
    in.read(reinterpret_cast<char*>(layer.w.values.data()),
            static_cast<std::streamsize>(layer.w.values.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(layer.b.data()),
            static_cast<std::streamsize>(layer.b.size() * sizeof(double)));
    if (!in) throw std::runtime_error(path + ": truncated layer data");
    return layer;
}
}  // namespace

void save_model(const AutoencoderModel& model, const std::string& path) {
    check_model(model);
    if (model.encoder.size() != model.decoder.size())
        throw std::invalid_argument("save_model: encoder and decoder layer counts differ");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    // The decoder mirrors the encoder, so a single total layer count suffices:
    // the first half is the encoder.
    const std::uint64_t layers = model.layer_count();
    out.write(kModelMagic, 4);
    out.write(reinterpret_cast<const char*>(&layers), 8);
    for (const DenseLayer& layer : model.encoder) write_layer(out, layer);
    for (const DenseLayer& layer : model.decoder) write_layer(out, layer);
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

AutoencoderModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
        throw std::runtime_error(path + ": bad magic, not a model checkpoint");
    std::uint64_t layers = 0;
    in.read(reinterpret_cast<char*>(&layers), 8);
    if (!in || layers < 2 || layers % 2 != 0 || layers > 128)
        throw std::runtime_error(path + ": implausible layer count");
    AutoencoderModel model;
    for (std::uint64_t i = 0; i < layers / 2; ++i) model.encoder.push_back(read_layer(in, path));
    for (std::uint64_t i = 0; i < layers / 2; ++i) model.decoder.push_back(read_layer(in, path));
    check_model(model);
    for (std::size_t i = 0; i < model.layer_count(); ++i) {
        model.layer(i).w.require_finite(path + ": layer " + std::to_string(i) + " weights");
        for (double b : model.layer(i).b)
            if (!std::isfinite(b))
                throw std::runtime_error(path + ": non-finite bias in layer " + std::to_string(i));
    }
    return model;
}

}  // namespace scedae
