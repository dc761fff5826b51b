#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scedae/matrix.hpp"
#include "scedae/rng.hpp"

namespace scedae {

/// Hidden-layer widths of the encoder (the decoder mirrors them) plus the
/// bottleneck width.
struct LayerSpec {
    std::vector<std::size_t> hidden;
    std::size_t encoding_dim = 10;

    /// Compact id like "500--750--1000".
    std::string label() const;
};

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
    std::uint64_t seed = 0;
};

/// Affine layer y = x W + b with W stored fan_in x fan_out.
struct DenseLayer {
    DenseMatrix w;
    std::vector<double> b;
};

/// Fully connected autoencoder. Every layer applies ReLU except the final
/// decoder layer, which applies a sigmoid so reconstructions live in (0, 1).
struct AutoencoderModel {
    std::vector<DenseLayer> encoder;  // input -> hidden... -> encoding
    std::vector<DenseLayer> decoder;  // encoding -> reversed hidden... -> input

    std::size_t input_dim() const { return encoder.front().w.rows; }
    std::size_t encoding_dim() const { return encoder.back().w.cols; }
    std::size_t layer_count() const { return encoder.size() + decoder.size(); }

    DenseLayer& layer(std::size_t i) {
        return i < encoder.size() ? encoder[i] : decoder[i - encoder.size()];
    }
    const DenseLayer& layer(std::size_t i) const {
        return i < encoder.size() ? encoder[i] : decoder[i - encoder.size()];
    }
};

/// Glorot-uniform layer: weights uniform within plus/minus
/// sqrt(6 / (fan_in + fan_out)), biases zero.
DenseLayer glorot_init(std::size_t fan_in, std::size_t fan_out, SeededRng& rng);

/// Mirrored-architecture model with every layer Glorot-initialized.
AutoencoderModel make_model(std::size_t input_dim, const LayerSpec& spec, SeededRng& rng);

struct ForwardPass {
    std::vector<DenseMatrix> activations;  // [0] input, [i+1] output of layer i
    DenseMatrix output_preact;             // final layer input to the sigmoid

    const DenseMatrix& reconstruction() const { return activations.back(); }
};

ForwardPass forward(const AutoencoderModel& model, const DenseMatrix& x);

/// Encoder half only.
DenseMatrix encode(const AutoencoderModel& model, const DenseMatrix& x);

/// Binary cross-entropy, summed over features and averaged over samples.
/// Requires every reconstruction entry strictly inside (0, 1).
double bce_loss(const DenseMatrix& x, const DenseMatrix& x_hat);

/// Same loss evaluated from pre-activations (numerically stable; used by
/// training and gradient checks).
double reconstruction_bce(const AutoencoderModel& model, const DenseMatrix& x);

/// Mean squared reconstruction error per sample; reported as a diagnostic.
double reconstruction_sq_error(const AutoencoderModel& model, const DenseMatrix& x);

/// Loss gradients with the same shapes as the model parameters, indexed like
/// AutoencoderModel::layer.
struct Gradients {
    std::vector<DenseLayer> layers;
};

struct BackwardResult {
    Gradients grads;
    double loss = 0.0;
};

/// Forward plus reverse-mode gradients of reconstruction_bce at x.
BackwardResult backward(const AutoencoderModel& model, const DenseMatrix& x);

struct AdamState {
    std::vector<DenseLayer> m;  // first moments
    std::vector<DenseLayer> v;  // second moments
    std::size_t step = 0;
};

AdamState make_adam_state(const AutoencoderModel& model);

/// One Adam update with bias correction; epsilon is added after the square
/// root of the corrected second moment.
void adam_step(AutoencoderModel& model, const Gradients& grads, AdamState& state,
               const TrainConfig& cfg);

struct TrainResult {
    AutoencoderModel model;
    std::vector<double> epoch_losses;  // mean per-sample loss per epoch
    double final_sq_error = 0.0;
};

/// Mini-batch training with a fresh Fisher-Yates shuffle every epoch. Input
/// entries must lie in [0, 1]. Throws if the loss goes non-finite or fails
/// to decrease from the first to the last epoch.
TrainResult train(const DenseMatrix& x, const LayerSpec& spec, const TrainConfig& cfg);

/// Checkpoint I/O, magic "SCAE".
void save_model(const AutoencoderModel& model, const std::string& path);
AutoencoderModel load_model(const std::string& path);

/// One trained encoding per ensemble member, with how it was produced.
struct EncodingProvenance {
    LayerSpec spec;
    TrainConfig cfg;
    bool trained = true;  // false for raw-data members that skip training
};

struct EncodingSet {
    std::vector<DenseMatrix> encodings;
    std::vector<EncodingProvenance> provenance;

    std::size_t size() const { return encodings.size(); }
};

}  // namespace scedae
