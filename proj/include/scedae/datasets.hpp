#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scedae/matrix.hpp"
#include "scedae/rng.hpp"

namespace scedae {

/// A point cloud with optional integer ground-truth labels in [0, k_true).
struct Dataset {
    std::string name;
    DenseMatrix x;
    std::vector<std::int32_t> labels;  // empty when unlabeled
    int k_true = 0;                    // 0 when unknown

    bool has_labels() const { return !labels.empty(); }
};

// --- synthetic generators --------------------------------------------------
// Statistical stand-ins for three classic low-dimensional benchmark shapes.
// Same seed, same bytes; distinct seeds give fresh draws of the same family.

/// Four Gaussian blobs at the corners of a regular tetrahedron; n=400, d=3, k=4.
Dataset gen_tetra(std::uint64_t seed);

/// Two interlocking noisy circles that no hyperplane separates; n=1000, d=3, k=2.
Dataset gen_chainlink(std::uint64_t seed);

/// An L-shaped uniform cluster plus two Gaussian blobs of different spread;
/// n=400, d=2, k=3.
Dataset gen_lsun(std::uint64_t seed);

/// Dispatch by name ("tetra" | "chainlink" | "lsun").
Dataset gen_by_name(const std::string& name, std::uint64_t seed);

// --- lifting to R^100 -------------------------------------------------------
// Low-dimensional generator output h is pushed through a fixed random
// two-layer map into 100 dimensions so the clustering pipeline sees data of
// realistic width. sigmoid_stack is x = sigmoid(U sigmoid(W h)); the two
// variants square or tan-transform the 10-dimensional inner image instead of
// applying the second layer.

enum class LiftKind { sigmoid_stack, sigmoid_squared, tan_sigmoid };

LiftKind lift_kind_from_string(const std::string& s);
std::string to_string(LiftKind kind);

struct LiftingTransform {
    LiftKind kind = LiftKind::sigmoid_stack;
    DenseMatrix w;  // 10 x d_low
    DenseMatrix u;  // 100 x 10, used by sigmoid_stack only
};

/// Draws W and U with independent standard normal entries; d_low must be 2
/// or 3 (the generator dimensions).
LiftingTransform make_lift(LiftKind kind, std::size_t d_low, SeededRng rng);

/// Applies the transform row-wise; output has 100 (sigmoid_stack) or 10 columns.
DenseMatrix lift(const DenseMatrix& h, const LiftingTransform& t);

// --- preprocessing ----------------------------------------------------------

/// Divides every entry by `divisor` (e.g. 255 for 8-bit pixel data).
DenseMatrix rescale_unit(const DenseMatrix& m, double divisor);

// --- file formats -----------------------------------------------------------
// CSV: header "x0,...,x{d-1}[,label]", one row per sample, '.' decimal point.
// Binary: magic "SCE1", u64 rows, u64 cols, u8 has_labels, row-major f64
// little-endian data, then i32 little-endian labels when present.

Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);
Dataset load_binary(const std::string& path);
void save_binary(const Dataset& ds, const std::string& path);

/// Picks the loader from the file contents (binary magic) with CSV fallback.
Dataset load_dataset(const std::string& path);

}  // namespace scedae
