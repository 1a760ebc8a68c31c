#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wdst/features.hpp"
#include "wdst/image.hpp"

namespace wdst {

/// Low-frequency sub-band enhancement network: six 3x3 conv layers
/// (1 -> 64 -> ... -> 64 -> 1 channels) with ReLU after each of the first
/// five, applied as a residual: output = input + stack(input).
struct LseNetwork {
    std::vector<LayerSpec> convs;  // exactly 6
};

/// Zero-weight network (the identity map in residual form).
LseNetwork make_lse_network();

/// He-style scaled uniform init, deterministic per seed.
LseNetwork random_lse_network(std::uint64_t seed);

void validate_lse_network(const LseNetwork& net);

/// Same binary format as FeatureNetwork files (conv/relu kind bytes).
void save_lse_weights(const LseNetwork& net, const std::string& path);
LseNetwork load_lse_weights(const std::string& path);

ImagePlane lse_forward(const LseNetwork& net, const ImagePlane& ll);

/// Euclidean norm of (gt - pred) for one image pair; batches sum these.
double lse_loss(const ImagePlane& pred, const ImagePlane& gt);

struct TrainConfig {
    int batch_size = 64;
    double learning_rate = 0.01;
    double momentum = 0.9;
    int epochs = 10;
    std::uint64_t seed = 0;
    bool squared_error = false;  // optional variant of the training objective
};

struct TrainResult {
    LseNetwork net;
    /// epoch_loss[0] is the dataset mean loss before training; entry k > 0
    /// is the mean per-pair loss observed while epoch k ran (each pair
    /// contributes once, under the weights of its batch step).
    std::vector<double> epoch_loss;
};

using LsePair = std::pair<ImagePlane, ImagePlane>;  // (input, ground truth)

/// Mini-batch SGD with momentum over seeded shuffled batches. Deterministic
/// for a fixed seed. Throws on an empty dataset or when the loss turns NaN.
TrainResult lse_train(const LseNetwork& net, const std::vector<LsePair>& dataset,
                      const TrainConfig& cfg);

void write_loss_history(const std::vector<double>& epoch_loss, const std::string& path);

// Residual conv-stack primitives over an arbitrary layer count; the trainer
// and the gradient tests run on these.
namespace lse_detail {

/// input + stack(input) with ReLU between convs (none after the last).
ImagePlane residual_forward(std::span<const LayerSpec> convs, const ImagePlane& in);

struct StackGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;
};

/// Gradients of the per-pair loss (Euclidean or squared) with respect to
/// every conv weight and bias.
StackGradients loss_gradients(std::span<const LayerSpec> convs, const ImagePlane& in,
                              const ImagePlane& gt, bool squared_error);

}  // namespace lse_detail

}  // namespace wdst
