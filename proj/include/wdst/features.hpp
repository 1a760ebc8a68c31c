#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wdst/tensor.hpp"

namespace wdst {

enum class LayerKind : std::uint8_t { conv = 0, relu = 1, pool = 2 };
enum class PoolMode : std::uint8_t { average = 0, max = 1 };

/// One layer of a feature network. Convolutions are 3x3, stride 1, zero
/// padding 1; pools are 2x2 windows with stride 2 (odd tails dropped).
struct LayerSpec {
    LayerKind kind = LayerKind::conv;
    std::string tag;  // optional name ("relu1_1", "conv2_2", ...); unique if set

    // conv only
    int in_channels = 0;
    int out_channels = 0;
    std::vector<double> weights;  // out * in * 3 * 3, out-channel-major
    std::vector<double> bias;     // out

    // pool only
    PoolMode pool_mode = PoolMode::average;
};

/// Ordered conv/relu/pool stack with forward activation capture and analytic
/// backpropagation to the input.
struct FeatureNetwork {
    int input_channels = 3;
    std::vector<LayerSpec> layers;
};

/// Activations keyed by layer tag; N_l is the tensor's channel count and
/// M_l its height*width.
using FeatureMaps = std::map<std::string, Tensor3>;

/// Throws ContractError if channel counts do not chain layer to layer or a
/// non-empty tag repeats.
void validate_network(const FeatureNetwork& net);

std::vector<std::string> available_tags(const FeatureNetwork& net);

/// Binary weight file (magic "WDSTNET1"), bit-exact round trip.
FeatureNetwork load_weights(const std::string& path);
void save_weights(const FeatureNetwork& net, const std::string& path);

/// Reduced VGG-style network (tags conv1_1 .. relu5_1, two pools) with
/// weights drawn from a seeded uniform distribution in [-scale, scale].
/// Identical seed gives an identical network on every platform.
FeatureNetwork random_network(std::uint64_t seed, double scale,
                              PoolMode pool_mode = PoolMode::average);

/// The 16-conv VGG-19 feature layout (conv1_1 .. relu5_4, five pools) with
/// zero weights, as a shell for converted pretrained weights.
FeatureNetwork vgg19_architecture(PoolMode pool_mode = PoolMode::average);

/// Runs the stack on `input` and returns the activations at each requested
/// tag. Unknown tags raise ContractError listing the available ones.
FeatureMaps forward(const FeatureNetwork& net, const Tensor3& input,
                    const std::vector<std::string>& tags);

/// Reverse-mode accumulation: returns d/d(input) of
/// sum over tags of <grads_at_tags[tag], activation[tag]>.
Tensor3 backward(const FeatureNetwork& net, const Tensor3& input,
                 const FeatureMaps& grads_at_tags);

namespace detail {

/// 3x3 stride-1 pad-1 convolution forward/backward primitives shared with
/// the LSE trainer.
Tensor3 conv3x3_forward(const LayerSpec& layer, const Tensor3& in);
Tensor3 conv3x3_backward_input(const LayerSpec& layer, const Tensor3& dout);
void conv3x3_backward_params(const LayerSpec& layer, const Tensor3& in, const Tensor3& dout,
                             std::vector<double>& dweights, std::vector<double>& dbias);

}  // namespace detail

}  // namespace wdst
