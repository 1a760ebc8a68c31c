#include "wdst/lse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace wdst {

namespace {

constexpr int kLayers = 6;
constexpr int kFilters = 64;

LayerSpec lse_conv(int index, int in_ch, int out_ch) {
    LayerSpec l;
    l.kind = LayerKind::conv;
    l.tag = "conv" + std::to_string(index);
    l.in_channels = in_ch;
    l.out_channels = out_ch;
    l.weights.assign(static_cast<std::size_t>(out_ch) * in_ch * 9, 0.0);
    l.bias.assign(static_cast<std::size_t>(out_ch), 0.0);
    return l;
}

}  // namespace

LseNetwork make_lse_network() {
    LseNetwork net;
    net.convs.push_back(lse_conv(1, 1, kFilters));
    for (int i = 2; i <= kLayers - 1; ++i) net.convs.push_back(lse_conv(i, kFilters, kFilters));
    net.convs.push_back(lse_conv(kLayers, kFilters, 1));
    return net;
}

LseNetwork random_lse_network(std::uint64_t seed) {
    LseNetwork net = make_lse_network();
    std::mt19937_64 gen(seed);
    for (auto& layer : net.convs) {
        // He-style bound from the fan-in of a 3x3 kernel; biases stay zero.
        const double bound = std::sqrt(6.0 / (static_cast<double>(layer.in_channels) * 9.0));
        for (auto& v : layer.weights) {
            const double u = (gen() >> 11) * 0x1.0p-53;
            v = static_cast<double>(static_cast<float>((2.0 * u - 1.0) * bound));
        }
    }
    return net;
}

void validate_lse_network(const LseNetwork& net) {
    if (net.convs.size() != kLayers)
        throw ContractError("enhancement network needs exactly " + std::to_string(kLayers) +
                            " conv layers, got " + std::to_string(net.convs.size()));
    for (int i = 0; i < kLayers; ++i) {
        const auto& l = net.convs[static_cast<std::size_t>(i)];
        const int want_in = (i == 0) ? 1 : kFilters;
        const int want_out = (i == kLayers - 1) ? 1 : kFilters;
        if (l.kind != LayerKind::conv || l.in_channels != want_in || l.out_channels != want_out)
            throw ContractError("enhancement conv " + std::to_string(i + 1) +
                                " does not follow the 1-64-...-64-1 channel plan");
        if (l.weights.size() != static_cast<std::size_t>(want_in) * want_out * 9 ||
            l.bias.size() != static_cast<std::size_t>(want_out))
            throw ContractError("enhancement conv " + std::to_string(i + 1) +
                                " has mis-sized weights");
    }
}

void save_lse_weights(const LseNetwork& net, const std::string& path) {
    validate_lse_network(net);
    FeatureNetwork fn;
    fn.input_channels = 1;
    for (int i = 0; i < kLayers; ++i) {
        fn.layers.push_back(net.convs[static_cast<std::size_t>(i)]);
        if (i < kLayers - 1) {
            LayerSpec relu;
            relu.kind = LayerKind::relu;
            relu.tag = "relu" + std::to_string(i + 1);
            fn.layers.push_back(relu);
        }
    }
    save_weights(fn, path);
}

LseNetwork load_lse_weights(const std::string& path) {
    const FeatureNetwork fn = load_weights(path);
    LseNetwork net;
    for (std::size_t i = 0; i < fn.layers.size(); ++i) {
        const auto& l = fn.layers[i];
        const LayerKind want = (i % 2 == 0) ? LayerKind::conv : LayerKind::relu;
        if (l.kind != want)
            throw ConfigError("'" + path + "' is not a conv/relu enhancement network layout");
        if (l.kind == LayerKind::conv) net.convs.push_back(l);
    }
    if (fn.input_channels != 1 || net.convs.size() != kLayers ||
        fn.layers.size() != 2 * kLayers - 1)
        throw ConfigError("'" + path + "' does not hold a " + std::to_string(kLayers) +
                          "-layer enhancement network");
    validate_lse_network(net);
    return net;
}

namespace lse_detail {

namespace {

void check_stack(std::span<const LayerSpec> convs) {
    if (convs.empty()) throw ContractError("residual stack needs at least one conv layer");
    if (convs.front().in_channels != 1 || convs.back().out_channels != 1)
        throw ContractError("residual stack must map one channel to one channel");
    for (std::size_t i = 0; i + 1 < convs.size(); ++i)
        if (convs[i].out_channels != convs[i + 1].in_channels)
            throw ContractError("residual stack channel chain broken at conv " +
                                std::to_string(i + 2));
}

// Forward pass keeping the input of every conv (post-ReLU of its
// predecessor) and the final pre-residual output.
std::vector<Tensor3> stack_states(std::span<const LayerSpec> convs, const ImagePlane& in) {
    std::vector<Tensor3> states;
    states.reserve(convs.size() + 1);
    states.push_back(replicate_plane(in, 1));
    for (std::size_t i = 0; i < convs.size(); ++i) {
        Tensor3 z = detail::conv3x3_forward(convs[i], states.back());
        if (i + 1 < convs.size())
            for (auto& v : z.v) v = std::max(0.0, v);
        states.push_back(std::move(z));
    }
    return states;
}

}  // namespace

ImagePlane residual_forward(std::span<const LayerSpec> convs, const ImagePlane& in) {
    check_stack(convs);
    require_finite(in, "residual stack input");
    const Tensor3 z = stack_states(convs, in).back();
    ImagePlane out = in;
    for (std::size_t i = 0; i < out.size(); ++i) out.samples()[i] += z.v[i];
    return out;
}

StackGradients loss_gradients(std::span<const LayerSpec> convs, const ImagePlane& in,
                              const ImagePlane& gt, bool squared_error) {
    check_stack(convs);
    if (!in.same_shape(gt)) throw ContractError("training pair planes differ in size");

    const std::vector<Tensor3> states = stack_states(convs, in);
    const Tensor3& z_last = states.back();

    // loss-local gradient at the residual output (= at the last conv output,
    // since d(in + z)/dz is the identity)
    Tensor3 dz(1, in.height(), in.width());
    double sq = 0.0;
    for (std::size_t i = 0; i < dz.v.size(); ++i) {
        const double d = (in.samples()[i] + z_last.v[i]) - gt.samples()[i];
        dz.v[i] = d;
        sq += d * d;
    }
    if (squared_error) {
        for (auto& v : dz.v) v *= 2.0;
    } else {
        const double norm = std::sqrt(sq);
        if (norm > 0.0)
            for (auto& v : dz.v) v /= norm;
        else
            std::fill(dz.v.begin(), dz.v.end(), 0.0);
    }

    StackGradients g;
    g.weights.resize(convs.size());
    g.bias.resize(convs.size());
    for (std::size_t i = convs.size(); i-- > 0;) {
        // states[i] is the input of conv i; for i < last the stored z was
        // already rectified, so its zero entries mask the chain rule exactly.
        detail::conv3x3_backward_params(convs[i], states[i], dz, g.weights[i], g.bias[i]);
        if (i > 0) {
            Tensor3 da = detail::conv3x3_backward_input(convs[i], dz);
            const Tensor3& a = states[i];
            for (std::size_t k = 0; k < da.v.size(); ++k)
                if (a.v[k] <= 0.0) da.v[k] = 0.0;
            dz = std::move(da);
        }
    }
    return g;
}

}  // namespace lse_detail

ImagePlane lse_forward(const LseNetwork& net, const ImagePlane& ll) {
    validate_lse_network(net);
    return lse_detail::residual_forward(net.convs, ll);
}

double lse_loss(const ImagePlane& pred, const ImagePlane& gt) {
    if (!pred.same_shape(gt)) throw ContractError("prediction and ground truth differ in size");
    double sq = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = gt.samples()[i] - pred.samples()[i];
        sq += d * d;
    }
    return std::sqrt(sq);
}

namespace {

double pair_loss(const LseNetwork& net, const LsePair& pair, bool squared_error) {
    const ImagePlane pred = lse_detail::residual_forward(net.convs, pair.first);
    const double l = lse_loss(pred, pair.second);
    return squared_error ? l * l : l;
}

}  // namespace

TrainResult lse_train(const LseNetwork& net, const std::vector<LsePair>& dataset,
                      const TrainConfig& cfg) {
    validate_lse_network(net);
    if (dataset.empty()) throw ContractError("training dataset is empty");
    for (const auto& [in, gt] : dataset)
        if (!in.same_shape(gt)) throw ContractError("training pair planes differ in size");
    if (cfg.batch_size < 1 || cfg.epochs < 1 || !(cfg.learning_rate > 0.0) ||
        cfg.momentum < 0.0 || cfg.momentum >= 1.0)
        throw ConfigError("training hyperparameters out of range");

    TrainResult result;
    result.net = net;
    auto& convs = result.net.convs;

    double initial = 0.0;
    for (const auto& p : dataset) initial += pair_loss(result.net, p, cfg.squared_error);
    result.epoch_loss.push_back(initial / static_cast<double>(dataset.size()));

    // momentum buffers, one per weight/bias tensor
    std::vector<std::vector<double>> vel_w(convs.size()), vel_b(convs.size());
    for (std::size_t i = 0; i < convs.size(); ++i) {
        vel_w[i].assign(convs[i].weights.size(), 0.0);
        vel_b[i].assign(convs[i].bias.size(), 0.0);
    }

    std::mt19937_64 gen(cfg.seed);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        // Fisher-Yates with explicit draws so the order is identical on
        // every platform
        for (std::size_t i = order.size(); i-- > 1;)
            std::swap(order[i], order[gen() % (i + 1)]);

        double epoch_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const double inv_n = 1.0 / static_cast<double>(stop - start);

            lse_detail::StackGradients batch;
            batch.weights.resize(convs.size());
            batch.bias.resize(convs.size());
            for (std::size_t i = 0; i < convs.size(); ++i) {
                batch.weights[i].assign(convs[i].weights.size(), 0.0);
                batch.bias[i].assign(convs[i].bias.size(), 0.0);
            }
            for (std::size_t k = start; k < stop; ++k) {
                const LsePair& p = dataset[order[k]];
                epoch_sum += pair_loss(result.net, p, cfg.squared_error);
                const auto g =
                    lse_detail::loss_gradients(convs, p.first, p.second, cfg.squared_error);
                for (std::size_t i = 0; i < convs.size(); ++i) {
                    for (std::size_t j = 0; j < batch.weights[i].size(); ++j)
                        batch.weights[i][j] += g.weights[i][j];
                    for (std::size_t j = 0; j < batch.bias[i].size(); ++j)
                        batch.bias[i][j] += g.bias[i][j];
                }
            }
            for (std::size_t i = 0; i < convs.size(); ++i) {
                for (std::size_t j = 0; j < convs[i].weights.size(); ++j) {
                    vel_w[i][j] = cfg.momentum * vel_w[i][j] -
                                  cfg.learning_rate * batch.weights[i][j] * inv_n;
                    convs[i].weights[j] += vel_w[i][j];
                }
                for (std::size_t j = 0; j < convs[i].bias.size(); ++j) {
                    vel_b[i][j] = cfg.momentum * vel_b[i][j] -
                                  cfg.learning_rate * batch.bias[i][j] * inv_n;
                    convs[i].bias[j] += vel_b[i][j];
                }
            }
        }
        const double mean = epoch_sum / static_cast<double>(dataset.size());
        if (!std::isfinite(mean))
            throw Error("training diverged (non-finite loss) at epoch " + std::to_string(epoch));
        result.epoch_loss.push_back(mean);
    }
    return result;
}

void write_loss_history(const std::vector<double>& epoch_loss, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.precision(17);
    out << "epoch\tmean_loss\n";
    for (std::size_t i = 0; i < epoch_loss.size(); ++i) out << i << "\t" << epoch_loss[i] << "\n";
    if (!out) throw IoError("failed to write '" + path + "'");
}

}  // namespace wdst
