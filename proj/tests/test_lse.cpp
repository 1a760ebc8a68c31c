// Tests for the low-frequency enhancement network: residual identity at zero
// init, a naive direct-convolution oracle for the forward pass, parameter
// gradients against finite differences on a reduced stack, and the trainer's
// bookkeeping, determinism and failure modes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "wdst/errors.hpp"
#include "wdst/lse.hpp"

using namespace wdst;

namespace {

ImagePlane random_plane(int w, int h, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    ImagePlane p(w, h);
    for (auto& v : p.samples()) v = dist(gen);
    return p;
}

// independent zero-padded 3x3 convolution over channel-major data
std::vector<std::vector<double>> naive_conv(const LayerSpec& l,
                                            const std::vector<std::vector<double>>& in, int h,
                                            int w) {
    std::vector<std::vector<double>> out(l.out_channels,
                                         std::vector<double>(static_cast<std::size_t>(h) * w));
    for (int oc = 0; oc < l.out_channels; ++oc)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = l.bias[oc];
                for (int ic = 0; ic < l.in_channels; ++ic)
                    for (int ky = -1; ky <= 1; ++ky)
                        for (int kx = -1; kx <= 1; ++kx) {
                            const int yy = y + ky, xx = x + kx;
                            if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                            const double tap =
                                l.weights[((static_cast<std::size_t>(oc) * l.in_channels + ic) * 3 +
                                           (ky + 1)) *
                                              3 +
                                          (kx + 1)];
                            acc += tap * in[ic][static_cast<std::size_t>(yy) * w + xx];
                        }
                out[oc][static_cast<std::size_t>(y) * w + x] = acc;
            }
    return out;
}

ImagePlane naive_lse_forward(const LseNetwork& net, const ImagePlane& in) {
    const int h = in.height(), w = in.width();
    std::vector<std::vector<double>> act = {
        std::vector<double>(in.samples().begin(), in.samples().end())};
    for (std::size_t i = 0; i < net.convs.size(); ++i) {
        act = naive_conv(net.convs[i], act, h, w);
        if (i + 1 < net.convs.size())
            for (auto& ch : act)
                for (auto& v : ch) v = std::max(0.0, v);
    }
    ImagePlane out = in;
    for (std::size_t i = 0; i < out.size(); ++i) out.samples()[i] += act[0][i];
    return out;
}

LayerSpec small_conv(int in_ch, int out_ch, std::uint64_t seed) {
    LayerSpec l;
    l.kind = LayerKind::conv;
    l.in_channels = in_ch;
    l.out_channels = out_ch;
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-0.3, 0.3);
    l.weights.resize(static_cast<std::size_t>(out_ch) * in_ch * 9);
    l.bias.resize(static_cast<std::size_t>(out_ch));
    for (auto& v : l.weights) v = dist(gen);
    for (auto& v : l.bias) v = dist(gen);
    return l;
}

double stack_loss(std::span<const LayerSpec> convs, const ImagePlane& in, const ImagePlane& gt,
                  bool squared) {
    const double l = lse_loss(lse_detail::residual_forward(convs, in), gt);
    return squared ? l * l : l;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("zero-initialized network is exactly the identity") {
    const LseNetwork net = make_lse_network();
    const ImagePlane x = random_plane(9, 7, 3, -2.0, 2.0);
    const ImagePlane y = lse_forward(net, x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.samples()[i] == x.samples()[i]);
}

TEST_CASE("zero input through a zero-bias network stays zero") {
    const LseNetwork net = random_lse_network(11);  // random weights, zero biases
    const ImagePlane zero(8, 6, 0.0);
    const ImagePlane y = lse_forward(net, zero);
    for (double v : y.samples()) CHECK(v == 0.0);
}

TEST_CASE("forward pass matches a naive direct convolution oracle") {
    const LseNetwork net = random_lse_network(21);
    const ImagePlane x = random_plane(7, 9, 22, 0.0, 1.0);
    const ImagePlane fast = lse_forward(net, x);
    const ImagePlane slow = naive_lse_forward(net, x);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(fast.samples()[i] == doctest::Approx(slow.samples()[i]).epsilon(1e-10));
}

TEST_CASE("pair loss is the euclidean norm of the difference") {
    ImagePlane a(2, 1), b(2, 1);
    a.samples() = {3.0, 0.0};
    b.samples() = {0.0, 4.0};
    CHECK(lse_loss(a, b) == 5.0);  // 3-4-5 triangle, exact in doubles
    CHECK(lse_loss(b, a) == 5.0);
    CHECK(lse_loss(a, a) == 0.0);

    ImagePlane c(3, 1, 0.0);
    CHECK_THROWS_AS(lse_loss(a, c), ContractError);
}

TEST_CASE("parameter gradients match finite differences on a reduced stack") {
    std::vector<LayerSpec> convs = {small_conv(1, 4, 31), small_conv(4, 1, 32)};
    const ImagePlane in = random_plane(6, 6, 33, 0.1, 0.9);
    const ImagePlane gt = random_plane(6, 6, 34, 0.1, 0.9);

    for (const bool squared : {false, true}) {
        CAPTURE(squared);
        const lse_detail::StackGradients g =
            lse_detail::loss_gradients(convs, in, gt, squared);
        const double h = 1e-6;

        for (std::size_t li = 0; li < convs.size(); ++li) {
            for (std::size_t j = 0; j < convs[li].weights.size(); ++j) {
                const double saved = convs[li].weights[j];
                convs[li].weights[j] = saved + h;
                const double fp = stack_loss(convs, in, gt, squared);
                convs[li].weights[j] = saved - h;
                const double fm = stack_loss(convs, in, gt, squared);
                convs[li].weights[j] = saved;
                const double fd = (fp - fm) / (2.0 * h);
                const double an = g.weights[li][j];
                const double rel =
                    std::abs(fd - an) / std::max(std::abs(fd) + std::abs(an), 1e-8);
                CHECK(rel < 1e-4);
            }
            for (std::size_t j = 0; j < convs[li].bias.size(); ++j) {
                const double saved = convs[li].bias[j];
                convs[li].bias[j] = saved + h;
                const double fp = stack_loss(convs, in, gt, squared);
                convs[li].bias[j] = saved - h;
                const double fm = stack_loss(convs, in, gt, squared);
                convs[li].bias[j] = saved;
                const double fd = (fp - fm) / (2.0 * h);
                const double an = g.bias[li][j];
                const double rel =
                    std::abs(fd - an) / std::max(std::abs(fd) + std::abs(an), 1e-8);
                CHECK(rel < 1e-4);
            }
        }
    }
}

TEST_CASE("training on an already-solved task records all-zero losses") {
    // identity pairs with the zero-init (identity) network: the loss and all
    // gradients are exactly zero, so nothing may move
    std::vector<LsePair> data;
    for (int i = 0; i < 10; ++i) {
        const ImagePlane p = random_plane(8, 8, 100 + static_cast<std::uint64_t>(i));
        data.emplace_back(p, p);
    }
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    const TrainResult r = lse_train(make_lse_network(), data, cfg);
    REQUIRE(r.epoch_loss.size() == 3);  // initial evaluation + one entry per epoch
    for (double l : r.epoch_loss) CHECK(l == 0.0);
    // the network must still be the identity
    const ImagePlane x = random_plane(8, 8, 200);
    const ImagePlane y = lse_forward(r.net, x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.samples()[i] == x.samples()[i]);
}

TEST_CASE("training reduces the loss on a small smoothing-removal task") {
    // inputs are 3x3 box-averaged (periodic) copies of the targets; a gentle
    // learning rate keeps this reduced job stable
    std::mt19937_64 gen(55);
    std::vector<LsePair> data;
    for (int i = 0; i < 48; ++i) {
        const ImagePlane gt = random_plane(12, 12, gen(), 0.2, 0.8);
        ImagePlane in(12, 12);
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < 12; ++x) {
                double acc = 0.0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        acc += gt.at((y + dy + 12) % 12, (x + dx + 12) % 12);
                in.at(y, x) = acc / 9.0;
            }
        data.emplace_back(std::move(in), gt);
    }
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    cfg.learning_rate = 0.002;
    cfg.seed = 9;
    const TrainResult r = lse_train(random_lse_network(9), data, cfg);
    REQUIRE(r.epoch_loss.size() == 4);
    CHECK(r.epoch_loss.back() < r.epoch_loss.front());
    for (double l : r.epoch_loss) CHECK(std::isfinite(l));
}

TEST_CASE("a hopeless learning rate raises an error that names the epoch") {
    // the squared-error objective has no gradient normalization, so a huge
    // step size drives the residual into overflow within a few batches
    std::vector<LsePair> data;
    for (int i = 0; i < 8; ++i)
        data.emplace_back(random_plane(8, 8, 300 + static_cast<std::uint64_t>(i)),
                          random_plane(8, 8, 400 + static_cast<std::uint64_t>(i)));
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.batch_size = 4;
    cfg.learning_rate = 1e6;
    cfg.squared_error = true;
    try {
        lse_train(random_lse_network(1), data, cfg);
        FAIL("expected the trainer to report divergence");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("diverged") != std::string::npos);
        CHECK(msg.find("epoch") != std::string::npos);
    }
}

TEST_CASE("training is bitwise deterministic for a fixed seed") {
    std::vector<LsePair> data;
    for (int i = 0; i < 20; ++i)
        data.emplace_back(random_plane(8, 8, 500 + static_cast<std::uint64_t>(i)),
                          random_plane(8, 8, 600 + static_cast<std::uint64_t>(i)));
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.001;
    cfg.seed = 77;

    const TrainResult a = lse_train(random_lse_network(77), data, cfg);
    const TrainResult b = lse_train(random_lse_network(77), data, cfg);
    CHECK(a.epoch_loss == b.epoch_loss);
    for (std::size_t i = 0; i < a.net.convs.size(); ++i) {
        CHECK(a.net.convs[i].weights == b.net.convs[i].weights);
        CHECK(a.net.convs[i].bias == b.net.convs[i].bias);
    }

    // a different shuffle seed must lead somewhere else
    TrainConfig other = cfg;
    other.seed = 78;
    const TrainResult c = lse_train(random_lse_network(77), data, other);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.net.convs.size() && !any_diff; ++i)
        any_diff = a.net.convs[i].weights != c.net.convs[i].weights;
    CHECK(any_diff);
}

TEST_CASE("weights survive a save/load round trip bit for bit") {
    const LseNetwork net = random_lse_network(5);
    const std::string path = temp_path("lse_roundtrip.bin");
    save_lse_weights(net, path);
    const LseNetwork back = load_lse_weights(path);
    REQUIRE(back.convs.size() == net.convs.size());
    for (std::size_t i = 0; i < net.convs.size(); ++i) {
        CHECK(back.convs[i].weights == net.convs[i].weights);
        CHECK(back.convs[i].bias == net.convs[i].bias);
        CHECK(back.convs[i].in_channels == net.convs[i].in_channels);
        CHECK(back.convs[i].out_channels == net.convs[i].out_channels);
    }
    std::filesystem::remove(path);
}

TEST_CASE("files with a different layout are rejected as enhancement networks") {
    // a feature network with pools is not a conv/relu-only enhancement stack
    const std::string path = temp_path("lse_wrong_layout.bin");
    save_weights(random_network(1, 0.05), path);
    CHECK_THROWS_AS(load_lse_weights(path), ConfigError);
    std::filesystem::remove(path);

    // right alternation but wrong depth
    FeatureNetwork shallow;
    shallow.input_channels = 1;
    LayerSpec c1 = small_conv(1, 4, 40);
    LayerSpec r1;
    r1.kind = LayerKind::relu;
    LayerSpec c2 = small_conv(4, 1, 41);
    shallow.layers = {c1, r1, c2};
    save_weights(shallow, path);
    CHECK_THROWS_AS(load_lse_weights(path), ConfigError);
    std::filesystem::remove(path);
}

TEST_CASE("structural validation rejects malformed networks") {
    LseNetwork missing = make_lse_network();
    missing.convs.pop_back();
    CHECK_THROWS_AS(validate_lse_network(missing), ContractError);

    LseNetwork wrong = make_lse_network();
    wrong.convs[2].out_channels = 32;
    CHECK_THROWS_AS(validate_lse_network(wrong), ContractError);

    CHECK_THROWS_AS(lse_forward(missing, ImagePlane(4, 4, 0.0)), ContractError);
}

TEST_CASE("trainer contract checks") {
    const LseNetwork net = make_lse_network();
    CHECK_THROWS_AS(lse_train(net, {}, TrainConfig{}), ContractError);

    std::vector<LsePair> mismatched;
    mismatched.emplace_back(ImagePlane(4, 4, 0.0), ImagePlane(4, 5, 0.0));
    CHECK_THROWS_AS(lse_train(net, mismatched, TrainConfig{}), ContractError);

    std::vector<LsePair> ok;
    ok.emplace_back(ImagePlane(4, 4, 0.0), ImagePlane(4, 4, 0.0));
    TrainConfig bad;
    bad.batch_size = 0;
    CHECK_THROWS_AS(lse_train(net, ok, bad), ConfigError);
    bad = TrainConfig{};
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(lse_train(net, ok, bad), ConfigError);
    bad = TrainConfig{};
    bad.momentum = 1.0;
    CHECK_THROWS_AS(lse_train(net, ok, bad), ConfigError);
    bad = TrainConfig{};
    bad.epochs = 0;
    CHECK_THROWS_AS(lse_train(net, ok, bad), ConfigError);
}

TEST_CASE("loss history file holds one row per epoch entry") {
    const std::vector<double> losses = {2.5, 1.25, 0.8};
    const std::string path = temp_path("lse_history.txt");
    write_loss_history(losses, path);

    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "epoch\tmean_loss");
    int epoch = -1;
    double value = 0.0;
    int rows = 0;
    while (in >> epoch >> value) {
        CHECK(epoch == rows);
        CHECK(value == doctest::Approx(losses[static_cast<std::size_t>(rows)]).epsilon(1e-15));
        ++rows;
    }
    CHECK(rows == 3);
    std::filesystem::remove(path);
}
