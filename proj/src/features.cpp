#include "wdst/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace wdst {

Tensor3 replicate_plane(const ImagePlane& plane, int channels) {
    if (channels <= 0) throw ContractError("channel count must be positive");
    Tensor3 t(channels, plane.height(), plane.width());
    for (int c = 0; c < channels; ++c)
        std::copy(plane.samples().begin(), plane.samples().end(),
                  t.v.begin() + static_cast<std::size_t>(c) * plane.size());
    return t;
}

ImagePlane sum_channels(const Tensor3& t) {
    ImagePlane out(t.width, t.height, 0.0);
    for (int c = 0; c < t.channels; ++c)
        for (int y = 0; y < t.height; ++y)
            for (int x = 0; x < t.width; ++x) out.at(y, x) += t.at(c, y, x);
    return out;
}

namespace {

std::size_t conv_weight_count(const LayerSpec& l) {
    return static_cast<std::size_t>(l.out_channels) * l.in_channels * 9;
}

}  // namespace

void validate_network(const FeatureNetwork& net) {
    if (net.input_channels <= 0) throw ContractError("network input_channels must be positive");
    std::set<std::string> seen;
    int channels = net.input_channels;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& l = net.layers[i];
        if (!l.tag.empty() && !seen.insert(l.tag).second)
            throw ContractError("duplicate layer tag '" + l.tag + "'");
        if (l.kind == LayerKind::conv) {
            if (l.in_channels <= 0 || l.out_channels <= 0)
                throw ContractError("conv layer " + std::to_string(i) +
                                    " has non-positive channel counts");
            if (l.in_channels != channels)
                throw ContractError("conv layer " + std::to_string(i) + " expects " +
                                    std::to_string(l.in_channels) + " input channels but gets " +
                                    std::to_string(channels));
            if (l.weights.size() != conv_weight_count(l))
                throw ContractError("conv layer " + std::to_string(i) +
                                    " weight tensor is not out x in x 3 x 3");
            if (l.bias.size() != static_cast<std::size_t>(l.out_channels))
                throw ContractError("conv layer " + std::to_string(i) +
                                    " bias length does not match out_channels");
            channels = l.out_channels;
        }
    }
}

std::vector<std::string> available_tags(const FeatureNetwork& net) {
    std::vector<std::string> tags;
    for (const auto& l : net.layers)
        if (!l.tag.empty()) tags.push_back(l.tag);
    return tags;
}

// ---------------------------------------------------------------------------
// Weight file: magic "WDSTNET1" | u32 layer count | u32 input channels,
// then per layer: u8 kind, u16 tag length + tag bytes; conv adds u32 in/out
// channels, float32 weights (out-channel-major) and biases; pool adds a mode
// byte. Everything little-endian.
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'W', 'D', 'S', 'T', 'N', 'E', 'T', '1'};

class ByteReader {
public:
    ByteReader(std::vector<unsigned char> bytes, std::string path)
        : bytes_(std::move(bytes)), path_(std::move(path)) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    void need(std::size_t n, const std::string& what) const {
        if (remaining() < n)
            throw FormatError("'" + path_ + "': truncated while reading " + what, pos_);
    }

    std::uint8_t u8(const std::string& what) {
        need(1, what);
        return bytes_[pos_++];
    }
    std::uint16_t u16(const std::string& what) {
        need(2, what);
        std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32(const std::string& what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
        pos_ += 4;
        return v;
    }
    float f32(const std::string& what) {
        const std::uint32_t raw = u32(what);
        float f;
        std::memcpy(&f, &raw, 4);
        return f;
    }
    std::string text(std::size_t n, const std::string& what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        throw FormatError("'" + path_ + "': " + msg, at);
    }

private:
    std::vector<unsigned char> bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

class ByteWriter {
public:
    explicit ByteWriter(const std::string& path) : out_(path, std::ios::binary), path_(path) {
        if (!out_) throw IoError("cannot open '" + path + "' for writing");
    }

    void raw(const void* data, std::size_t n) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    }
    void u8(std::uint8_t v) { raw(&v, 1); }
    void u16(std::uint16_t v) {
        unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>(v >> 8)};
        raw(b, 2);
    }
    void u32(std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
        raw(b, 4);
    }
    void f32(float f) {
        std::uint32_t raw_bits;
        std::memcpy(&raw_bits, &f, 4);
        u32(raw_bits);
    }
    void finish() {
        out_.flush();
        if (!out_) throw IoError("failed to write '" + path_ + "'");
    }

private:
    std::ofstream out_;
    std::string path_;
};

std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace

FeatureNetwork load_weights(const std::string& path) {
    ByteReader r(read_file_bytes(path), path);
    const std::string magic = r.text(8, "file magic");
    if (std::memcmp(magic.data(), kMagic, 8) != 0)
        r.fail("bad magic (expected WDSTNET1)", 0);

    FeatureNetwork net;
    const std::uint32_t layer_count = r.u32("layer count");
    net.input_channels = static_cast<int>(r.u32("input channel count"));
    if (net.input_channels <= 0) r.fail("input channel count must be positive", r.pos() - 4);

    std::set<std::string> seen_tags;
    int channels = net.input_channels;
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        LayerSpec layer;
        const std::size_t kind_at = r.pos();
        const std::uint8_t kind = r.u8("layer kind");
        if (kind > 2) r.fail("invalid layer kind byte", kind_at);
        layer.kind = static_cast<LayerKind>(kind);

        const std::size_t tag_at = r.pos();
        const std::uint16_t tag_len = r.u16("tag length");
        layer.tag = r.text(tag_len, "tag text");
        if (!layer.tag.empty() && !seen_tags.insert(layer.tag).second)
            r.fail("duplicate layer tag '" + layer.tag + "'", tag_at);

        if (layer.kind == LayerKind::conv) {
            const std::size_t dims_at = r.pos();
            layer.in_channels = static_cast<int>(r.u32("conv input channels"));
            layer.out_channels = static_cast<int>(r.u32("conv output channels"));
            if (layer.in_channels <= 0 || layer.out_channels <= 0)
                r.fail("conv channel counts must be positive", dims_at);
            if (layer.in_channels != channels)
                r.fail("channel chain broken: conv expects " +
                           std::to_string(layer.in_channels) + " channels after " +
                           std::to_string(channels),
                       dims_at);
            const std::size_t nw = conv_weight_count(layer);
            r.need(4 * (nw + layer.out_channels), "conv weights");
            layer.weights.resize(nw);
            for (std::size_t k = 0; k < nw; ++k) layer.weights[k] = r.f32("conv weight");
            layer.bias.resize(static_cast<std::size_t>(layer.out_channels));
            for (auto& b : layer.bias) b = r.f32("conv bias");
            channels = layer.out_channels;
        } else if (layer.kind == LayerKind::pool) {
            const std::size_t mode_at = r.pos();
            const std::uint8_t mode = r.u8("pool mode");
            if (mode > 1) r.fail("invalid pool mode byte", mode_at);
            layer.pool_mode = static_cast<PoolMode>(mode);
        }
        net.layers.push_back(std::move(layer));
    }
    if (r.remaining() != 0) r.fail("trailing bytes after last layer", r.pos());
    return net;
}

void save_weights(const FeatureNetwork& net, const std::string& path) {
    validate_network(net);
    ByteWriter w(path);
    w.raw(kMagic, 8);
    w.u32(static_cast<std::uint32_t>(net.layers.size()));
    w.u32(static_cast<std::uint32_t>(net.input_channels));
    for (const auto& layer : net.layers) {
        w.u8(static_cast<std::uint8_t>(layer.kind));
        w.u16(static_cast<std::uint16_t>(layer.tag.size()));
        w.raw(layer.tag.data(), layer.tag.size());
        if (layer.kind == LayerKind::conv) {
            w.u32(static_cast<std::uint32_t>(layer.in_channels));
            w.u32(static_cast<std::uint32_t>(layer.out_channels));
            for (double v : layer.weights) w.f32(static_cast<float>(v));
            for (double v : layer.bias) w.f32(static_cast<float>(v));
        } else if (layer.kind == LayerKind::pool) {
            w.u8(static_cast<std::uint8_t>(layer.pool_mode));
        }
    }
    w.finish();
}

// ---------------------------------------------------------------------------
// Network construction
// ---------------------------------------------------------------------------

namespace {

LayerSpec conv_layer(const std::string& tag, int in_ch, int out_ch) {
    LayerSpec l;
    l.kind = LayerKind::conv;
    l.tag = tag;
    l.in_channels = in_ch;
    l.out_channels = out_ch;
    l.weights.assign(conv_weight_count(l), 0.0);
    l.bias.assign(static_cast<std::size_t>(out_ch), 0.0);
    return l;
}

LayerSpec relu_layer(const std::string& tag) {
    LayerSpec l;
    l.kind = LayerKind::relu;
    l.tag = tag;
    return l;
}

LayerSpec pool_layer(const std::string& tag, PoolMode mode) {
    LayerSpec l;
    l.kind = LayerKind::pool;
    l.tag = tag;
    l.pool_mode = mode;
    return l;
}

// Uniform draw in [-scale, scale], snapped to float32 so serialized networks
// round-trip bit-exactly. mt19937_64 output is fully specified, so the same
// seed produces the same network on every platform.
double uniform_weight(std::mt19937_64& gen, double scale) {
    const double u = (gen() >> 11) * 0x1.0p-53;  // [0, 1)
    return static_cast<double>(static_cast<float>((2.0 * u - 1.0) * scale));
}

}  // namespace

FeatureNetwork random_network(std::uint64_t seed, double scale, PoolMode pool_mode) {
    if (!(scale > 0.0)) throw ContractError("random_network scale must be positive");

    FeatureNetwork net;
    net.input_channels = 3;
    // Reduced VGG-style layout, two pools deep so 8x8 inputs keep a nonempty
    // grid at the deepest tagged layer.
    net.layers.push_back(conv_layer("conv1_1", 3, 8));
    net.layers.push_back(relu_layer("relu1_1"));
    net.layers.push_back(pool_layer("pool1", pool_mode));
    net.layers.push_back(conv_layer("conv2_1", 8, 16));
    net.layers.push_back(relu_layer("relu2_1"));
    net.layers.push_back(conv_layer("conv2_2", 16, 16));
    net.layers.push_back(relu_layer("relu2_2"));
    net.layers.push_back(pool_layer("pool2", pool_mode));
    net.layers.push_back(conv_layer("conv3_1", 16, 16));
    net.layers.push_back(relu_layer("relu3_1"));
    net.layers.push_back(conv_layer("conv4_1", 16, 16));
    net.layers.push_back(relu_layer("relu4_1"));
    net.layers.push_back(conv_layer("conv5_1", 16, 16));
    net.layers.push_back(relu_layer("relu5_1"));

    std::mt19937_64 gen(seed);
    for (auto& layer : net.layers) {
        if (layer.kind != LayerKind::conv) continue;
        for (auto& v : layer.weights) v = uniform_weight(gen, scale);
        for (auto& v : layer.bias) v = uniform_weight(gen, scale);
    }
    validate_network(net);
    return net;
}

FeatureNetwork vgg19_architecture(PoolMode pool_mode) {
    const int block_channels[5] = {64, 128, 256, 512, 512};
    const int block_convs[5] = {2, 2, 4, 4, 4};
    FeatureNetwork net;
    net.input_channels = 3;
    int in_ch = 3;
    for (int b = 0; b < 5; ++b) {
        for (int c = 0; c < block_convs[b]; ++c) {
            const std::string suffix = std::to_string(b + 1) + "_" + std::to_string(c + 1);
            net.layers.push_back(conv_layer("conv" + suffix, in_ch, block_channels[b]));
            net.layers.push_back(relu_layer("relu" + suffix));
            in_ch = block_channels[b];
        }
        net.layers.push_back(pool_layer("pool" + std::to_string(b + 1), pool_mode));
    }
    validate_network(net);
    return net;
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

namespace detail {

// The three kernels below are written tap-by-tap: for each (dy, dx) tap the
// inner loop runs over a contiguous x range of one row, which keeps the hot
// loops vectorizable without changing the zero-padding semantics. For a tap
// (dy, dx) the source index sy = y+dy-1 constrains y to [max(0,1-dy),
// min(h, h-dy+1)) and likewise for x.

Tensor3 conv3x3_forward(const LayerSpec& layer, const Tensor3& in) {
    const int h = in.height, w = in.width;
    Tensor3 out(layer.out_channels, h, w);
    for (int o = 0; o < layer.out_channels; ++o) {
        double* oplane = out.v.data() + static_cast<std::size_t>(o) * h * w;
        const double b = layer.bias[static_cast<std::size_t>(o)];
        for (int k = 0; k < h * w; ++k) oplane[k] = b;
        for (int i = 0; i < layer.in_channels; ++i) {
            const double* iplane = in.v.data() + static_cast<std::size_t>(i) * h * w;
            const double* wk =
                layer.weights.data() + (static_cast<std::size_t>(o) * layer.in_channels + i) * 9;
            for (int dy = 0; dy < 3; ++dy)
                for (int dx = 0; dx < 3; ++dx) {
                    const double wv = wk[dy * 3 + dx];
                    const int y0 = std::max(0, 1 - dy), y1 = std::min(h, h - dy + 1);
                    const int x0 = std::max(0, 1 - dx), x1 = std::min(w, w - dx + 1);
                    for (int y = y0; y < y1; ++y) {
                        double* orow = oplane + static_cast<std::size_t>(y) * w;
                        const double* irow =
                            iplane + static_cast<std::size_t>(y + dy - 1) * w + (dx - 1);
                        for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
                    }
                }
        }
    }
    return out;
}

Tensor3 conv3x3_backward_input(const LayerSpec& layer, const Tensor3& dout) {
    const int h = dout.height, w = dout.width;
    Tensor3 din(layer.in_channels, h, w);
    for (int i = 0; i < layer.in_channels; ++i) {
        double* iplane = din.v.data() + static_cast<std::size_t>(i) * h * w;
        for (int o = 0; o < layer.out_channels; ++o) {
            const double* oplane = dout.v.data() + static_cast<std::size_t>(o) * h * w;
            const double* wk =
                layer.weights.data() + (static_cast<std::size_t>(o) * layer.in_channels + i) * 9;
            for (int dy = 0; dy < 3; ++dy)
                for (int dx = 0; dx < 3; ++dx) {
                    const double wv = wk[dy * 3 + dx];
                    const int y0 = std::max(0, 1 - dy), y1 = std::min(h, h - dy + 1);
                    const int x0 = std::max(0, 1 - dx), x1 = std::min(w, w - dx + 1);
                    for (int y = y0; y < y1; ++y) {
                        const double* orow = oplane + static_cast<std::size_t>(y) * w;
                        double* irow =
                            iplane + static_cast<std::size_t>(y + dy - 1) * w + (dx - 1);
                        for (int x = x0; x < x1; ++x) irow[x] += wv * orow[x];
                    }
                }
        }
    }
    return din;
}

namespace {

// Dot product with four independent accumulators so the reduction
// vectorizes; the summation order is fixed for determinism.
double dot_range(const double* a, const double* b, int n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int k = 0;
    for (; k + 4 <= n; k += 4) {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
    }
    for (; k < n; ++k) s0 += a[k] * b[k];
    return (s0 + s1) + (s2 + s3);
}

}  // namespace

void conv3x3_backward_params(const LayerSpec& layer, const Tensor3& in, const Tensor3& dout,
                             std::vector<double>& dweights, std::vector<double>& dbias) {
    dweights.assign(layer.weights.size(), 0.0);
    dbias.assign(layer.bias.size(), 0.0);
    const int h = dout.height, w = dout.width;
    for (int o = 0; o < layer.out_channels; ++o) {
        const double* oplane = dout.v.data() + static_cast<std::size_t>(o) * h * w;
        double bsum = 0.0;
        for (int k = 0; k < h * w; ++k) bsum += oplane[k];
        dbias[static_cast<std::size_t>(o)] = bsum;
        for (int i = 0; i < layer.in_channels; ++i) {
            const double* iplane = in.v.data() + static_cast<std::size_t>(i) * h * w;
            double* dwk =
                dweights.data() + (static_cast<std::size_t>(o) * layer.in_channels + i) * 9;
            for (int dy = 0; dy < 3; ++dy)
                for (int dx = 0; dx < 3; ++dx) {
                    const int y0 = std::max(0, 1 - dy), y1 = std::min(h, h - dy + 1);
                    const int x0 = std::max(0, 1 - dx), x1 = std::min(w, w - dx + 1);
                    double acc = 0.0;
                    for (int y = y0; y < y1; ++y)
                        acc += dot_range(oplane + static_cast<std::size_t>(y) * w + x0,
                                         iplane + static_cast<std::size_t>(y + dy - 1) * w +
                                             (dx - 1) + x0,
                                         x1 - x0);
                    dwk[dy * 3 + dx] = acc;
                }
        }
    }
}

}  // namespace detail

namespace {

Tensor3 relu_forward(const Tensor3& in) {
    Tensor3 out = in;
    for (auto& v : out.v) v = std::max(0.0, v);
    return out;
}

Tensor3 pool_forward(const LayerSpec& layer, const Tensor3& in) {
    const int oh = in.height / 2, ow = in.width / 2;
    if (oh == 0 || ow == 0)
        throw ContractError("input too small to pool: " + std::to_string(in.width) + "x" +
                            std::to_string(in.height));
    Tensor3 out(in.channels, oh, ow);
    for (int c = 0; c < in.channels; ++c)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                const double a = in.at(c, 2 * y, 2 * x), b = in.at(c, 2 * y, 2 * x + 1);
                const double d = in.at(c, 2 * y + 1, 2 * x), e = in.at(c, 2 * y + 1, 2 * x + 1);
                out.at(c, y, x) = (layer.pool_mode == PoolMode::average)
                                      ? 0.25 * (a + b + d + e)
                                      : std::max(std::max(a, b), std::max(d, e));
            }
    return out;
}

Tensor3 pool_backward(const LayerSpec& layer, const Tensor3& in, const Tensor3& dout) {
    Tensor3 din(in.channels, in.height, in.width);
    for (int c = 0; c < in.channels; ++c)
        for (int y = 0; y < dout.height; ++y)
            for (int x = 0; x < dout.width; ++x) {
                const double g = dout.at(c, y, x);
                if (layer.pool_mode == PoolMode::average) {
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx)
                            din.at(c, 2 * y + dy, 2 * x + dx) += 0.25 * g;
                } else {
                    // route to the first maximum in scan order
                    int by = 2 * y, bx = 2 * x;
                    double best = in.at(c, by, bx);
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            const double v = in.at(c, 2 * y + dy, 2 * x + dx);
                            if (v > best) {
                                best = v;
                                by = 2 * y + dy;
                                bx = 2 * x + dx;
                            }
                        }
                    din.at(c, by, bx) += g;
                }
            }
    return din;
}

Tensor3 layer_forward(const LayerSpec& layer, const Tensor3& in) {
    switch (layer.kind) {
        case LayerKind::conv: return detail::conv3x3_forward(layer, in);
        case LayerKind::relu: return relu_forward(in);
        case LayerKind::pool: return pool_forward(layer, in);
    }
    throw ContractError("unreachable layer kind");
}

[[noreturn]] void throw_unknown_tag(const FeatureNetwork& net, const std::string& tag) {
    std::string avail;
    for (const auto& t : available_tags(net)) avail += (avail.empty() ? "" : ", ") + t;
    throw ContractError("unknown layer tag '" + tag + "' (available: " + avail + ")");
}

void check_input(const FeatureNetwork& net, const Tensor3& input) {
    validate_network(net);
    if (input.channels != net.input_channels)
        throw ContractError("input has " + std::to_string(input.channels) +
                            " channels, network expects " + std::to_string(net.input_channels));
    if (input.height <= 0 || input.width <= 0)
        throw ContractError("input tensor is empty");
}

}  // namespace

FeatureMaps forward(const FeatureNetwork& net, const Tensor3& input,
                    const std::vector<std::string>& tags) {
    check_input(net, input);
    std::set<std::string> wanted(tags.begin(), tags.end());
    for (const auto& t : tags) {
        bool found = false;
        for (const auto& l : net.layers) found = found || (l.tag == t);
        if (!found) throw_unknown_tag(net, t);
    }

    FeatureMaps maps;
    Tensor3 act = input;
    for (const auto& layer : net.layers) {
        act = layer_forward(layer, act);
        if (!layer.tag.empty() && wanted.count(layer.tag)) {
            for (double v : act.v)
                if (!std::isfinite(v))
                    throw ContractError("non-finite activation at tag '" + layer.tag + "'");
            maps.emplace(layer.tag, act);
        }
    }
    return maps;
}

Tensor3 backward(const FeatureNetwork& net, const Tensor3& input,
                 const FeatureMaps& grads_at_tags) {
    check_input(net, input);
    for (const auto& [tag, g] : grads_at_tags) {
        (void)g;
        bool found = false;
        for (const auto& l : net.layers) found = found || (l.tag == tag);
        if (!found) throw_unknown_tag(net, tag);
    }

    // forward pass keeping every activation: acts[i] is the output of layer i-1
    std::vector<Tensor3> acts;
    acts.reserve(net.layers.size() + 1);
    acts.push_back(input);
    for (const auto& layer : net.layers) acts.push_back(layer_forward(layer, acts.back()));

    Tensor3 cot(acts.back().channels, acts.back().height, acts.back().width);
    for (std::size_t i = net.layers.size(); i-- > 0;) {
        const auto& layer = net.layers[i];
        const Tensor3& in = acts[i];
        const Tensor3& out = acts[i + 1];
        if (!layer.tag.empty()) {
            auto it = grads_at_tags.find(layer.tag);
            if (it != grads_at_tags.end()) {
                if (!it->second.same_shape(out))
                    throw ContractError("cotangent shape mismatch at tag '" + layer.tag + "'");
                for (std::size_t k = 0; k < cot.v.size(); ++k) cot.v[k] += it->second.v[k];
            }
        }
        switch (layer.kind) {
            case LayerKind::conv:
                cot = detail::conv3x3_backward_input(layer, cot);
                break;
            case LayerKind::relu: {
                Tensor3 din = cot;
                for (std::size_t k = 0; k < din.v.size(); ++k)
                    if (in.v[k] <= 0.0) din.v[k] = 0.0;
                cot = std::move(din);
                break;
            }
            case LayerKind::pool:
                cot = pool_backward(layer, in, cot);
                break;
        }
    }
    return cot;
}

}  // namespace wdst
