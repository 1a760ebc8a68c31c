#include "wdst/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "wdst/image.hpp"

namespace wdst {

namespace {

// Analysis filter banks. Orthogonal families store the minimal-phase scaling
// filter as h1 (lowpass) with h0 = reverse(h1) as the paired highpass seed;
// biorthogonal families store the decomposition lowpass pair directly.
// All constants were derived by spectral factorization of the product
// (halfband) polynomial in 60-digit arithmetic and verified against
// P(z) + P(-z) = 2 z^{-c}.

const std::vector<double> kHaar = {
    0.7071067811865475244, 0.7071067811865475244};

const std::vector<double> kDb2 = {
    0.48296291314453414337, 0.83651630373780790558,
    0.22414386804201338103, -0.12940952255126038117};

const std::vector<double> kDb4 = {
    0.23037781330889650086, 0.71484657055291564709,
    0.63088076792985890788, -0.027983769416859854211,
    -0.18703481171909308408, 0.030841381835560763627,
    0.032883011666885199735, -0.010597401785069032105};

const std::vector<double> kCoif2 = {
    0.016387336841569357236, -0.041464936532389270969,
    -0.067372557888690675273, 0.38611006101741656931,
    0.8127236352017919141, 0.41700519037726375501,
    -0.07648859557086190966, -0.059434419151147619224,
    0.023680171466274870191, 0.0056114349390686915092,
    -0.0018232088635360321946, -0.00072054946366460122876};

// CDF 5/3 decomposition pair
const std::vector<double> kBior22H0 = {
    -0.1767766952966368811, 0.3535533905932737622, 1.0606601717798212866,
    0.3535533905932737622, -0.1767766952966368811};
const std::vector<double> kBior22H1 = {
    0.3535533905932737622, 0.7071067811865475244, 0.3535533905932737622};

// CDF 9/7 decomposition pair
const std::vector<double> kBior44H0 = {
    0.037828455506995461393, -0.023849465019380001913,
    -0.11062440441842340885, 0.37740285561265376411,
    0.85269867900940341931, 0.37740285561265376411,
    -0.11062440441842340885, -0.023849465019380001913,
    0.037828455506995461393};
const std::vector<double> kBior44H1 = {
    -0.064538882628938438637, -0.040689417609558436724,
    0.41809227322221220084, 0.78848561640566439785,
    0.41809227322221220084, -0.040689417609558436724,
    -0.064538882628938438637};

std::vector<double> reversed(std::vector<double> f) {
    std::reverse(f.begin(), f.end());
    return f;
}

// g0[n] = (-1)^n h1[n]
std::vector<double> alternate_even(const std::vector<double>& f) {
    std::vector<double> out(f.size());
    for (std::size_t n = 0; n < f.size(); ++n)
        out[n] = (n % 2 == 0) ? f[n] : -f[n];
    return out;
}

// g1[n] = (-1)^{n+1} h0[n]
std::vector<double> alternate_odd(const std::vector<double>& f) {
    std::vector<double> out(f.size());
    for (std::size_t n = 0; n < f.size(); ++n)
        out[n] = (n % 2 == 0) ? -f[n] : f[n];
    return out;
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

// The reconstruction identity leaves a pure delay: h1*h0 + g1*g0 = 2 z^{-c}.
// Locate c and confirm the identity numerically so a bad table is caught at
// construction time rather than as silent reconstruction error.
int delay_from_product(const WaveletFilterPair& fp) {
    const auto p = convolve(fp.h1, fp.h0);
    const auto q = convolve(fp.g1, fp.g0);
    std::vector<double> sum(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) sum[i] = p[i] + q[i];
    int c = -1;
    for (std::size_t i = 0; i < sum.size(); ++i) {
        if (std::abs(sum[i]) > 1e-8) {
            if (c >= 0 || std::abs(sum[i] - 2.0) > 1e-10)
                throw ContractError("filter bank fails the reconstruction identity");
            c = static_cast<int>(i);
        }
    }
    if (c < 0) throw ContractError("filter bank fails the reconstruction identity");
    return c;
}

WaveletFilterPair orthogonal_pair(const std::string& name, const std::vector<double>& scaling) {
    WaveletFilterPair fp;
    fp.name = name;
    fp.h1 = scaling;
    fp.h0 = reversed(scaling);
    fp.g0 = alternate_even(fp.h1);
    fp.g1 = alternate_odd(fp.h0);
    fp.delay = delay_from_product(fp);
    return fp;
}

WaveletFilterPair biorthogonal_pair(const std::string& name, const std::vector<double>& h0,
                                    const std::vector<double>& h1) {
    WaveletFilterPair fp;
    fp.name = name;
    fp.h0 = h0;
    fp.h1 = h1;
    fp.g0 = alternate_even(fp.h1);
    fp.g1 = alternate_odd(fp.h0);
    fp.delay = delay_from_product(fp);
    return fp;
}

int mod(int a, int n) {
    const int r = a % n;
    return r < 0 ? r + n : r;
}

enum class Axis { x, y };

// Circular convolution with the filter upsampled by `stride` (à trous):
// out[n] = sum_k f[k] x[(n - k*stride) mod N], applied along rows or columns.
ImagePlane conv_axis(const ImagePlane& in, const std::vector<double>& f, int stride, Axis axis) {
    const int w = in.width(), h = in.height();
    ImagePlane out(w, h, 0.0);
    const int taps = static_cast<int>(f.size());
    if (axis == Axis::x) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int k = 0; k < taps; ++k) acc += f[k] * in.at(y, mod(x - k * stride, w));
                out.at(y, x) = acc;
            }
    } else {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int k = 0; k < taps; ++k) acc += f[k] * in.at(mod(y - k * stride, h), x);
                out.at(y, x) = acc;
            }
    }
    return out;
}

// Roll the plane by (shift, shift) with wraparound (used to cancel the
// filter-bank delay after synthesis).
ImagePlane roll(const ImagePlane& in, int shift) {
    const int w = in.width(), h = in.height();
    ImagePlane out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(mod(y + shift, h), mod(x + shift, w)) = in.at(y, x);
    return out;
}

}  // namespace

std::vector<std::string> supported_filters() {
    return {"haar", "db2", "db4", "coif2", "bior2.2", "bior4.4", "rbio2.2"};
}

WaveletFilterPair make_filter_pair(const std::string& name) {
    if (name == "haar") return orthogonal_pair(name, kHaar);
    if (name == "db2") return orthogonal_pair(name, kDb2);
    if (name == "db4") return orthogonal_pair(name, kDb4);
    if (name == "coif2") return orthogonal_pair(name, kCoif2);
    if (name == "bior2.2") return biorthogonal_pair(name, kBior22H0, kBior22H1);
    if (name == "bior4.4") return biorthogonal_pair(name, kBior44H0, kBior44H1);
    if (name == "rbio2.2") return biorthogonal_pair(name, kBior22H1, kBior22H0);
    std::string known;
    for (const auto& n : supported_filters()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown wavelet '" + name + "' (supported: " + known + ")");
}

SubbandPyramid swt2(const ImagePlane& image, const WaveletFilterPair& filter, int levels) {
    if (levels < 1) throw ContractError("decomposition depth must be >= 1");
    require_finite(image, "swt2 input");

    SubbandPyramid pyr;
    pyr.levels = levels;
    pyr.filter = filter;
    pyr.details.reserve(static_cast<std::size_t>(levels));

    ImagePlane approx = image;
    for (int level = 1; level <= levels; ++level) {
        const int stride = 1 << (level - 1);
        ImagePlane low_x = conv_axis(approx, filter.h0, stride, Axis::x);
        ImagePlane high_x = conv_axis(approx, filter.g0, stride, Axis::x);

        SubbandTriple t;
        t.lh = conv_axis(low_x, filter.g0, stride, Axis::y);   // horizontal detail
        t.hl = conv_axis(high_x, filter.h0, stride, Axis::y);  // vertical detail
        t.hh = conv_axis(high_x, filter.g0, stride, Axis::y);  // diagonal detail
        approx = conv_axis(low_x, filter.h0, stride, Axis::y);
        pyr.details.push_back(std::move(t));
    }
    pyr.ll = std::move(approx);
    return pyr;
}

ImagePlane iswt2(const SubbandPyramid& pyramid) {
    if (pyramid.levels < 1 ||
        pyramid.details.size() != static_cast<std::size_t>(pyramid.levels))
        throw ContractError("pyramid level count does not match its detail triples");
    const auto& f = pyramid.filter;

    ImagePlane approx = pyramid.ll;
    for (int level = pyramid.levels; level >= 1; --level) {
        const auto& t = pyramid.details[static_cast<std::size_t>(level - 1)];
        if (!t.lh.same_shape(approx) || !t.hl.same_shape(approx) || !t.hh.same_shape(approx))
            throw ContractError("sub-band size mismatch at level " + std::to_string(level));
        const int stride = 1 << (level - 1);

        // Reverse the analysis split: combine along x with the synthesis pair,
        // then along y, and undo the accumulated delay.
        auto combine_x = [&](const ImagePlane& low, const ImagePlane& high) {
            ImagePlane lx = conv_axis(low, f.h1, stride, Axis::x);
            ImagePlane gx = conv_axis(high, f.g1, stride, Axis::x);
            for (std::size_t i = 0; i < lx.size(); ++i) lx.samples()[i] += gx.samples()[i];
            return lx;
        };
        ImagePlane low_x = combine_x(approx, t.hl);
        ImagePlane high_x = combine_x(t.lh, t.hh);
        ImagePlane low_y = conv_axis(low_x, f.h1, stride, Axis::y);
        ImagePlane high_y = conv_axis(high_x, f.g1, stride, Axis::y);
        ImagePlane combined(approx.width(), approx.height());
        for (std::size_t i = 0; i < combined.size(); ++i)
            combined.samples()[i] = 0.25 * (low_y.samples()[i] + high_y.samples()[i]);
        approx = roll(combined, -stride * f.delay);
    }
    return approx;
}

SubbandPyramid replace_ll(const SubbandPyramid& pyramid, const ImagePlane& new_ll) {
    if (!pyramid.ll.same_shape(new_ll))
        throw ContractError("replacement approximation band has the wrong size");
    require_finite(new_ll, "replacement approximation band");
    SubbandPyramid out = pyramid;
    out.ll = new_ll;
    return out;
}

namespace {

void dump_band(const ImagePlane& band, const std::string& path, std::ostream& sidecar,
               const std::string& label) {
    auto [lo, hi] = band.minmax();
    const double span = (hi > lo) ? (hi - lo) : 1.0;
    ImagePlane scaled(band.width(), band.height());
    for (std::size_t i = 0; i < band.size(); ++i)
        scaled.samples()[i] = (band.samples()[i] - lo) / span;
    save_image(make_color_image(scaled, scaled, scaled), path);
    sidecar << label << " min " << lo << " max " << hi << "\n";
}

}  // namespace

void dump_pyramid(const SubbandPyramid& pyramid, const std::string& directory) {
    std::ofstream sidecar(directory + "/scales.txt");
    if (!sidecar) throw IoError("cannot open '" + directory + "/scales.txt' for writing");
    sidecar.precision(17);
    dump_band(pyramid.ll, directory + "/LL.pgm", sidecar, "LL");
    for (int level = 1; level <= pyramid.levels; ++level) {
        const auto& t = pyramid.details[static_cast<std::size_t>(level - 1)];
        const std::string suffix = std::to_string(level) + ".pgm";
        dump_band(t.lh, directory + "/LH" + suffix, sidecar, "LH" + std::to_string(level));
        dump_band(t.hl, directory + "/HL" + suffix, sidecar, "HL" + std::to_string(level));
        dump_band(t.hh, directory + "/HH" + suffix, sidecar, "HH" + std::to_string(level));
    }
    if (!sidecar) throw IoError("failed to write '" + directory + "/scales.txt'");
}

}  // namespace wdst
