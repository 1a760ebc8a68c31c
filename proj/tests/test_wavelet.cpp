#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "wdst/wavelet.hpp"

using namespace wdst;

namespace {

ImagePlane random_plane(int w, int h, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ImagePlane p(w, h);
    for (auto& v : p.samples()) v = dist(gen);
    return p;
}

double max_abs_diff(const ImagePlane& a, const ImagePlane& b) {
    REQUIRE(a.same_shape(b));
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.samples()[i] - b.samples()[i]));
    return m;
}

ImagePlane circular_shift(const ImagePlane& in, int dx, int dy) {
    ImagePlane out(in.width(), in.height());
    for (int y = 0; y < in.height(); ++y)
        for (int x = 0; x < in.width(); ++x)
            out.at((y + dy) % in.height(), (x + dx) % in.width()) = in.at(y, x);
    return out;
}

// Direct O(n^2 k^2) periodic 2D convolution: filter fx along rows, fy along
// columns, out[y][x] = sum_j fy[j] sum_i fx[i] in[(y-j) mod h][(x-i) mod w].
ImagePlane naive_separable(const ImagePlane& in, const std::vector<double>& fx,
                           const std::vector<double>& fy) {
    const int w = in.width(), h = in.height();
    auto wrap = [](int a, int n) { return ((a % n) + n) % n; };
    ImagePlane out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::size_t j = 0; j < fy.size(); ++j)
                for (std::size_t i = 0; i < fx.size(); ++i)
                    acc += fy[j] * fx[i] *
                           in.at(wrap(y - static_cast<int>(j), h),
                                 wrap(x - static_cast<int>(i), w));
            out.at(y, x) = acc;
        }
    return out;
}

}  // namespace

TEST_CASE("filter catalogue") {
    const auto names = supported_filters();
    REQUIRE(names.size() == 7);
    for (const auto& name : names) {
        const WaveletFilterPair f = make_filter_pair(name);
        CHECK(f.name == name);
        CHECK(std::abs(std::accumulate(f.h0.begin(), f.h0.end(), 0.0)) > 0.1);
        CHECK(f.delay % 2 == 1);  // half-band center is odd
    }
    CHECK_THROWS_AS(make_filter_pair("unknown"), ConfigError);
    try {
        make_filter_pair("unknown");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bior2.2") != std::string::npos);
    }
}

TEST_CASE("haar taps and bior2.2 shape") {
    const WaveletFilterPair haar = make_filter_pair("haar");
    const double s = 1.0 / std::sqrt(2.0);
    REQUIRE(haar.h0.size() == 2);
    CHECK(haar.h0[0] == doctest::Approx(s).epsilon(1e-15));
    CHECK(haar.h0[1] == doctest::Approx(s).epsilon(1e-15));
    CHECK(std::abs(haar.g0[0]) == doctest::Approx(s).epsilon(1e-15));
    CHECK(std::abs(haar.g0[1]) == doctest::Approx(s).epsilon(1e-15));
    CHECK(haar.g0[0] * haar.g0[1] < 0.0);  // high-pass kills DC

    const WaveletFilterPair bior = make_filter_pair("bior2.2");
    REQUIRE(bior.h0.size() == 5);
    for (std::size_t i = 0; i < bior.h0.size(); ++i)
        CHECK(bior.h0[i] == doctest::Approx(bior.h0[bior.h0.size() - 1 - i]).epsilon(1e-15));
}

TEST_CASE("perfect reconstruction across families, levels and sizes") {
    const std::vector<std::pair<int, int>> sizes = {{16, 16}, {64, 64}, {63, 65}};
    for (const auto& name : supported_filters()) {
        const WaveletFilterPair f = make_filter_pair(name);
        for (int levels = 1; levels <= 3; ++levels)
            for (const auto& [w, h] : sizes) {
                const ImagePlane x = random_plane(w, h, 1000 + levels);
                const double err = max_abs_diff(iswt2(swt2(x, f, levels)), x);
                INFO(name, " levels=", levels, " ", w, "x", h);
                CHECK(err < 1e-10);
            }
    }
}

TEST_CASE("constant image under haar: zero details, LL = 2c") {
    const double c = 0.3125;
    const ImagePlane x(12, 12, c);
    const SubbandPyramid pyr = swt2(x, make_filter_pair("haar"), 1);
    for (const auto* band : {&pyr.details[0].lh, &pyr.details[0].hl, &pyr.details[0].hh})
        for (double v : band->samples()) CHECK(std::abs(v) < 1e-15);
    for (double v : pyr.ll.samples()) CHECK(v == doctest::Approx(2.0 * c).epsilon(1e-12));
}

TEST_CASE("pyramid shape: 2 levels of 64x64 give 7 same-size sub-bands") {
    const ImagePlane x = random_plane(64, 64, 4);
    const SubbandPyramid pyr = swt2(x, make_filter_pair("bior2.2"), 2);
    CHECK(pyr.levels == 2);
    REQUIRE(pyr.details.size() == 2);
    int bands = 1;
    CHECK(pyr.ll.same_shape(x));
    for (const auto& t : pyr.details) {
        for (const auto* band : {&t.lh, &t.hl, &t.hh}) {
            CHECK(band->same_shape(x));
            ++bands;
        }
    }
    CHECK(bands == 7);
}

TEST_CASE("invalid level counts are rejected") {
    const ImagePlane x = random_plane(8, 8, 5);
    CHECK_THROWS_AS(swt2(x, make_filter_pair("haar"), 0), ContractError);
    CHECK_THROWS_AS(swt2(x, make_filter_pair("haar"), -2), ContractError);
}

TEST_CASE("shift invariance is bitwise") {
    std::mt19937_64 gen(77);
    const auto names = supported_filters();
    for (int trial = 0; trial < 20; ++trial) {
        const std::string name = names[gen() % names.size()];
        const int levels = 1 + static_cast<int>(gen() % 2);
        const int w = 16 + static_cast<int>(gen() % 17);
        const int h = 16 + static_cast<int>(gen() % 17);
        const int dx = static_cast<int>(gen() % w);
        const int dy = static_cast<int>(gen() % h);
        const ImagePlane x = random_plane(w, h, 9000 + trial);
        const WaveletFilterPair f = make_filter_pair(name);

        const SubbandPyramid base = swt2(x, f, levels);
        const SubbandPyramid shifted = swt2(circular_shift(x, dx, dy), f, levels);

        INFO(name, " levels=", levels, " shift=(", dx, ",", dy, ") size=", w, "x", h);
        CHECK(circular_shift(base.ll, dx, dy).samples() == shifted.ll.samples());
        for (std::size_t l = 0; l < base.details.size(); ++l) {
            CHECK(circular_shift(base.details[l].lh, dx, dy).samples() ==
                  shifted.details[l].lh.samples());
            CHECK(circular_shift(base.details[l].hl, dx, dy).samples() ==
                  shifted.details[l].hl.samples());
            CHECK(circular_shift(base.details[l].hh, dx, dy).samples() ==
                  shifted.details[l].hh.samples());
        }
    }
}

TEST_CASE("level-1 sub-bands match the naive periodic convolution oracle") {
    for (const auto& name : supported_filters()) {
        const WaveletFilterPair f = make_filter_pair(name);
        const ImagePlane x = random_plane(8, 8, 31);
        const SubbandPyramid pyr = swt2(x, f, 1);
        INFO(name);
        CHECK(max_abs_diff(pyr.ll, naive_separable(x, f.h0, f.h0)) < 1e-12);
        CHECK(max_abs_diff(pyr.details[0].lh, naive_separable(x, f.h0, f.g0)) < 1e-12);
        CHECK(max_abs_diff(pyr.details[0].hl, naive_separable(x, f.g0, f.h0)) < 1e-12);
        CHECK(max_abs_diff(pyr.details[0].hh, naive_separable(x, f.g0, f.g0)) < 1e-12);
    }
}

TEST_CASE("analysis is linear") {
    const ImagePlane x = random_plane(20, 14, 6), y = random_plane(20, 14, 7);
    const double a = 1.75, b = -0.4;
    ImagePlane mix(20, 14);
    for (std::size_t i = 0; i < mix.size(); ++i)
        mix.samples()[i] = a * x.samples()[i] + b * y.samples()[i];

    const WaveletFilterPair f = make_filter_pair("db2");
    const SubbandPyramid px = swt2(x, f, 2), py = swt2(y, f, 2), pm = swt2(mix, f, 2);
    auto combined = [&](const ImagePlane& u, const ImagePlane& v) {
        ImagePlane out(u.width(), u.height());
        for (std::size_t i = 0; i < out.size(); ++i)
            out.samples()[i] = a * u.samples()[i] + b * v.samples()[i];
        return out;
    };
    CHECK(max_abs_diff(pm.ll, combined(px.ll, py.ll)) < 1e-10);
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(max_abs_diff(pm.details[l].lh, combined(px.details[l].lh, py.details[l].lh)) <
              1e-10);
        CHECK(max_abs_diff(pm.details[l].hh, combined(px.details[l].hh, py.details[l].hh)) <
              1e-10);
    }
}

TEST_CASE("synthesis is linear and zero maps to zero") {
    const WaveletFilterPair f = make_filter_pair("coif2");
    const SubbandPyramid zero = swt2(ImagePlane(10, 10, 0.0), f, 2);
    const ImagePlane zero_img = iswt2(zero);
    for (double v : zero_img.samples()) CHECK(v == 0.0);

    const SubbandPyramid p = swt2(random_plane(10, 10, 8), f, 2);
    const SubbandPyramid q = swt2(random_plane(10, 10, 9), f, 2);
    const double a = 0.6, b = 2.5;
    SubbandPyramid mix = p;
    auto blend = [&](ImagePlane& dst, const ImagePlane& u, const ImagePlane& v) {
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst.samples()[i] = a * u.samples()[i] + b * v.samples()[i];
    };
    blend(mix.ll, p.ll, q.ll);
    for (std::size_t l = 0; l < 2; ++l) {
        blend(mix.details[l].lh, p.details[l].lh, q.details[l].lh);
        blend(mix.details[l].hl, p.details[l].hl, q.details[l].hl);
        blend(mix.details[l].hh, p.details[l].hh, q.details[l].hh);
    }
    const ImagePlane direct = iswt2(mix);
    const ImagePlane ip = iswt2(p), iq = iswt2(q);
    ImagePlane expect(10, 10);
    for (std::size_t i = 0; i < expect.size(); ++i)
        expect.samples()[i] = a * ip.samples()[i] + b * iq.samples()[i];
    CHECK(max_abs_diff(direct, expect) < 1e-10);
}

TEST_CASE("replace_ll") {
    const WaveletFilterPair f = make_filter_pair("bior2.2");
    const SubbandPyramid p = swt2(random_plane(12, 12, 10), f, 2);

    const SubbandPyramid same = replace_ll(p, p.ll);
    CHECK(same.ll.samples() == p.ll.samples());
    CHECK(same.details[1].hh.samples() == p.details[1].hh.samples());

    CHECK_THROWS_AS(replace_ll(p, ImagePlane(5, 12)), ContractError);

    // with zero details, synthesis depends only on the LL band
    SubbandPyramid zeroed = p;
    for (auto& t : zeroed.details) {
        t.lh = ImagePlane(12, 12, 0.0);
        t.hl = ImagePlane(12, 12, 0.0);
        t.hh = ImagePlane(12, 12, 0.0);
    }
    const ImagePlane new_ll = random_plane(12, 12, 11);
    const SubbandPyramid swapped = replace_ll(zeroed, new_ll);
    SubbandPyramid only_ll = zeroed;
    only_ll.ll = new_ll;
    CHECK(max_abs_diff(iswt2(swapped), iswt2(only_ll)) == 0.0);
}

TEST_CASE("pyramid dump writes one PGM per band plus the scale sidecar") {
    const auto dir = std::filesystem::temp_directory_path() / "wdst_dump_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const SubbandPyramid p = swt2(random_plane(16, 16, 12), make_filter_pair("haar"), 2);
    dump_pyramid(p, dir.string());
    int pgms = 0;
    bool sidecar = false;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".pgm") ++pgms;
        if (entry.path().filename() == "scales.txt") sidecar = true;
    }
    CHECK(pgms == 7);
    CHECK(sidecar);
    std::filesystem::remove_all(dir);
}
