#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "wdst/image.hpp"

using namespace wdst;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ColorImage random_rgb(int w, int h, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    ImagePlane r(w, h), g(w, h), b(w, h);
    for (auto* p : {&r, &g, &b})
        for (auto& v : p->samples()) v = dist(gen);
    return make_color_image(std::move(r), std::move(g), std::move(b));
}

}  // namespace

TEST_CASE("plane construction and invariants") {
    ImagePlane p(3, 2, 0.25);
    CHECK(p.width() == 3);
    CHECK(p.height() == 2);
    CHECK(p.size() == 6);
    CHECK(p.at(1, 2) == 0.25);
    p.at(0, 1) = -4.0;
    CHECK(p.samples()[1] == -4.0);
    CHECK(p.minmax() == std::pair<double, double>{-4.0, 0.25});
    CHECK(p.finite());
    p.at(0, 0) = std::nan("");
    CHECK_FALSE(p.finite());
    CHECK_THROWS_AS(require_finite(p, "plane"), ContractError);

    CHECK_THROWS_AS(ImagePlane(0, 3), ContractError);
    CHECK_THROWS_AS(ImagePlane(3, -1), ContractError);
    CHECK_THROWS_AS(ImagePlane::from_data(2, 2, {1.0, 2.0, 3.0}), ContractError);
}

TEST_CASE("color image construction rejects mismatched planes") {
    CHECK_THROWS_AS(make_color_image(ImagePlane(2, 2), ImagePlane(2, 3), ImagePlane(2, 2)),
                    ContractError);
}

TEST_CASE("plain PGM with maxval 255 scales linearly") {
    const std::string path = temp_path("wdst_ascii.pgm");
    write_file(path, "P2\n# comment\n2 2\n255\n0 255\n128 64\n");
    const ColorImage img = load_image(path);
    CHECK(img.width() == 2);
    CHECK(img.height() == 2);
    for (const auto& plane : img.planes) {
        CHECK(plane.at(0, 0) == 0.0);
        CHECK(plane.at(0, 1) == 1.0);
        CHECK(plane.at(1, 0) == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
        CHECK(plane.at(1, 1) == doctest::Approx(64.0 / 255.0).epsilon(1e-12));
    }
    // grayscale loads yield three identical planes
    CHECK(img.planes[0].samples() == img.planes[1].samples());
    CHECK(img.planes[0].samples() == img.planes[2].samples());
    std::remove(path.c_str());
}

TEST_CASE("nonexistent and malformed files raise I/O errors") {
    CHECK_THROWS_AS(load_image(temp_path("wdst_missing_file.png")), IoError);

    const std::string bad = temp_path("wdst_bad.pgm");
    write_file(bad, "P5\n2 2\n255\n\xff");  // truncated pixel data
    CHECK_THROWS_AS(load_image(bad), IoError);

    write_file(bad, "P5\n2 2\n65535\n");  // unsupported bit depth
    CHECK_THROWS_AS(load_image(bad), IoError);

    write_file(bad, "Q7\nnot an image\n");  // unknown magic
    CHECK_THROWS_AS(load_image(bad), IoError);
    std::remove(bad.c_str());
}

TEST_CASE("PNG round trip is bounded by one quantization step") {
    const std::string path = temp_path("wdst_roundtrip.png");
    const ColorImage img = random_rgb(17, 13, 99);
    save_image(img, path);
    const ColorImage back = load_image(path);
    REQUIRE(back.width() == 17);
    REQUIRE(back.height() == 13);
    double max_err = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < img.planes[0].size(); ++i)
            max_err = std::max(max_err, std::abs(img.planes[c].samples()[i] -
                                                 back.planes[c].samples()[i]));
    CHECK(max_err <= 1.0 / 255.0 + 1e-12);
    std::remove(path.c_str());
}

TEST_CASE("PPM and PGM binary round trips") {
    const std::string ppm = temp_path("wdst_roundtrip.ppm");
    const ColorImage img = random_rgb(9, 7, 5);
    save_image(img, ppm);
    const ColorImage back = load_image(ppm);
    double max_err = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < img.planes[0].size(); ++i)
            max_err = std::max(max_err, std::abs(img.planes[c].samples()[i] -
                                                 back.planes[c].samples()[i]));
    CHECK(max_err <= 1.0 / 255.0 + 1e-12);
    std::remove(ppm.c_str());

    const std::string pgm = temp_path("wdst_roundtrip.pgm");
    ColorImage gray = img;
    gray.planes[1] = gray.planes[0];
    gray.planes[2] = gray.planes[0];
    save_image(gray, pgm);
    const ColorImage gback = load_image(pgm);
    CHECK(gback.planes[0].samples() == gback.planes[1].samples());
    double gerr = 0.0;
    for (std::size_t i = 0; i < gray.planes[0].size(); ++i)
        gerr = std::max(gerr,
                        std::abs(gray.planes[0].samples()[i] - gback.planes[0].samples()[i]));
    CHECK(gerr <= 1.0 / 255.0 + 1e-12);
    std::remove(pgm.c_str());
}

TEST_CASE("ascii P3 PPM loads") {
    const std::string path = temp_path("wdst_ascii.ppm");
    write_file(path, "P3\n1 2\n255\n255 0 0\n0 255 0\n");
    const ColorImage img = load_image(path);
    CHECK(img.planes[0].at(0, 0) == 1.0);
    CHECK(img.planes[1].at(0, 0) == 0.0);
    CHECK(img.planes[0].at(1, 0) == 0.0);
    CHECK(img.planes[1].at(1, 0) == 1.0);
    std::remove(path.c_str());
}

TEST_CASE("saving a color image as PGM is rejected, values clamp, NaN refuses") {
    const ColorImage img = random_rgb(4, 4, 1);
    CHECK_THROWS_AS(save_image(img, temp_path("wdst_color.pgm")), ContractError);

    const std::string path = temp_path("wdst_clamp.png");
    ColorImage hot = img;
    hot.planes[0].at(0, 0) = 1.7;
    hot.planes[1].at(0, 0) = -0.4;
    save_image(hot, path);
    const ColorImage back = load_image(path);
    CHECK(back.planes[0].at(0, 0) == 1.0);
    CHECK(back.planes[1].at(0, 0) == 0.0);
    std::remove(path.c_str());

    ColorImage broken = img;
    broken.planes[2].at(1, 1) = std::nan("");
    const std::string refused = temp_path("wdst_nan.png");
    CHECK_THROWS_AS(save_image(broken, refused), ContractError);
    CHECK_FALSE(std::filesystem::exists(refused));

    CHECK_THROWS_AS(save_image(img, temp_path("wdst_unknown.xyz")), IoError);
    CHECK_THROWS_AS(save_image(img, "/nonexistent-dir/wdst_out.png"), IoError);
}

TEST_CASE("gray axis and black map to neutral chroma") {
    ImagePlane v(2, 2);
    v.at(0, 0) = 0.0;
    v.at(0, 1) = 0.25;
    v.at(1, 0) = 0.5;
    v.at(1, 1) = 1.0;
    const ColorImage gray = make_color_image(v, v, v);
    const ColorImage ycc = rgb_to_ycbcr(gray);
    CHECK(ycc.space == ColorSpace::ycbcr);
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(ycc.planes[0].samples()[i] == doctest::Approx(v.samples()[i]).epsilon(1e-12));
        CHECK(ycc.planes[1].samples()[i] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(ycc.planes[2].samples()[i] == doctest::Approx(0.5).epsilon(1e-12));
    }

    const ColorImage black = make_color_image(ImagePlane(3, 3), ImagePlane(3, 3),
                                              ImagePlane(3, 3));
    const ColorImage bycc = rgb_to_ycbcr(black);
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(bycc.planes[0].samples()[i] == 0.0);
        CHECK(bycc.planes[1].samples()[i] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(bycc.planes[2].samples()[i] == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("color round trip is lossless to 1e-6") {
    const ColorImage img = random_rgb(15, 11, 3);
    const ColorImage back = ycbcr_to_rgb(rgb_to_ycbcr(img));
    double max_err = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < img.planes[0].size(); ++i)
            max_err = std::max(max_err, std::abs(img.planes[c].samples()[i] -
                                                 back.planes[c].samples()[i]));
    CHECK(max_err < 1e-6);
}

TEST_CASE("color conversions reject the wrong input space") {
    const ColorImage img = random_rgb(4, 4, 8);
    CHECK_THROWS_AS(ycbcr_to_rgb(img), ContractError);
    const ColorImage ycc = rgb_to_ycbcr(img);
    CHECK_THROWS_AS(rgb_to_ycbcr(ycc), ContractError);
}
