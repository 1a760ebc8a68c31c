#include "wdst/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

namespace wdst {

ImagePlane::ImagePlane(int width, int height, double value) {
    if (width <= 0 || height <= 0)
        throw ContractError("ImagePlane dimensions must be positive, got " +
                            std::to_string(width) + "x" + std::to_string(height));
    width_ = width;
    height_ = height;
    data_.assign(static_cast<std::size_t>(width) * height, value);
}

ImagePlane ImagePlane::from_data(int width, int height, std::vector<double> data) {
    ImagePlane p(width, height);
    if (data.size() != p.size())
        throw ContractError("ImagePlane data length " + std::to_string(data.size()) +
                            " does not match " + std::to_string(width) + "x" +
                            std::to_string(height));
    p.data_ = std::move(data);
    return p;
}

bool ImagePlane::finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
}

std::pair<double, double> ImagePlane::minmax() const {
    if (data_.empty()) throw ContractError("minmax of empty plane");
    auto [lo, hi] = std::minmax_element(data_.begin(), data_.end());
    return {*lo, *hi};
}

void require_finite(const ImagePlane& plane, const std::string& what) {
    if (!plane.finite())
        throw ContractError(what + " contains NaN or infinite samples");
}

ColorImage make_color_image(ImagePlane r, ImagePlane g, ImagePlane b, ColorSpace space) {
    if (!r.same_shape(g) || !r.same_shape(b))
        throw ContractError("color image planes differ in size");
    ColorImage img;
    img.planes = {std::move(r), std::move(g), std::move(b)};
    img.space = space;
    return img;
}

namespace {

constexpr double kCbScale = 1.772;  // 2 (1 - Kb), Kb = 0.114
constexpr double kCrScale = 1.402;  // 2 (1 - Kr), Kr = 0.299

int skip_pnm_whitespace(std::istream& in) {
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        }
        c = in.get();
    }
    return c;
}

int read_pnm_int(std::istream& in, const std::string& path) {
    int c = skip_pnm_whitespace(in);
    if (c == EOF || !std::isdigit(c))
        throw IoError("malformed PNM header in '" + path + "'");
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    if (c != EOF) in.unget();
    return value;
}

ColorImage load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    char p = 0, kind = 0;
    in.get(p).get(kind);
    if (p != 'P' || (kind != '2' && kind != '3' && kind != '5' && kind != '6'))
        throw IoError("'" + path + "' is not a supported PNM file (P2/P3/P5/P6)");
    const bool color = (kind == '3' || kind == '6');
    const bool binary = (kind == '5' || kind == '6');
    const int width = read_pnm_int(in, path);
    const int height = read_pnm_int(in, path);
    const int maxval = read_pnm_int(in, path);
    if (width <= 0 || height <= 0)
        throw IoError("bad dimensions in '" + path + "'");
    if (maxval <= 0 || maxval > 255)
        throw IoError("unsupported bit depth (maxval " + std::to_string(maxval) + ") in '" +
                      path + "'");
    const std::size_t n = static_cast<std::size_t>(width) * height;
    const int channels = color ? 3 : 1;
    std::vector<double> samples(n * channels);
    if (binary) {
        in.get();  // single whitespace after maxval
        std::vector<unsigned char> raw(n * channels);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size())
            throw IoError("truncated pixel data in '" + path + "'");
        for (std::size_t i = 0; i < raw.size(); ++i) samples[i] = raw[i] / double(maxval);
    } else {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            int v = read_pnm_int(in, path);
            if (v > maxval) throw IoError("sample above maxval in '" + path + "'");
            samples[i] = v / double(maxval);
        }
    }
    ImagePlane r(width, height), g(width, height), b(width, height);
    for (std::size_t i = 0; i < n; ++i) {
        if (color) {
            r.samples()[i] = samples[3 * i];
            g.samples()[i] = samples[3 * i + 1];
            b.samples()[i] = samples[3 * i + 2];
        } else {
            r.samples()[i] = g.samples()[i] = b.samples()[i] = samples[i];
        }
    }
    return make_color_image(std::move(r), std::move(g), std::move(b));
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

ColorImage load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open '" + path + "' for reading");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("libpng init failed for '" + path + "'");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("libpng init failed for '" + path + "'");
    }
    std::vector<png_byte> buffer;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed to decode PNG '" + path + "'");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    if (bit_depth == 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("unsupported bit depth 16 in '" + path + "' (8-bit only)");
    }
    // normalize every layout to 8-bit RGB
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    buffer.resize(rowbytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    ImagePlane r(static_cast<int>(width), static_cast<int>(height));
    ImagePlane g = r, b = r;
    for (png_uint_32 y = 0; y < height; ++y) {
        const png_byte* row = buffer.data() + y * rowbytes;
        for (png_uint_32 x = 0; x < width; ++x) {
            r.at(static_cast<int>(y), static_cast<int>(x)) = row[3 * x + 0] / 255.0;
            g.at(static_cast<int>(y), static_cast<int>(x)) = row[3 * x + 1] / 255.0;
            b.at(static_cast<int>(y), static_cast<int>(x)) = row[3 * x + 2] / 255.0;
        }
    }
    return make_color_image(std::move(r), std::move(g), std::move(b));
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    std::string tail = s.substr(s.size() - suffix.size());
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return tail == suffix;
}

unsigned char quantize(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned char>(std::lround(c * 255.0));
}

void save_pnm(const ColorImage& image, const std::string& path, bool color) {
    if (!color) {
        // PGM holds a single channel; require the planes to agree
        for (int i = 1; i < 3; ++i)
            if (image.planes[i].samples() != image.planes[0].samples())
                throw ContractError("PGM output needs identical planes; use .ppm or .png for '" +
                                    path + "'");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const int w = image.width(), h = image.height();
    out << (color ? "P6" : "P5") << "\n" << w << " " << h << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(w) * (color ? 3 : 1));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (color) {
                for (int c = 0; c < 3; ++c) row[3 * x + c] = quantize(image.planes[c].at(y, x));
            } else {
                row[x] = quantize(image.planes[0].at(y, x));
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("failed to write '" + path + "'");
}

void save_png(const ColorImage& image, const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open '" + path + "' for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("libpng init failed for '" + path + "'");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng init failed for '" + path + "'");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to encode PNG '" + path + "'");
    }
    const int w = image.width(), h = image.height();
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(static_cast<std::size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) row[3 * x + c] = quantize(image.planes[c].at(y, x));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

ColorImage load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open '" + path + "' for reading");
    char magic[2] = {0, 0};
    probe.read(magic, 2);
    probe.close();
    if (magic[0] == 'P' && magic[1] >= '1' && magic[1] <= '6') return load_pnm(path);
    if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') return load_png(path);
    throw IoError("unsupported image format in '" + path + "' (PNG or PGM/PPM expected)");
}

void save_image(const ColorImage& image, const std::string& path) {
    for (const auto& p : image.planes) require_finite(p, "image for '" + path + "'");
    if (!image.planes[0].same_shape(image.planes[1]) ||
        !image.planes[0].same_shape(image.planes[2]))
        throw ContractError("color image planes differ in size");
    if (has_suffix(path, ".png")) {
        save_png(image, path);
    } else if (has_suffix(path, ".pgm")) {
        save_pnm(image, path, /*color=*/false);
    } else if (has_suffix(path, ".ppm") || has_suffix(path, ".pnm")) {
        save_pnm(image, path, /*color=*/true);
    } else {
        throw IoError("unsupported output extension for '" + path +
                      "' (.png/.pgm/.ppm supported)");
    }
}

ColorImage rgb_to_ycbcr(const ColorImage& image) {
    if (image.space != ColorSpace::rgb)
        throw ContractError("rgb_to_ycbcr expects an RGB image");
    for (const auto& p : image.planes) require_finite(p, "rgb image");
    const auto& r = image.planes[0];
    const auto& g = image.planes[1];
    const auto& b = image.planes[2];
    ImagePlane y(r.width(), r.height()), cb(r.width(), r.height()), cr(r.width(), r.height());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double rv = r.samples()[i], gv = g.samples()[i], bv = b.samples()[i];
        const double yv = 0.299 * rv + 0.587 * gv + 0.114 * bv;
        y.samples()[i] = yv;
        cb.samples()[i] = 0.5 + (bv - yv) / kCbScale;
        cr.samples()[i] = 0.5 + (rv - yv) / kCrScale;
    }
    return make_color_image(std::move(y), std::move(cb), std::move(cr), ColorSpace::ycbcr);
}

ColorImage ycbcr_to_rgb(const ColorImage& image) {
    if (image.space != ColorSpace::ycbcr)
        throw ContractError("ycbcr_to_rgb expects a YCbCr image");
    for (const auto& p : image.planes) require_finite(p, "ycbcr image");
    const auto& y = image.planes[0];
    const auto& cb = image.planes[1];
    const auto& cr = image.planes[2];
    ImagePlane r(y.width(), y.height()), g(y.width(), y.height()), b(y.width(), y.height());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double yv = y.samples()[i];
        const double cbv = cb.samples()[i] - 0.5;
        const double crv = cr.samples()[i] - 0.5;
        const double rv = yv + kCrScale * crv;
        const double bv = yv + kCbScale * cbv;
        const double gv = (yv - 0.299 * rv - 0.114 * bv) / 0.587;
        r.samples()[i] = rv;
        g.samples()[i] = gv;
        b.samples()[i] = bv;
    }
    return make_color_image(std::move(r), std::move(g), std::move(b), ColorSpace::rgb);
}

}  // namespace wdst
