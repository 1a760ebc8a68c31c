#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "wdst/errors.hpp"

namespace wdst {

/// Single-channel 2D array of double samples, row-major. Pixel intensities
/// live in [0,1] by convention; wavelet coefficients are unbounded.
class ImagePlane {
public:
    ImagePlane() = default;

    ImagePlane(int width, int height, double value = 0.0);

    static ImagePlane from_data(int width, int height, std::vector<double> data);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }

    double& at(int y, int x) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    double at(int y, int x) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    std::vector<double>& samples() { return data_; }
    const std::vector<double>& samples() const { return data_; }

    bool same_shape(const ImagePlane& o) const {
        return width_ == o.width_ && height_ == o.height_;
    }

    bool finite() const;

    /// (min, max) over all samples; requires a nonempty plane.
    std::pair<double, double> minmax() const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Throws ContractError when the plane holds a NaN or infinity.
void require_finite(const ImagePlane& plane, const std::string& what);

enum class ColorSpace { rgb, ycbcr };

/// Three same-size planes plus the color space they are expressed in.
/// YCbCr uses the full-range convention: Y in [0,1], chroma offset by 0.5.
struct ColorImage {
    std::array<ImagePlane, 3> planes;
    ColorSpace space = ColorSpace::rgb;

    int width() const { return planes[0].width(); }
    int height() const { return planes[0].height(); }
};

ColorImage make_color_image(ImagePlane r, ImagePlane g, ImagePlane b,
                            ColorSpace space = ColorSpace::rgb);

/// Reads an 8-bit PNG or a PGM/PPM (P2/P3/P5/P6) file into an RGB image with
/// samples scaled to [0,1]. Grayscale files yield three identical planes.
ColorImage load_image(const std::string& path);

/// Writes PNG (.png), binary PGM (.pgm, planes must be equal) or binary PPM
/// (.ppm). Samples are clamped to [0,1] and quantized to 8 bits at the file
/// boundary. Non-finite samples are rejected before anything is written.
void save_image(const ColorImage& image, const std::string& path);

ColorImage rgb_to_ycbcr(const ColorImage& image);
ColorImage ycbcr_to_rgb(const ColorImage& image);

}  // namespace wdst
