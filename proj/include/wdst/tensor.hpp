#pragma once

#include <cstddef>
#include <vector>

#include "wdst/image.hpp"

namespace wdst {

/// Dense channels x height x width activation tensor, channel-major.
struct Tensor3 {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> v;

    Tensor3() = default;
    Tensor3(int c, int h, int w, double value = 0.0)
        : channels(c), height(h), width(w),
          v(static_cast<std::size_t>(c) * h * w, value) {}

    double& at(int c, int y, int x) {
        return v[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return v[(static_cast<std::size_t>(c) * height + y) * width + x];
    }

    std::size_t size() const { return v.size(); }
    int spatial() const { return height * width; }

    bool same_shape(const Tensor3& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
};

/// Replicates one plane into `channels` identical channels.
Tensor3 replicate_plane(const ImagePlane& plane, int channels);

/// Sums a tensor's channels back into a single plane.
ImagePlane sum_channels(const Tensor3& t);

}  // namespace wdst
