#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wdst/image.hpp"

namespace wdst {

/// 10 log10(peak^2 / MSE) in dB; returns `cap_db` when the MSE is zero.
double psnr(const ImagePlane& a, const ImagePlane& b, double peak, double cap_db = 99.0);

/// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), k1=0.01, k2=0.03,
/// dynamic range 1.0. Requires images of at least 11x11.
double ssim(const ImagePlane& a, const ImagePlane& b);

struct Histogram {
    std::vector<double> bin_edges;     // bins + 1 ascending edges
    std::vector<std::int64_t> counts;  // one per bin
    std::int64_t total = 0;

    int bins() const { return static_cast<int>(counts.size()); }
};

/// Uniform-bin histogram over [lo, hi]; out-of-range samples land in the
/// boundary bins.
Histogram subband_histogram(const ImagePlane& s, int bins, double lo, double hi);

/// Chi-squared distance between the normalized count vectors; zero iff the
/// distributions match, 2 for disjoint single-bin masses.
double histogram_distance(const Histogram& h1, const Histogram& h2);

/// CSV rows of (bin_lo, bin_hi, count).
void write_histogram_csv(const Histogram& h, const std::string& path);

}  // namespace wdst
