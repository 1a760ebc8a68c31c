#pragma once

#include <string>
#include <vector>

#include "wdst/image.hpp"

namespace wdst {

/// Analysis (h0, g0) and synthesis (h1, g1) filters of one wavelet family.
///
/// The high-pass filters are derived from the low-pass pair by the parity
/// rule g0[n] = (-1)^n h1[n], g1[n] = (-1)^(n+1) h0[n], under which
/// H1(z)H0(z) + G1(z)G0(z) = 2 z^-delay with `delay` the (odd) center of the
/// half-band product H1*H0. That identity is what makes iswt2 an exact
/// inverse of swt2 under periodic extension.
struct WaveletFilterPair {
    std::string name;
    std::vector<double> h0;  // analysis low-pass
    std::vector<double> g0;  // analysis high-pass
    std::vector<double> h1;  // synthesis low-pass
    std::vector<double> g1;  // synthesis high-pass
    int delay = 0;           // half-band center of H1*H0
};

/// Supported families: haar, db2, db4, coif2, bior2.2, bior4.4, rbio2.2.
std::vector<std::string> supported_filters();

/// Builds the filter pair for one family from embedded canonical tap tables.
/// Unknown names raise ConfigError listing the supported families.
WaveletFilterPair make_filter_pair(const std::string& name);

struct SubbandTriple {
    ImagePlane lh;  // x low-pass,  y high-pass (horizontal details)
    ImagePlane hl;  // x high-pass, y low-pass  (vertical details)
    ImagePlane hh;  // both high-pass           (diagonal details)
};

/// The 3N+1 same-size sub-bands of an N-level 2D stationary wavelet
/// transform. details[i] holds level i+1; level 1 is the finest.
struct SubbandPyramid {
    int levels = 0;
    ImagePlane ll;
    std::vector<SubbandTriple> details;
    WaveletFilterPair filter;
};

/// N-level undecimated 2D wavelet analysis: at level i the filters are
/// upsampled by 2^(i-1) (a trous), rows and columns are convolved with
/// periodic extension, and nothing is downsampled.
SubbandPyramid swt2(const ImagePlane& image, const WaveletFilterPair& filter, int levels);

/// Exact inverse of swt2 for the pyramid's own filter pair.
ImagePlane iswt2(const SubbandPyramid& pyramid);

/// Copy of the pyramid with its LL sub-band replaced.
SubbandPyramid replace_ll(const SubbandPyramid& pyramid, const ImagePlane& new_ll);

/// Writes each sub-band as a min-max scaled PGM into `dir`, plus a
/// `scales.txt` sidecar recording the (min, max) used per band.
void dump_pyramid(const SubbandPyramid& pyramid, const std::string& dir);

}  // namespace wdst
