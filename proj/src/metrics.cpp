#include "wdst/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace wdst {

double psnr(const ImagePlane& a, const ImagePlane& b, double peak, double cap_db) {
    if (!a.same_shape(b)) throw ContractError("psnr inputs differ in size");
    if (!(peak > 0.0)) throw ContractError("psnr peak must be positive");
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.samples()[i] - b.samples()[i];
        sq += d * d;
    }
    const double mse = sq / static_cast<double>(a.size());
    if (mse == 0.0) return cap_db;
    return std::min(10.0 * std::log10(peak * peak / mse), cap_db);
}

namespace {

constexpr int kWindow = 11;

const std::vector<double>& gaussian_window() {
    static const std::vector<double> w = [] {
        std::vector<double> v(kWindow * kWindow);
        const double sigma = 1.5;
        double sum = 0.0;
        for (int y = 0; y < kWindow; ++y)
            for (int x = 0; x < kWindow; ++x) {
                const double dy = y - (kWindow - 1) / 2.0;
                const double dx = x - (kWindow - 1) / 2.0;
                v[y * kWindow + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
                sum += v[y * kWindow + x];
            }
        for (auto& e : v) e /= sum;
        return v;
    }();
    return w;
}

}  // namespace

double ssim(const ImagePlane& a, const ImagePlane& b) {
    if (!a.same_shape(b)) throw ContractError("ssim inputs differ in size");
    if (a.width() < kWindow || a.height() < kWindow)
        throw ContractError("ssim needs images of at least 11x11, got " +
                            std::to_string(a.width()) + "x" + std::to_string(a.height()));
    const double c1 = 0.01 * 0.01;  // (k1 L)^2 with L = 1
    const double c2 = 0.03 * 0.03;
    const auto& win = gaussian_window();

    double total = 0.0;
    std::int64_t windows = 0;
    for (int y = 0; y + kWindow <= a.height(); ++y)
        for (int x = 0; x + kWindow <= a.width(); ++x) {
            double ma = 0.0, mb = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
            for (int wy = 0; wy < kWindow; ++wy)
                for (int wx = 0; wx < kWindow; ++wx) {
                    const double wgt = win[wy * kWindow + wx];
                    const double va = a.at(y + wy, x + wx);
                    const double vb = b.at(y + wy, x + wx);
                    ma += wgt * va;
                    mb += wgt * vb;
                    aa += wgt * va * va;
                    bb += wgt * vb * vb;
                    ab += wgt * va * vb;
                }
            const double var_a = aa - ma * ma;
            const double var_b = bb - mb * mb;
            const double cov = ab - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                     ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
            ++windows;
        }
    return total / static_cast<double>(windows);
}

Histogram subband_histogram(const ImagePlane& s, int bins, double lo, double hi) {
    if (bins < 1) throw ContractError("histogram needs at least one bin");
    if (!(lo < hi)) throw ContractError("histogram range must satisfy lo < hi");
    require_finite(s, "histogram input");
    Histogram h;
    h.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int k = 0; k <= bins; ++k)
        h.bin_edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / bins;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v : s.samples()) {
        int idx = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        idx = std::clamp(idx, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(idx)];
    }
    h.total = static_cast<std::int64_t>(s.size());
    return h;
}

double histogram_distance(const Histogram& h1, const Histogram& h2) {
    if (h1.bin_edges != h2.bin_edges)
        throw ContractError("histograms use different binnings");
    const double t1 = static_cast<double>(h1.total);
    const double t2 = static_cast<double>(h2.total);
    if (h1.total <= 0 || h2.total <= 0)
        throw ContractError("histogram distance needs nonempty histograms");
    double d = 0.0;
    for (std::size_t i = 0; i < h1.counts.size(); ++i) {
        const double p = static_cast<double>(h1.counts[i]) / t1;
        const double q = static_cast<double>(h2.counts[i]) / t2;
        const double denom = p + q;
        if (denom > 0.0) d += (p - q) * (p - q) / denom;
    }
    return d;
}

void write_histogram_csv(const Histogram& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.precision(17);
    out << "bin_lo,bin_hi,count\n";
    for (int i = 0; i < h.bins(); ++i)
        out << h.bin_edges[static_cast<std::size_t>(i)] << ","
            << h.bin_edges[static_cast<std::size_t>(i) + 1] << ","
            << h.counts[static_cast<std::size_t>(i)] << "\n";
    if (!out) throw IoError("failed to write '" + path + "'");
}

}  // namespace wdst
