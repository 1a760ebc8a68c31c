#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wdst/image.hpp"
#include "wdst/lse.hpp"
#include "wdst/metrics.hpp"
#include "wdst/style_transfer.hpp"
#include "wdst/wavelet.hpp"

namespace wdst {

enum class ChannelMode { luma, rgb };

/// Where the feature-extractor weights come from: a weight file, or the
/// seeded reduced random network (the desk-scale default).
struct FeatureSource {
    std::string path;  // used when non-empty
    std::uint64_t seed = 1;
    double scale = 0.05;

    bool is_random() const { return path.empty(); }
};

/// Parses "random:seed=S,scale=X" or a plain file path.
FeatureSource parse_feature_source(const std::string& text);

struct MetricsOptions {
    std::string channel = "y";  // "y" or "rgb"
    int hist_bins = 201;
    double hist_lo = -1.0;
    double hist_hi = 1.0;
};

struct FusionConfig {
    std::string wavelet_name = "bior2.2";
    int levels = 2;
    StyleTransferConfig wdst;
    std::string lse_weights;  // optional; empty = LL pass-through
    FeatureSource features;
    ChannelMode channel_mode = ChannelMode::luma;
    bool parallel_subbands = false;
    int threads = 1;
    bool record_trace = false;
    MetricsOptions metrics;
};

FusionConfig load_fusion_config(const std::string& path);
std::string fusion_config_to_json(const FusionConfig& cfg);

struct SubbandRunRecord {
    std::string channel;  // "y" in luma mode; "r"/"g"/"b" otherwise
    int level = 0;
    std::string band;  // "LH", "HL", "HH"
    bool skipped = false;
    TransferReport report;
    double seconds = 0.0;
};

struct MetricRow {
    std::string name;
    double psnr_db = 0.0;
    double ssim_value = 0.0;
    double hist_distance = 0.0;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct FusionReport {
    std::string config_echo;  // JSON text
    bool lse_applied = false;
    std::string lse_note;
    std::vector<SubbandRunRecord> subbands;
    std::vector<MetricRow> metrics;
    std::vector<StageTiming> timings;
    bool trace_enabled = false;
    /// Pooled detail-coefficient histogram distances on the metric channel:
    /// how far the fused output and the content input each sit from the
    /// style input.
    double hist_output_vs_style = 0.0;
    double hist_content_vs_style = 0.0;
};

/// JSON-lines serialization, one record per stage, schema "wdst-report/1".
void write_report_jsonl(const FusionReport& report, const std::string& path);

/// The full fusion: SWT both inputs, enhance LL of a_o (when LSE weights are
/// configured), style-transfer each high-frequency pair (content from a_o,
/// style from a_p), ISWT the result. Chroma is taken from a_o in luma mode.
std::pair<ColorImage, FusionReport> fuse(const ColorImage& a_o, const ColorImage& a_p,
                                         const FusionConfig& cfg,
                                         const ColorImage* gt = nullptr);

/// fuse, but sub-bands of the named orientations ("LH"/"HL"/"HH", every
/// level) bypass the style transfer and keep a_o's coefficients.
std::pair<ColorImage, FusionReport> ablation_fuse(const ColorImage& a_o, const ColorImage& a_p,
                                                  const FusionConfig& cfg,
                                                  const std::set<std::string>& skip,
                                                  const ColorImage* gt = nullptr);

struct SubstitutionReport {
    ColorImage a_p_tilde;        // LL from a_o, details from a_p
    ColorImage a_o_tilde;        // LL from a_p, details from a_o
    std::vector<MetricRow> rows; // A_p, ~A_p, A_o, ~A_o vs ground truth
};

/// The low-frequency substitution experiment: swap LL sub-bands between the
/// two inputs, reconstruct, and measure all four images against the ground
/// truth.
SubstitutionReport substitution_experiment(const ColorImage& a_o, const ColorImage& a_p,
                                           const ColorImage& a_gt, const FusionConfig& cfg);

/// Per-pixel convex combination mu*a_p + (1-mu)*a_o.
ColorImage pd_interpolate(const ColorImage& a_o, const ColorImage& a_p, double mu);

struct PdRow {
    double mu = 0.0;
    double psnr_db = 0.0;
    double hist_distance = 0.0;
};

std::vector<PdRow> pd_curve(const ColorImage& a_o, const ColorImage& a_p,
                            const ColorImage& a_gt, const std::vector<double>& mu_list,
                            const FusionConfig& cfg);

void write_pd_curve_csv(const std::vector<PdRow>& rows, const std::string& path);

/// All detail-band coefficients of a plane pooled into one histogram; the
/// perceptual proxy compares these between images.
Histogram detail_histogram(const ImagePlane& plane, const WaveletFilterPair& filter,
                           int levels, int bins, double lo, double hi);

/// Luma plane (or the single metric channel) of an image per MetricsOptions.
ImagePlane metric_plane(const ColorImage& image, const MetricsOptions& opt);

/// Entry point behind the `wdst` executable; exits 0 on success, 1 on
/// contract/config errors, 2 on I/O errors.
int cli_main(int argc, const char* const* argv);

}  // namespace wdst
