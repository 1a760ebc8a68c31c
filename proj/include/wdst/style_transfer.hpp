#pragma once

#include <string>
#include <vector>

#include "wdst/features.hpp"
#include "wdst/image.hpp"

namespace wdst {

/// A sub-band min-max mapped into [0,1] together with the original range,
/// so the affine map can be inverted after optimization.
struct NormalizedSubband {
    ImagePlane plane;
    double lo = 0.0;
    double hi = 0.0;
};

NormalizedSubband normalize_subband(const ImagePlane& s);
ImagePlane denormalize_subband(const NormalizedSubband& n);

enum class TransferInit { content, style, average };

/// Weights and schedule of one wavelet-domain style-transfer run.
/// Defaults: content/style ratio 1e-3 read as alpha/beta, l1/content ratio
/// 1e-5 as gamma/alpha; five style layers at 0.2 each; iteration caps 5000
/// for level 1 and 1000 for level 2 (deeper levels reuse the last entry).
struct StyleTransferConfig {
    double alpha = 1.0;
    double beta = 1e3;
    double gamma = 1e-5;
    std::string content_tag = "conv2_2";
    std::vector<std::string> style_tags = {"relu1_1", "relu2_1", "relu3_1", "relu4_1", "relu5_1"};
    std::vector<double> style_layer_weights = {0.2, 0.2, 0.2, 0.2, 0.2};
    std::vector<int> max_iters_per_level = {5000, 1000};
    double grad_tol = 1e-6;
    int lbfgs_memory = 10;
    TransferInit init = TransferInit::content;

    int iterations_for_level(int level) const;
    double weight_for_tag(const std::string& tag) const;
};

/// Symmetric positive semidefinite F * F^T of the vectorized feature maps.
struct GramMatrix {
    int size = 0;                 // N_l
    std::vector<double> entries;  // size * size, row-major

    double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * size + j]; }
};

GramMatrix gram(const FeatureMaps& maps, const std::string& tag);

/// 1/(2 sqrt(N M)) * sum of squared feature differences at `tag`.
double content_loss(const FeatureMaps& fr, const FeatureMaps& fo, const std::string& tag);

/// 1/(4 N^2 M^2) * sum of squared Gram differences at `tag`.
double style_layer_loss(const FeatureMaps& fr, const FeatureMaps& fp, const std::string& tag);

/// Weighted sum of the per-layer style losses over cfg.style_tags.
double total_style_loss(const FeatureMaps& fr, const FeatureMaps& fp,
                        const StyleTransferConfig& cfg);

/// alpha * content + beta * style + gamma * |x|_1 on normalized planes.
/// Feature passes replicate each plane into three identical channels.
double total_loss(const ImagePlane& x, const ImagePlane& content, const ImagePlane& style,
                  const FeatureNetwork& net, const StyleTransferConfig& cfg);

/// Analytic gradient of total_loss with respect to x. The l1 subgradient at
/// zero is taken as zero.
ImagePlane total_loss_gradient(const ImagePlane& x, const ImagePlane& content,
                               const ImagePlane& style, const FeatureNetwork& net,
                               const StyleTransferConfig& cfg);

struct TransferIterationRecord {
    int iteration = 0;
    double total = 0.0;
    double content = 0.0;
    double style = 0.0;
    double l1 = 0.0;
    double grad_inf_norm = 0.0;
    double step = 0.0;
    bool line_search_ok = true;
};

struct TransferReport {
    int iterations = 0;
    double final_loss = 0.0;
    bool converged = false;
    bool line_search_warning = false;
    std::vector<TransferIterationRecord> trace;
};

/// Fuses one high-frequency sub-band pair: normalizes both, minimizes the
/// combined objective with L-BFGS starting from cfg.init, clamps the result
/// to [0,1] and de-normalizes it with the content sub-band's range.
/// `level` is the 1-based wavelet level and selects the iteration cap.
ImagePlane transfer_subband(const ImagePlane& content, const ImagePlane& style,
                            const FeatureNetwork& net, const StyleTransferConfig& cfg,
                            int level, TransferReport* report = nullptr);

}  // namespace wdst
