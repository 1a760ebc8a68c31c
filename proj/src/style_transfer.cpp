#include "wdst/style_transfer.hpp"

#include <algorithm>
#include <cmath>

#include "wdst/lbfgs.hpp"

namespace wdst {

NormalizedSubband normalize_subband(const ImagePlane& s) {
    require_finite(s, "sub-band to normalize");
    NormalizedSubband n;
    auto [lo, hi] = s.minmax();
    n.lo = lo;
    n.hi = hi;
    n.plane = ImagePlane(s.width(), s.height());
    if (hi > lo) {
        const double span = hi - lo;
        for (std::size_t i = 0; i < s.size(); ++i)
            n.plane.samples()[i] = (s.samples()[i] - lo) / span;
    } else {
        std::fill(n.plane.samples().begin(), n.plane.samples().end(), 0.5);
    }
    return n;
}

ImagePlane denormalize_subband(const NormalizedSubband& n) {
    require_finite(n.plane, "normalized sub-band");
    ImagePlane out(n.plane.width(), n.plane.height());
    if (n.hi > n.lo) {
        const double span = n.hi - n.lo;
        for (std::size_t i = 0; i < n.plane.size(); ++i)
            out.samples()[i] = n.lo + n.plane.samples()[i] * span;
    } else {
        std::fill(out.samples().begin(), out.samples().end(), n.lo);
    }
    return out;
}

int StyleTransferConfig::iterations_for_level(int level) const {
    if (level < 1) throw ContractError("wavelet level must be >= 1");
    if (max_iters_per_level.empty())
        throw ConfigError("max_iters_per_level must not be empty");
    const std::size_t idx =
        std::min<std::size_t>(static_cast<std::size_t>(level), max_iters_per_level.size()) - 1;
    const int iters = max_iters_per_level[idx];
    if (iters < 0) throw ConfigError("iteration caps must be non-negative");
    return iters;
}

double StyleTransferConfig::weight_for_tag(const std::string& tag) const {
    if (style_layer_weights.size() != style_tags.size())
        throw ContractError("style_layer_weights must have one entry per style tag");
    for (std::size_t i = 0; i < style_tags.size(); ++i)
        if (style_tags[i] == tag) return style_layer_weights[i];
    throw ContractError("'" + tag + "' is not a configured style tag");
}

namespace {

const Tensor3& map_at(const FeatureMaps& maps, const std::string& tag, const char* which) {
    auto it = maps.find(tag);
    if (it == maps.end())
        throw ContractError(std::string(which) + " feature maps have no entry for tag '" + tag +
                            "'");
    return it->second;
}

GramMatrix gram_of(const Tensor3& f) {
    const int n = f.channels;
    const int m = f.spatial();
    GramMatrix g;
    g.size = n;
    g.entries.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* fi = f.v.data() + static_cast<std::size_t>(i) * m;
        for (int j = i; j < n; ++j) {
            const double* fj = f.v.data() + static_cast<std::size_t>(j) * m;
            double acc = 0.0;
            for (int k = 0; k < m; ++k) acc += fi[k] * fj[k];
            g.entries[static_cast<std::size_t>(i) * n + j] = acc;
            g.entries[static_cast<std::size_t>(j) * n + i] = acc;
        }
    }
    return g;
}

}  // namespace

GramMatrix gram(const FeatureMaps& maps, const std::string& tag) {
    return gram_of(map_at(maps, tag, "requested"));
}

double content_loss(const FeatureMaps& fr, const FeatureMaps& fo, const std::string& tag) {
    const Tensor3& a = map_at(fr, tag, "generated");
    const Tensor3& b = map_at(fo, tag, "content");
    if (!a.same_shape(b))
        throw ContractError("content feature shapes differ at tag '" + tag + "'");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        const double d = a.v[i] - b.v[i];
        sum += d * d;
    }
    const double nm = static_cast<double>(a.channels) * a.spatial();
    return sum / (2.0 * std::sqrt(nm));
}

double style_layer_loss(const FeatureMaps& fr, const FeatureMaps& fp, const std::string& tag) {
    const Tensor3& a = map_at(fr, tag, "generated");
    const Tensor3& b = map_at(fp, tag, "style");
    if (!a.same_shape(b))
        throw ContractError("style feature shapes differ at tag '" + tag + "'");
    const GramMatrix ga = gram_of(a), gb = gram_of(b);
    double sum = 0.0;
    for (std::size_t i = 0; i < ga.entries.size(); ++i) {
        const double d = ga.entries[i] - gb.entries[i];
        sum += d * d;
    }
    const double n = a.channels, m = a.spatial();
    return sum / (4.0 * n * n * m * m);
}

double total_style_loss(const FeatureMaps& fr, const FeatureMaps& fp,
                        const StyleTransferConfig& cfg) {
    if (cfg.style_layer_weights.size() != cfg.style_tags.size())
        throw ContractError("style_layer_weights must have one entry per style tag");
    double total = 0.0;
    for (std::size_t i = 0; i < cfg.style_tags.size(); ++i)
        total += cfg.style_layer_weights[i] * style_layer_loss(fr, fp, cfg.style_tags[i]);
    return total;
}

namespace {

struct TermValues {
    double content = 0.0;
    double style = 0.0;
    double l1 = 0.0;
    double total = 0.0;
};

// Precomputed targets of one optimization run: content features at the
// content tag and style Gram matrices at every style tag. The generated
// plane is re-encoded each evaluation; the targets never change.
class Objective {
public:
    Objective(const ImagePlane& content, const ImagePlane& style, const FeatureNetwork& net,
              const StyleTransferConfig& cfg)
        : net_(net), cfg_(cfg), width_(content.width()), height_(content.height()) {
        if (cfg.style_layer_weights.size() != cfg.style_tags.size())
            throw ContractError("style_layer_weights must have one entry per style tag");
        if (!(cfg.alpha >= 0.0) || !(cfg.beta >= 0.0) || !(cfg.gamma >= 0.0))
            throw ConfigError("loss weights must be non-negative");

        tags_ = cfg.style_tags;
        if (std::find(tags_.begin(), tags_.end(), cfg.content_tag) == tags_.end())
            tags_.push_back(cfg.content_tag);

        content_maps_ = forward(net, replicate_plane(content, net.input_channels),
                                {cfg.content_tag});
        const FeatureMaps style_maps =
            forward(net, replicate_plane(style, net.input_channels), cfg.style_tags);
        for (const auto& tag : cfg.style_tags)
            style_grams_.emplace(tag, gram_of(map_at(style_maps, tag, "style")));
    }

    TermValues evaluate(const ImagePlane& x, ImagePlane* grad_out) const {
        const Tensor3 input = replicate_plane(x, net_.input_channels);
        const FeatureMaps fr = forward(net_, input, tags_);

        TermValues t;
        FeatureMaps cotangents;

        // content term
        {
            const Tensor3& a = map_at(fr, cfg_.content_tag, "generated");
            const Tensor3& b = map_at(content_maps_, cfg_.content_tag, "content");
            if (!a.same_shape(b))
                throw ContractError("content feature shapes differ at tag '" + cfg_.content_tag +
                                    "'");
            const double nm = static_cast<double>(a.channels) * a.spatial();
            const double root = std::sqrt(nm);
            double sum = 0.0;
            Tensor3 cot(a.channels, a.height, a.width);
            for (std::size_t i = 0; i < a.v.size(); ++i) {
                const double d = a.v[i] - b.v[i];
                sum += d * d;
                cot.v[i] = cfg_.alpha * d / root;
            }
            t.content = sum / (2.0 * root);
            if (grad_out && cfg_.alpha != 0.0) cotangents.emplace(cfg_.content_tag, std::move(cot));
        }

        // style term
        for (std::size_t li = 0; li < cfg_.style_tags.size(); ++li) {
            const std::string& tag = cfg_.style_tags[li];
            const double wl = cfg_.style_layer_weights[li];
            const Tensor3& a = map_at(fr, tag, "generated");
            const GramMatrix& gp = style_grams_.at(tag);
            if (a.channels != gp.size)
                throw ContractError("style feature shapes differ at tag '" + tag + "'");
            const GramMatrix gr = gram_of(a);
            const int n = a.channels, m = a.spatial();
            double sum = 0.0;
            for (std::size_t i = 0; i < gr.entries.size(); ++i) {
                const double d = gr.entries[i] - gp.entries[i];
                sum += d * d;
            }
            const double nn = static_cast<double>(n), mm = static_cast<double>(m);
            t.style += wl * sum / (4.0 * nn * nn * mm * mm);

            if (grad_out && cfg_.beta != 0.0 && wl != 0.0) {
                const double coef = cfg_.beta * wl / (nn * nn * mm * mm);
                Tensor3 cot(a.channels, a.height, a.width);
                for (int i = 0; i < n; ++i) {
                    double* ci = cot.v.data() + static_cast<std::size_t>(i) * m;
                    for (int j = 0; j < n; ++j) {
                        const double dij =
                            gr.entries[static_cast<std::size_t>(i) * n + j] -
                            gp.entries[static_cast<std::size_t>(i) * n + j];
                        if (dij == 0.0) continue;
                        const double* fj = a.v.data() + static_cast<std::size_t>(j) * m;
                        const double cdij = coef * dij;
                        for (int k = 0; k < m; ++k) ci[k] += cdij * fj[k];
                    }
                }
                auto it = cotangents.find(tag);
                if (it == cotangents.end())
                    cotangents.emplace(tag, std::move(cot));
                else
                    for (std::size_t k = 0; k < it->second.v.size(); ++k)
                        it->second.v[k] += cot.v[k];
            }
        }

        // l1 term
        for (double v : x.samples()) t.l1 += std::abs(v);
        t.total = cfg_.alpha * t.content + cfg_.beta * t.style + cfg_.gamma * t.l1;

        if (grad_out) {
            ImagePlane g(width_, height_, 0.0);
            if (!cotangents.empty()) {
                const Tensor3 din = backward(net_, input, cotangents);
                g = sum_channels(din);
            }
            if (cfg_.gamma != 0.0)
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double v = x.samples()[i];
                    if (v > 0.0)
                        g.samples()[i] += cfg_.gamma;
                    else if (v < 0.0)
                        g.samples()[i] -= cfg_.gamma;
                }
            *grad_out = std::move(g);
        }
        return t;
    }

    int width() const { return width_; }
    int height() const { return height_; }

private:
    const FeatureNetwork& net_;
    const StyleTransferConfig& cfg_;
    int width_;
    int height_;
    std::vector<std::string> tags_;
    FeatureMaps content_maps_;
    std::map<std::string, GramMatrix> style_grams_;
};

void check_triple(const ImagePlane& x, const ImagePlane& content, const ImagePlane& style) {
    if (!x.same_shape(content) || !x.same_shape(style))
        throw ContractError("plane sizes differ between generated, content and style inputs");
    require_finite(x, "generated plane");
    require_finite(content, "content plane");
    require_finite(style, "style plane");
}

}  // namespace

double total_loss(const ImagePlane& x, const ImagePlane& content, const ImagePlane& style,
                  const FeatureNetwork& net, const StyleTransferConfig& cfg) {
    check_triple(x, content, style);
    return Objective(content, style, net, cfg).evaluate(x, nullptr).total;
}

ImagePlane total_loss_gradient(const ImagePlane& x, const ImagePlane& content,
                               const ImagePlane& style, const FeatureNetwork& net,
                               const StyleTransferConfig& cfg) {
    check_triple(x, content, style);
    ImagePlane grad(x.width(), x.height());
    Objective(content, style, net, cfg).evaluate(x, &grad);
    return grad;
}

ImagePlane transfer_subband(const ImagePlane& content, const ImagePlane& style,
                            const FeatureNetwork& net, const StyleTransferConfig& cfg,
                            int level, TransferReport* report) {
    if (!content.same_shape(style))
        throw ContractError("content and style sub-bands differ in size");
    const int max_iters = cfg.iterations_for_level(level);

    const NormalizedSubband nc = normalize_subband(content);
    const NormalizedSubband ns = normalize_subband(style);
    const Objective objective(nc.plane, ns.plane, net, cfg);

    ImagePlane x0(content.width(), content.height());
    switch (cfg.init) {
        case TransferInit::content: x0 = nc.plane; break;
        case TransferInit::style: x0 = ns.plane; break;
        case TransferInit::average:
            for (std::size_t i = 0; i < x0.size(); ++i)
                x0.samples()[i] = 0.5 * (nc.plane.samples()[i] + ns.plane.samples()[i]);
            break;
    }

    // every evaluation's per-term values, so trace rows can be completed by
    // matching the optimizer's recorded objective values
    struct EvalTerms {
        double total;
        TermValues terms;
    };
    std::vector<EvalTerms> eval_log;

    LbfgsObjective fn = [&](const std::vector<double>& v, std::vector<double>& grad) {
        ImagePlane xp = ImagePlane::from_data(x0.width(), x0.height(), v);
        ImagePlane gp(x0.width(), x0.height());
        const TermValues t = objective.evaluate(xp, &gp);
        grad = gp.samples();
        eval_log.push_back({t.total, t});
        return t.total;
    };

    LbfgsOptions opt;
    opt.memory = cfg.lbfgs_memory;
    opt.max_iterations = max_iters;
    opt.grad_tol = cfg.grad_tol;
    const LbfgsResult res = lbfgs_minimize(fn, x0.samples(), opt);

    if (report) {
        report->iterations = res.iterations;
        report->final_loss = res.f;
        report->converged = res.converged;
        report->line_search_warning = res.line_search_failed;
        report->trace.clear();
        std::size_t cursor = 0;
        for (const auto& it : res.trace) {
            TransferIterationRecord rec;
            rec.iteration = it.iteration;
            rec.total = it.f;
            rec.grad_inf_norm = it.grad_inf_norm;
            rec.step = it.step;
            rec.line_search_ok = it.line_search_ok;
            for (std::size_t k = cursor; k < eval_log.size(); ++k) {
                if (eval_log[k].total == it.f) {
                    rec.content = eval_log[k].terms.content;
                    rec.style = eval_log[k].terms.style;
                    rec.l1 = eval_log[k].terms.l1;
                    cursor = k + 1;
                    break;
                }
            }
            report->trace.push_back(rec);
        }
    }

    NormalizedSubband out;
    out.lo = nc.lo;
    out.hi = nc.hi;
    out.plane = ImagePlane(content.width(), content.height());
    for (std::size_t i = 0; i < out.plane.size(); ++i)
        out.plane.samples()[i] = std::clamp(res.x[i], 0.0, 1.0);
    return denormalize_subband(out);
}

}  // namespace wdst
