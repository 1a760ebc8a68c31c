#include "wdst/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace wdst {

namespace {

using ordered_json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

FeatureSource parse_feature_source(const std::string& text) {
    FeatureSource src;
    if (text.empty() || text == "random") return src;
    if (text.rfind("random:", 0) != 0) {
        src.path = text;
        return src;
    }
    std::stringstream params(text.substr(7));
    std::string item;
    while (std::getline(params, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("feature spec '" + text + "': expected key=value, got '" + item +
                              "'");
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        try {
            if (key == "seed")
                src.seed = std::stoull(value);
            else if (key == "scale")
                src.scale = std::stod(value);
            else
                throw ConfigError("feature spec '" + text + "': unknown key '" + key + "'");
        } catch (const std::logic_error&) {
            throw ConfigError("feature spec '" + text + "': bad value for '" + key + "'");
        }
    }
    if (!(src.scale > 0.0)) throw ConfigError("feature spec scale must be positive");
    return src;
}

// ---------------------------------------------------------------------------
// Config file
// ---------------------------------------------------------------------------

namespace {

void reject_unknown_keys(const ordered_json& obj, const std::vector<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
}

TransferInit parse_init(const std::string& s) {
    if (s == "content") return TransferInit::content;
    if (s == "style") return TransferInit::style;
    if (s == "average") return TransferInit::average;
    throw ConfigError("config: init must be content, style or average, got '" + s + "'");
}

const char* init_name(TransferInit init) {
    switch (init) {
        case TransferInit::content: return "content";
        case TransferInit::style: return "style";
        case TransferInit::average: return "average";
    }
    return "content";
}

void apply_wdst_json(const ordered_json& j, StyleTransferConfig& w) {
    reject_unknown_keys(j,
                        {"alpha", "beta", "gamma", "content_tag", "style_tags",
                         "style_layer_weights", "max_iters_per_level", "grad_tol",
                         "lbfgs_memory", "init"},
                        "wdst");
    try {
        if (j.contains("alpha")) w.alpha = j.at("alpha").get<double>();
        if (j.contains("beta")) w.beta = j.at("beta").get<double>();
        if (j.contains("gamma")) w.gamma = j.at("gamma").get<double>();
        if (j.contains("content_tag")) w.content_tag = j.at("content_tag").get<std::string>();
        if (j.contains("style_tags"))
            w.style_tags = j.at("style_tags").get<std::vector<std::string>>();
        if (j.contains("style_layer_weights"))
            w.style_layer_weights = j.at("style_layer_weights").get<std::vector<double>>();
        if (j.contains("max_iters_per_level"))
            w.max_iters_per_level = j.at("max_iters_per_level").get<std::vector<int>>();
        if (j.contains("grad_tol")) w.grad_tol = j.at("grad_tol").get<double>();
        if (j.contains("lbfgs_memory")) w.lbfgs_memory = j.at("lbfgs_memory").get<int>();
        if (j.contains("init")) w.init = parse_init(j.at("init").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: bad wdst value: ") + e.what());
    }
    if (w.style_layer_weights.size() != w.style_tags.size())
        throw ConfigError("config: style_layer_weights must pair up with style_tags");
}

}  // namespace

FusionConfig load_fusion_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config '" + path + "': top level must be an object");

    FusionConfig cfg;
    reject_unknown_keys(j,
                        {"wavelet", "levels", "wdst", "lse_weights", "features", "channel_mode",
                         "parallel_subbands", "threads", "record_trace", "metrics"},
                        "the top level");
    try {
        if (j.contains("wavelet")) cfg.wavelet_name = j.at("wavelet").get<std::string>();
        if (j.contains("levels")) cfg.levels = j.at("levels").get<int>();
        if (j.contains("wdst")) apply_wdst_json(j.at("wdst"), cfg.wdst);
        if (j.contains("lse_weights")) cfg.lse_weights = j.at("lse_weights").get<std::string>();
        if (j.contains("features"))
            cfg.features = parse_feature_source(j.at("features").get<std::string>());
        if (j.contains("channel_mode")) {
            const std::string mode = j.at("channel_mode").get<std::string>();
            if (mode == "luma")
                cfg.channel_mode = ChannelMode::luma;
            else if (mode == "rgb")
                cfg.channel_mode = ChannelMode::rgb;
            else
                throw ConfigError("config: channel_mode must be luma or rgb, got '" + mode + "'");
        }
        if (j.contains("parallel_subbands"))
            cfg.parallel_subbands = j.at("parallel_subbands").get<bool>();
        if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
        if (j.contains("record_trace")) cfg.record_trace = j.at("record_trace").get<bool>();
        if (j.contains("metrics")) {
            const auto& m = j.at("metrics");
            reject_unknown_keys(m, {"channel", "hist_bins", "hist_lo", "hist_hi"}, "metrics");
            if (m.contains("channel")) cfg.metrics.channel = m.at("channel").get<std::string>();
            if (m.contains("hist_bins")) cfg.metrics.hist_bins = m.at("hist_bins").get<int>();
            if (m.contains("hist_lo")) cfg.metrics.hist_lo = m.at("hist_lo").get<double>();
            if (m.contains("hist_hi")) cfg.metrics.hist_hi = m.at("hist_hi").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    if (cfg.levels < 1) throw ConfigError("config: levels must be >= 1");
    if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");
    if (cfg.metrics.channel != "y" && cfg.metrics.channel != "rgb")
        throw ConfigError("config: metrics.channel must be y or rgb");
    return cfg;
}

std::string fusion_config_to_json(const FusionConfig& cfg) {
    ordered_json w;
    w["alpha"] = cfg.wdst.alpha;
    w["beta"] = cfg.wdst.beta;
    w["gamma"] = cfg.wdst.gamma;
    w["content_tag"] = cfg.wdst.content_tag;
    w["style_tags"] = cfg.wdst.style_tags;
    w["style_layer_weights"] = cfg.wdst.style_layer_weights;
    w["max_iters_per_level"] = cfg.wdst.max_iters_per_level;
    w["grad_tol"] = cfg.wdst.grad_tol;
    w["lbfgs_memory"] = cfg.wdst.lbfgs_memory;
    w["init"] = init_name(cfg.wdst.init);

    ordered_json j;
    j["wavelet"] = cfg.wavelet_name;
    j["levels"] = cfg.levels;
    j["wdst"] = std::move(w);
    j["lse_weights"] = cfg.lse_weights;
    j["features"] = cfg.features.is_random()
                        ? "random:seed=" + std::to_string(cfg.features.seed) +
                              ",scale=" + std::to_string(cfg.features.scale)
                        : cfg.features.path;
    j["channel_mode"] = (cfg.channel_mode == ChannelMode::luma) ? "luma" : "rgb";
    j["parallel_subbands"] = cfg.parallel_subbands;
    j["threads"] = cfg.threads;
    j["record_trace"] = cfg.record_trace;
    j["metrics"] = {{"channel", cfg.metrics.channel},
                    {"hist_bins", cfg.metrics.hist_bins},
                    {"hist_lo", cfg.metrics.hist_lo},
                    {"hist_hi", cfg.metrics.hist_hi}};
    return j.dump();
}

// ---------------------------------------------------------------------------
// Metric helpers
// ---------------------------------------------------------------------------

ImagePlane metric_plane(const ColorImage& image, const MetricsOptions& opt) {
    if (opt.channel == "y") {
        if (image.space == ColorSpace::ycbcr) return image.planes[0];
        return rgb_to_ycbcr(image).planes[0];
    }
    if (opt.channel == "rgb") {
        const ColorImage& rgb =
            (image.space == ColorSpace::rgb) ? image : ycbcr_to_rgb(image);
        ImagePlane mean(rgb.width(), rgb.height());
        for (std::size_t i = 0; i < mean.size(); ++i)
            mean.samples()[i] = (rgb.planes[0].samples()[i] + rgb.planes[1].samples()[i] +
                                 rgb.planes[2].samples()[i]) /
                                3.0;
        return mean;
    }
    throw ConfigError("metric channel must be y or rgb, got '" + opt.channel + "'");
}

Histogram detail_histogram(const ImagePlane& plane, const WaveletFilterPair& filter, int levels,
                           int bins, double lo, double hi) {
    const SubbandPyramid pyr = swt2(plane, filter, levels);
    Histogram pooled = subband_histogram(pyr.details[0].lh, bins, lo, hi);
    auto add = [&pooled, bins, lo, hi](const ImagePlane& band) {
        const Histogram h = subband_histogram(band, bins, lo, hi);
        for (std::size_t i = 0; i < pooled.counts.size(); ++i) pooled.counts[i] += h.counts[i];
        pooled.total += h.total;
    };
    for (int level = 0; level < levels; ++level) {
        const auto& t = pyr.details[static_cast<std::size_t>(level)];
        if (level > 0) add(t.lh);
        add(t.hl);
        add(t.hh);
    }
    return pooled;
}

namespace {

MetricRow metric_row(const std::string& name, const ColorImage& img, const ColorImage& gt,
                     const FusionConfig& cfg, const WaveletFilterPair& filter) {
    const ImagePlane p = metric_plane(img, cfg.metrics);
    const ImagePlane g = metric_plane(gt, cfg.metrics);
    MetricRow row;
    row.name = name;
    row.psnr_db = psnr(p, g, 1.0);
    row.ssim_value = ssim(p, g);
    row.hist_distance = histogram_distance(
        detail_histogram(p, filter, cfg.levels, cfg.metrics.hist_bins, cfg.metrics.hist_lo,
                         cfg.metrics.hist_hi),
        detail_histogram(g, filter, cfg.levels, cfg.metrics.hist_bins, cfg.metrics.hist_lo,
                         cfg.metrics.hist_hi));
    return row;
}

void require_same_size(const ColorImage& a, const ColorImage& b, const std::string& what) {
    if (a.width() != b.width() || a.height() != b.height())
        throw ContractError(what + " differ in size: " + std::to_string(a.width()) + "x" +
                            std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                            "x" + std::to_string(b.height()));
}

void require_readable(const std::string& path, const std::string& what) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw ConfigError(what + " file '" + path + "' is not readable");
}

struct SubbandTask {
    std::string channel;
    int level = 1;
    std::string band;
    const ImagePlane* content = nullptr;
    const ImagePlane* style = nullptr;
    bool skip = false;
    ImagePlane result;
    SubbandRunRecord record;
};

void run_task(SubbandTask& task, const FeatureNetwork& net, const FusionConfig& cfg) {
    const auto start = Clock::now();
    task.record.channel = task.channel;
    task.record.level = task.level;
    task.record.band = task.band;
    task.record.skipped = task.skip;
    if (task.skip) {
        task.result = *task.content;
    } else {
        task.result = transfer_subband(*task.content, *task.style, net, cfg.wdst, task.level,
                                       &task.record.report);
        if (!cfg.record_trace) task.record.report.trace.clear();
    }
    task.record.seconds = seconds_since(start);
}

std::pair<ColorImage, FusionReport> fuse_impl(const ColorImage& a_o, const ColorImage& a_p,
                                              const FusionConfig& cfg,
                                              const std::set<std::string>& skip,
                                              const ColorImage* gt) {
    require_same_size(a_o, a_p, "fusion inputs");
    if (gt) require_same_size(a_o, *gt, "input and ground truth");
    if (a_o.space != ColorSpace::rgb || a_p.space != ColorSpace::rgb)
        throw ContractError("fuse expects RGB inputs");
    for (const auto& band : skip)
        if (band != "LH" && band != "HL" && band != "HH")
            throw ContractError("unknown sub-band orientation '" + band +
                                "' (expected LH, HL or HH)");

    // fail on configuration problems before any optimization starts
    const WaveletFilterPair filter = make_filter_pair(cfg.wavelet_name);
    if (cfg.levels < 1) throw ConfigError("levels must be >= 1");
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    if (!cfg.features.is_random()) require_readable(cfg.features.path, "feature weights");
    if (!cfg.lse_weights.empty()) require_readable(cfg.lse_weights, "enhancement weights");

    const FeatureNetwork net =
        cfg.features.is_random()
            ? random_network(cfg.features.seed, cfg.features.scale)
            : load_weights(cfg.features.path);
    LseNetwork lse;
    const bool use_lse = !cfg.lse_weights.empty();
    if (use_lse) lse = load_lse_weights(cfg.lse_weights);

    FusionReport report;
    report.config_echo = fusion_config_to_json(cfg);
    report.trace_enabled = cfg.record_trace;
    report.lse_applied = use_lse;
    report.lse_note = use_lse ? "low-frequency band enhanced with '" + cfg.lse_weights + "'"
                              : "no enhancement weights configured; low-frequency band passed "
                                "through";

    const bool luma = (cfg.channel_mode == ChannelMode::luma);
    const ColorImage o_ycbcr = luma ? rgb_to_ycbcr(a_o) : ColorImage{};
    const ColorImage p_ycbcr = luma ? rgb_to_ycbcr(a_p) : ColorImage{};

    std::vector<std::string> channel_names;
    std::vector<const ImagePlane*> o_channels, p_channels;
    if (luma) {
        channel_names = {"y"};
        o_channels = {&o_ycbcr.planes[0]};
        p_channels = {&p_ycbcr.planes[0]};
    } else {
        channel_names = {"r", "g", "b"};
        for (int c = 0; c < 3; ++c) {
            o_channels.push_back(&a_o.planes[static_cast<std::size_t>(c)]);
            p_channels.push_back(&a_p.planes[static_cast<std::size_t>(c)]);
        }
    }

    // analysis
    auto t_swt = Clock::now();
    std::vector<SubbandPyramid> o_pyrs, p_pyrs;
    for (std::size_t c = 0; c < channel_names.size(); ++c) {
        o_pyrs.push_back(swt2(*o_channels[c], filter, cfg.levels));
        p_pyrs.push_back(swt2(*p_channels[c], filter, cfg.levels));
    }
    report.timings.push_back({"swt", seconds_since(t_swt)});

    // low-frequency band
    auto t_lse = Clock::now();
    std::vector<ImagePlane> ll_r;
    for (auto& pyr : o_pyrs)
        ll_r.push_back(use_lse ? lse_forward(lse, pyr.ll) : pyr.ll);
    report.timings.push_back({"lse", seconds_since(t_lse)});

    // high-frequency bands
    auto t_wdst = Clock::now();
    std::vector<SubbandTask> tasks;
    for (std::size_t c = 0; c < channel_names.size(); ++c)
        for (int level = 1; level <= cfg.levels; ++level) {
            const auto& ot = o_pyrs[c].details[static_cast<std::size_t>(level - 1)];
            const auto& pt = p_pyrs[c].details[static_cast<std::size_t>(level - 1)];
            const std::pair<const char*, std::pair<const ImagePlane*, const ImagePlane*>>
                bands[3] = {{"LH", {&ot.lh, &pt.lh}},
                            {"HL", {&ot.hl, &pt.hl}},
                            {"HH", {&ot.hh, &pt.hh}}};
            for (const auto& [name, planes] : bands) {
                SubbandTask task;
                task.channel = channel_names[c];
                task.level = level;
                task.band = name;
                task.content = planes.first;
                task.style = planes.second;
                task.skip = skip.count(name) > 0;
                tasks.push_back(std::move(task));
            }
        }

    const int workers =
        cfg.parallel_subbands ? std::min<int>(cfg.threads, static_cast<int>(tasks.size())) : 1;
    if (workers > 1) {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
                    run_task(tasks[i], net, cfg);
            });
        for (auto& th : pool) th.join();
    } else {
        for (auto& task : tasks) run_task(task, net, cfg);
    }
    report.timings.push_back({"wdst", seconds_since(t_wdst)});
    for (const auto& task : tasks)
        if (!task.skip) report.subbands.push_back(task.record);

    // synthesis
    auto t_iswt = Clock::now();
    ColorImage result = a_o;  // chroma (and untouched channels) from the content image
    std::size_t task_cursor = 0;
    for (std::size_t c = 0; c < channel_names.size(); ++c) {
        SubbandPyramid fused = o_pyrs[c];
        fused.ll = ll_r[c];
        for (int level = 1; level <= cfg.levels; ++level) {
            auto& t = fused.details[static_cast<std::size_t>(level - 1)];
            t.lh = std::move(tasks[task_cursor++].result);
            t.hl = std::move(tasks[task_cursor++].result);
            t.hh = std::move(tasks[task_cursor++].result);
        }
        const ImagePlane recon = iswt2(fused);
        if (luma) {
            ColorImage ycbcr = o_ycbcr;
            ycbcr.planes[0] = recon;
            result = ycbcr_to_rgb(ycbcr);
        } else {
            result.planes[c] = recon;
        }
    }
    report.timings.push_back({"iswt", seconds_since(t_iswt)});

    // measurement
    const ImagePlane mp_r = metric_plane(result, cfg.metrics);
    const ImagePlane mp_o = metric_plane(a_o, cfg.metrics);
    const ImagePlane mp_p = metric_plane(a_p, cfg.metrics);
    const Histogram h_r = detail_histogram(mp_r, filter, cfg.levels, cfg.metrics.hist_bins,
                                           cfg.metrics.hist_lo, cfg.metrics.hist_hi);
    const Histogram h_o = detail_histogram(mp_o, filter, cfg.levels, cfg.metrics.hist_bins,
                                           cfg.metrics.hist_lo, cfg.metrics.hist_hi);
    const Histogram h_p = detail_histogram(mp_p, filter, cfg.levels, cfg.metrics.hist_bins,
                                           cfg.metrics.hist_lo, cfg.metrics.hist_hi);
    report.hist_output_vs_style = histogram_distance(h_r, h_p);
    report.hist_content_vs_style = histogram_distance(h_o, h_p);
    if (gt) {
        report.metrics.push_back(metric_row("A_o", a_o, *gt, cfg, filter));
        report.metrics.push_back(metric_row("A_p", a_p, *gt, cfg, filter));
        report.metrics.push_back(metric_row("A_r", result, *gt, cfg, filter));
    }
    return {std::move(result), std::move(report)};
}

}  // namespace

std::pair<ColorImage, FusionReport> fuse(const ColorImage& a_o, const ColorImage& a_p,
                                         const FusionConfig& cfg, const ColorImage* gt) {
    return fuse_impl(a_o, a_p, cfg, {}, gt);
}

std::pair<ColorImage, FusionReport> ablation_fuse(const ColorImage& a_o, const ColorImage& a_p,
                                                  const FusionConfig& cfg,
                                                  const std::set<std::string>& skip,
                                                  const ColorImage* gt) {
    return fuse_impl(a_o, a_p, cfg, skip, gt);
}

SubstitutionReport substitution_experiment(const ColorImage& a_o, const ColorImage& a_p,
                                           const ColorImage& a_gt, const FusionConfig& cfg) {
    require_same_size(a_o, a_p, "substitution inputs");
    require_same_size(a_o, a_gt, "input and ground truth");
    if (a_o.space != ColorSpace::rgb || a_p.space != ColorSpace::rgb ||
        a_gt.space != ColorSpace::rgb)
        throw ContractError("substitution_experiment expects RGB inputs");
    const WaveletFilterPair filter = make_filter_pair(cfg.wavelet_name);

    const bool luma = (cfg.channel_mode == ChannelMode::luma);
    SubstitutionReport rep;
    if (luma) {
        const ColorImage o_ycbcr = rgb_to_ycbcr(a_o);
        const ColorImage p_ycbcr = rgb_to_ycbcr(a_p);
        const SubbandPyramid o_pyr = swt2(o_ycbcr.planes[0], filter, cfg.levels);
        const SubbandPyramid p_pyr = swt2(p_ycbcr.planes[0], filter, cfg.levels);

        ColorImage pt = p_ycbcr;
        pt.planes[0] = iswt2(replace_ll(p_pyr, o_pyr.ll));
        rep.a_p_tilde = ycbcr_to_rgb(pt);

        ColorImage ot = o_ycbcr;
        ot.planes[0] = iswt2(replace_ll(o_pyr, p_pyr.ll));
        rep.a_o_tilde = ycbcr_to_rgb(ot);
    } else {
        rep.a_p_tilde = a_p;
        rep.a_o_tilde = a_o;
        for (int c = 0; c < 3; ++c) {
            const SubbandPyramid o_pyr = swt2(a_o.planes[static_cast<std::size_t>(c)], filter,
                                              cfg.levels);
            const SubbandPyramid p_pyr = swt2(a_p.planes[static_cast<std::size_t>(c)], filter,
                                              cfg.levels);
            rep.a_p_tilde.planes[static_cast<std::size_t>(c)] =
                iswt2(replace_ll(p_pyr, o_pyr.ll));
            rep.a_o_tilde.planes[static_cast<std::size_t>(c)] =
                iswt2(replace_ll(o_pyr, p_pyr.ll));
        }
    }

    rep.rows.push_back(metric_row("A_p", a_p, a_gt, cfg, filter));
    rep.rows.push_back(metric_row("~A_p", rep.a_p_tilde, a_gt, cfg, filter));
    rep.rows.push_back(metric_row("A_o", a_o, a_gt, cfg, filter));
    rep.rows.push_back(metric_row("~A_o", rep.a_o_tilde, a_gt, cfg, filter));
    return rep;
}

ColorImage pd_interpolate(const ColorImage& a_o, const ColorImage& a_p, double mu) {
    require_same_size(a_o, a_p, "interpolation inputs");
    if (a_o.space != a_p.space)
        throw ContractError("interpolation inputs use different color spaces");
    if (!(mu >= 0.0 && mu <= 1.0))
        throw ContractError("mu must lie in [0, 1], got " + std::to_string(mu));
    ColorImage out = a_o;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < out.planes[static_cast<std::size_t>(c)].size(); ++i)
            out.planes[static_cast<std::size_t>(c)].samples()[i] =
                mu * a_p.planes[static_cast<std::size_t>(c)].samples()[i] +
                (1.0 - mu) * a_o.planes[static_cast<std::size_t>(c)].samples()[i];
    return out;
}

std::vector<PdRow> pd_curve(const ColorImage& a_o, const ColorImage& a_p, const ColorImage& a_gt,
                            const std::vector<double>& mu_list, const FusionConfig& cfg) {
    require_same_size(a_o, a_gt, "input and ground truth");
    const WaveletFilterPair filter = make_filter_pair(cfg.wavelet_name);
    const ImagePlane gt_plane = metric_plane(a_gt, cfg.metrics);
    const Histogram gt_hist = detail_histogram(gt_plane, filter, cfg.levels,
                                               cfg.metrics.hist_bins, cfg.metrics.hist_lo,
                                               cfg.metrics.hist_hi);
    std::vector<PdRow> rows;
    for (double mu : mu_list) {
        const ColorImage mix = pd_interpolate(a_o, a_p, mu);
        const ImagePlane p = metric_plane(mix, cfg.metrics);
        PdRow row;
        row.mu = mu;
        row.psnr_db = psnr(p, gt_plane, 1.0);
        row.hist_distance = histogram_distance(
            detail_histogram(p, filter, cfg.levels, cfg.metrics.hist_bins, cfg.metrics.hist_lo,
                             cfg.metrics.hist_hi),
            gt_hist);
        rows.push_back(row);
    }
    return rows;
}

void write_pd_curve_csv(const std::vector<PdRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.precision(17);
    out << "mu,psnr_db,hist_distance\n";
    for (const auto& r : rows) out << r.mu << "," << r.psnr_db << "," << r.hist_distance << "\n";
    if (!out) throw IoError("failed to write '" + path + "'");
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

void write_report_jsonl(const FusionReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    ordered_json config_line;
    config_line["schema"] = "wdst-report/1";
    config_line["record"] = "config";
    config_line["config"] = ordered_json::parse(report.config_echo);
    out << config_line.dump() << "\n";

    ordered_json lse_line;
    lse_line["schema"] = "wdst-report/1";
    lse_line["record"] = "lse";
    lse_line["applied"] = report.lse_applied;
    lse_line["note"] = report.lse_note;
    out << lse_line.dump() << "\n";

    for (const auto& s : report.subbands) {
        ordered_json line;
        line["schema"] = "wdst-report/1";
        line["record"] = "subband";
        line["channel"] = s.channel;
        line["level"] = s.level;
        line["band"] = s.band;
        line["skipped"] = s.skipped;
        line["iterations"] = s.report.iterations;
        line["final_loss"] = s.report.final_loss;
        line["converged"] = s.report.converged;
        line["line_search_warning"] = s.report.line_search_warning;
        line["seconds"] = s.seconds;
        if (!s.report.trace.empty()) {
            ordered_json trace = ordered_json::array();
            for (const auto& t : s.report.trace)
                trace.push_back({{"iteration", t.iteration},
                                 {"total", t.total},
                                 {"content", t.content},
                                 {"style", t.style},
                                 {"l1", t.l1},
                                 {"grad_inf_norm", t.grad_inf_norm},
                                 {"step", t.step},
                                 {"line_search_ok", t.line_search_ok}});
            line["trace"] = std::move(trace);
        }
        out << line.dump() << "\n";
    }

    for (const auto& m : report.metrics) {
        ordered_json line;
        line["schema"] = "wdst-report/1";
        line["record"] = "metric";
        line["name"] = m.name;
        line["psnr_db"] = m.psnr_db;
        line["ssim"] = m.ssim_value;
        line["hist_distance"] = m.hist_distance;
        out << line.dump() << "\n";
    }

    ordered_json hist_line;
    hist_line["schema"] = "wdst-report/1";
    hist_line["record"] = "style_proximity";
    hist_line["hist_output_vs_style"] = report.hist_output_vs_style;
    hist_line["hist_content_vs_style"] = report.hist_content_vs_style;
    out << hist_line.dump() << "\n";

    for (const auto& t : report.timings) {
        ordered_json line;
        line["schema"] = "wdst-report/1";
        line["record"] = "timing";
        line["stage"] = t.stage;
        line["seconds"] = t.seconds;
        out << line.dump() << "\n";
    }
    if (!out) throw IoError("failed to write '" + path + "'");
}

}  // namespace wdst
