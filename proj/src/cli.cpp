#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "wdst/pipeline.hpp"

namespace wdst {

namespace {

std::string sibling_path(const std::string& image_path, const std::string& suffix) {
    const std::filesystem::path p(image_path);
    return (p.parent_path() / p.stem()).string() + suffix;
}

std::set<std::string> parse_skip(const std::string& text) {
    std::set<std::string> skip;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::transform(item.begin(), item.end(), item.begin(),
                       [](unsigned char c) { return std::toupper(c); });
        if (item.empty()) continue;
        if (item != "LH" && item != "HL" && item != "HH")
            throw ConfigError("--skip expects a comma list of lh, hl, hh; got '" + item + "'");
        skip.insert(item);
    }
    return skip;
}

std::vector<double> parse_mu_list(const std::string& text) {
    std::vector<double> mus;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            mus.push_back(std::stod(item));
        } catch (const std::logic_error&) {
            throw ConfigError("--mu expects comma-separated numbers; got '" + item + "'");
        }
    }
    if (mus.empty()) throw ConfigError("--mu list is empty");
    return mus;
}

void apply_env_threads(FusionConfig& cfg) {
    const char* env = std::getenv("WDST_THREADS");
    if (!env || !*env) return;
    try {
        const int n = std::stoi(env);
        if (n < 1) throw std::invalid_argument("");
        cfg.threads = n;
    } catch (const std::logic_error&) {
        throw ConfigError(std::string("WDST_THREADS must be a positive integer, got '") + env +
                          "'");
    }
}

// Options shared by the image-processing subcommands; CLI flags override the
// config file, which overrides the built-in defaults.
struct CommonOpts {
    std::string config_path;
    std::string filter;
    int levels = 0;
    bool trace = false;
    int threads = 0;
    bool parallel = false;
    std::uint64_t seed = 0;
    bool seed_set = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--filter", filter, "wavelet family (haar, db2, db4, coif2, bior2.2, "
                                            "bior4.4, rbio2.2)");
        cmd->add_option("--levels", levels, "decomposition depth")->check(CLI::PositiveNumber);
        cmd->add_flag("--trace", trace, "record per-iteration optimizer traces in the report");
        cmd->add_option("--threads", threads, "worker threads for sub-band runs")
            ->check(CLI::PositiveNumber);
        cmd->add_flag("--parallel", parallel, "run sub-band optimizations concurrently");
        auto* s = cmd->add_option("--seed", seed, "seed for the random feature network");
        s->trigger_on_parse();  // remembers presence via callback below
        cmd->callback([this, s] { seed_set = seed_set || s->count() > 0; });
    }

    FusionConfig resolve() const {
        FusionConfig cfg =
            config_path.empty() ? FusionConfig{} : load_fusion_config(config_path);
        if (!filter.empty()) cfg.wavelet_name = filter;
        if (levels > 0) cfg.levels = levels;
        if (trace) cfg.record_trace = true;
        if (threads > 0) cfg.threads = threads;
        if (parallel) cfg.parallel_subbands = true;
        if (seed_set) {
            if (!cfg.features.is_random())
                throw ConfigError("--seed only applies to the seeded random feature network");
            cfg.features.seed = seed;
        }
        apply_env_threads(cfg);
        return cfg;
    }
};

void print_metric_rows(const std::vector<MetricRow>& rows) {
    for (const auto& row : rows)
        std::cout << "  " << row.name << ": psnr " << row.psnr_db << " dB, ssim "
                  << row.ssim_value << ", hist distance " << row.hist_distance << "\n";
}

void write_metric_jsonl(const std::vector<MetricRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (const auto& row : rows) {
        out << "{\"schema\":\"wdst-report/1\",\"record\":\"metric\",\"name\":\"" << row.name
            << "\",\"psnr_db\":" << row.psnr_db << ",\"ssim\":" << row.ssim_value
            << ",\"hist_distance\":" << row.hist_distance << "}\n";
    }
    if (!out) throw IoError("failed to write '" + path + "'");
}

// Periodic separable gaussian blur used to degrade the clean patches of the
// synthetic training task.
ImagePlane gaussian_blur(const ImagePlane& in, double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[static_cast<std::size_t>(k + radius)] = std::exp(-(k * k) / (2.0 * sigma * sigma));
        sum += kernel[static_cast<std::size_t>(k + radius)];
    }
    for (auto& v : kernel) v /= sum;

    const int w = in.width(), h = in.height();
    auto wrap = [](int a, int n) { return ((a % n) + n) % n; };
    ImagePlane mid(w, h), out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] * in.at(y, wrap(x + k, w));
            mid.at(y, x) = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] * mid.at(wrap(y + k, h), x);
            out.at(y, x) = acc;
        }
    return out;
}

int dispatch(const std::function<void()>& action) {
    try {
        action();
        return 0;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"wavelet-domain fusion of a distortion-optimized and a perception-optimized "
                 "super-resolved image"};
    app.require_subcommand(1);
    std::function<void()> action;

    // ---- fuse ----
    auto* fuse_cmd = app.add_subcommand(
        "fuse", "fuse two super-resolved images (content structure + style details)");
    struct {
        std::string content, style, gt, out;
        CommonOpts common;
    } fuse_opts;
    fuse_cmd->add_option("--content", fuse_opts.content, "distortion-optimized input (A_o)")
        ->required();
    fuse_cmd->add_option("--style", fuse_opts.style, "perception-optimized input (A_p)")
        ->required();
    fuse_cmd->add_option("--gt", fuse_opts.gt, "ground truth for the metric table");
    fuse_cmd->add_option("--out", fuse_opts.out, "output image path")->required();
    fuse_opts.common.attach(fuse_cmd);
    fuse_cmd->callback([&] {
        action = [&] {
            const FusionConfig cfg = fuse_opts.common.resolve();
            const ColorImage a_o = load_image(fuse_opts.content);
            const ColorImage a_p = load_image(fuse_opts.style);
            ColorImage gt;
            const bool has_gt = !fuse_opts.gt.empty();
            if (has_gt) gt = load_image(fuse_opts.gt);
            auto [result, report] = fuse(a_o, a_p, cfg, has_gt ? &gt : nullptr);
            save_image(result, fuse_opts.out);
            const std::string report_path = sibling_path(fuse_opts.out, ".report.jsonl");
            write_report_jsonl(report, report_path);
            std::cout << "wrote " << fuse_opts.out << " and " << report_path << "\n";
            std::cout << "  detail histogram distance to style: output "
                      << report.hist_output_vs_style << ", content "
                      << report.hist_content_vs_style << "\n";
            print_metric_rows(report.metrics);
        };
    });

    // ---- ablate ----
    auto* ablate_cmd =
        app.add_subcommand("ablate", "fuse with selected orientations passed through unchanged");
    struct {
        std::string content, style, gt, out, skip;
        CommonOpts common;
    } ablate_opts;
    ablate_cmd->add_option("--content", ablate_opts.content, "distortion-optimized input (A_o)")
        ->required();
    ablate_cmd->add_option("--style", ablate_opts.style, "perception-optimized input (A_p)")
        ->required();
    ablate_cmd->add_option("--gt", ablate_opts.gt, "ground truth for the metric table");
    ablate_cmd->add_option("--out", ablate_opts.out, "output image path")->required();
    ablate_cmd->add_option("--skip", ablate_opts.skip,
                           "comma list of orientations to pass through (lh,hl,hh)");
    ablate_opts.common.attach(ablate_cmd);
    ablate_cmd->callback([&] {
        action = [&] {
            const FusionConfig cfg = ablate_opts.common.resolve();
            const std::set<std::string> skip = parse_skip(ablate_opts.skip);
            const ColorImage a_o = load_image(ablate_opts.content);
            const ColorImage a_p = load_image(ablate_opts.style);
            ColorImage gt;
            const bool has_gt = !ablate_opts.gt.empty();
            if (has_gt) gt = load_image(ablate_opts.gt);
            auto [result, report] = ablation_fuse(a_o, a_p, cfg, skip, has_gt ? &gt : nullptr);
            save_image(result, ablate_opts.out);
            const std::string report_path = sibling_path(ablate_opts.out, ".report.jsonl");
            write_report_jsonl(report, report_path);
            std::cout << "wrote " << ablate_opts.out << " and " << report_path << "\n";
            print_metric_rows(report.metrics);
        };
    });

    // ---- substitute ----
    auto* subst_cmd = app.add_subcommand(
        "substitute", "swap low-frequency bands between the two inputs and measure all four "
                      "images against the ground truth");
    struct {
        std::string content, style, gt, out;
        CommonOpts common;
    } subst_opts;
    subst_cmd->add_option("--content", subst_opts.content, "distortion-optimized input (A_o)")
        ->required();
    subst_cmd->add_option("--style", subst_opts.style, "perception-optimized input (A_p)")
        ->required();
    subst_cmd->add_option("--gt", subst_opts.gt, "ground truth image")->required();
    subst_cmd->add_option("--out", subst_opts.out,
                          "output prefix (writes <prefix>_ap_tilde.png, <prefix>_ao_tilde.png, "
                          "<prefix>.report.jsonl)")
        ->required();
    subst_opts.common.attach(subst_cmd);
    subst_cmd->callback([&] {
        action = [&] {
            const FusionConfig cfg = subst_opts.common.resolve();
            const ColorImage a_o = load_image(subst_opts.content);
            const ColorImage a_p = load_image(subst_opts.style);
            const ColorImage a_gt = load_image(subst_opts.gt);
            const SubstitutionReport rep = substitution_experiment(a_o, a_p, a_gt, cfg);
            save_image(rep.a_p_tilde, subst_opts.out + "_ap_tilde.png");
            save_image(rep.a_o_tilde, subst_opts.out + "_ao_tilde.png");
            write_metric_jsonl(rep.rows, subst_opts.out + ".report.jsonl");
            std::cout << "low-frequency substitution vs " << subst_opts.gt << ":\n";
            print_metric_rows(rep.rows);
        };
    });

    // ---- pd-curve ----
    auto* pd_cmd = app.add_subcommand(
        "pd-curve", "sweep the pixel-interpolation weight and tabulate distortion vs the "
                    "detail-histogram proxy");
    struct {
        std::string content, style, gt, out;
        std::string mu = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
        CommonOpts common;
    } pd_opts;
    pd_cmd->add_option("--content", pd_opts.content, "distortion-optimized input (A_o)")
        ->required();
    pd_cmd->add_option("--style", pd_opts.style, "perception-optimized input (A_p)")->required();
    pd_cmd->add_option("--gt", pd_opts.gt, "ground truth image")->required();
    pd_cmd->add_option("--out", pd_opts.out, "output CSV path")->required();
    pd_cmd->add_option("--mu", pd_opts.mu, "comma list of interpolation weights in [0,1]");
    pd_opts.common.attach(pd_cmd);
    pd_cmd->callback([&] {
        action = [&] {
            const FusionConfig cfg = pd_opts.common.resolve();
            const ColorImage a_o = load_image(pd_opts.content);
            const ColorImage a_p = load_image(pd_opts.style);
            const ColorImage a_gt = load_image(pd_opts.gt);
            const auto rows = pd_curve(a_o, a_p, a_gt, parse_mu_list(pd_opts.mu), cfg);
            write_pd_curve_csv(rows, pd_opts.out);
            std::cout << "wrote " << rows.size() << " rows to " << pd_opts.out << "\n";
        };
    });

    // ---- lse-train ----
    auto* train_cmd = app.add_subcommand(
        "lse-train", "train the low-frequency enhancement network on synthetic blur pairs cut "
                     "from the given images");
    struct {
        std::vector<std::string> images;
        std::string out, history;
        int patch = 32, count = 200, epochs = 10, batch = 64;
        double lr = 0.01, momentum = 0.9, sigma = 1.0;
        std::uint64_t seed = 0;
        CommonOpts common;
    } train_opts;
    train_cmd->add_option("--images", train_opts.images, "clean source images")
        ->required()
        ->expected(-1);
    train_cmd->add_option("--out", train_opts.out, "output weight file")->required();
    train_cmd->add_option("--loss-history", train_opts.history,
                          "loss history text file (default: <out>.loss.txt)");
    train_cmd->add_option("--patch", train_opts.patch, "patch side length")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--count", train_opts.count, "number of training patches")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--epochs", train_opts.epochs, "training epochs")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch", train_opts.batch, "mini-batch size")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", train_opts.lr, "learning rate");
    train_cmd->add_option("--momentum", train_opts.momentum, "momentum coefficient");
    train_cmd->add_option("--sigma", train_opts.sigma, "gaussian blur sigma for degradation");
    train_cmd->add_option("--train-seed", train_opts.seed, "patch sampling / shuffle seed");
    train_opts.common.attach(train_cmd);
    train_cmd->callback([&] {
        action = [&] {
            const FusionConfig cfg = train_opts.common.resolve();
            const WaveletFilterPair filter = make_filter_pair(cfg.wavelet_name);

            std::vector<ImagePlane> planes;
            for (const auto& path : train_opts.images) {
                const ImagePlane y = metric_plane(load_image(path), cfg.metrics);
                if (y.width() < train_opts.patch || y.height() < train_opts.patch)
                    throw ConfigError("image '" + path + "' is smaller than the patch size");
                planes.push_back(y);
            }

            std::mt19937_64 gen(train_opts.seed);
            std::vector<LsePair> dataset;
            for (int i = 0; i < train_opts.count; ++i) {
                const ImagePlane& src = planes[gen() % planes.size()];
                const int x0 = static_cast<int>(gen() % (src.width() - train_opts.patch + 1));
                const int y0 = static_cast<int>(gen() % (src.height() - train_opts.patch + 1));
                ImagePlane clean(train_opts.patch, train_opts.patch);
                for (int y = 0; y < train_opts.patch; ++y)
                    for (int x = 0; x < train_opts.patch; ++x)
                        clean.at(y, x) = src.at(y0 + y, x0 + x);
                const ImagePlane blurred = gaussian_blur(clean, train_opts.sigma);
                dataset.emplace_back(swt2(blurred, filter, cfg.levels).ll,
                                     swt2(clean, filter, cfg.levels).ll);
            }

            TrainConfig tc;
            tc.batch_size = train_opts.batch;
            tc.learning_rate = train_opts.lr;
            tc.momentum = train_opts.momentum;
            tc.epochs = train_opts.epochs;
            tc.seed = train_opts.seed;
            const TrainResult tr = lse_train(random_lse_network(train_opts.seed), dataset, tc);

            save_lse_weights(tr.net, train_opts.out);
            const std::string history = train_opts.history.empty()
                                            ? train_opts.out + ".loss.txt"
                                            : train_opts.history;
            write_loss_history(tr.epoch_loss, history);
            std::cout << "trained on " << dataset.size() << " pairs; mean loss "
                      << tr.epoch_loss.front() << " -> " << tr.epoch_loss.back() << "\n";
            std::cout << "wrote " << train_opts.out << " and " << history << "\n";
        };
    });

    // ---- swt-dump ----
    auto* dump_cmd = app.add_subcommand(
        "swt-dump", "decompose one image and write each sub-band as a scaled PGM");
    struct {
        std::string in, out;
        std::string channel = "y";
        CommonOpts common;
    } dump_opts;
    dump_cmd->add_option("--in", dump_opts.in, "input image")->required();
    dump_cmd->add_option("--out", dump_opts.out, "output directory")->required();
    dump_cmd->add_option("--channel", dump_opts.channel, "plane to decompose: y, r, g or b");
    dump_opts.common.attach(dump_cmd);
    dump_cmd->callback([&] {
        action = [&] {
            const FusionConfig cfg = dump_opts.common.resolve();
            const ColorImage img = load_image(dump_opts.in);
            ImagePlane plane;
            if (dump_opts.channel == "y")
                plane = rgb_to_ycbcr(img).planes[0];
            else if (dump_opts.channel == "r")
                plane = img.planes[0];
            else if (dump_opts.channel == "g")
                plane = img.planes[1];
            else if (dump_opts.channel == "b")
                plane = img.planes[2];
            else
                throw ConfigError("--channel must be y, r, g or b, got '" + dump_opts.channel +
                                  "'");
            std::filesystem::create_directories(dump_opts.out);
            const SubbandPyramid pyr =
                swt2(plane, make_filter_pair(cfg.wavelet_name), cfg.levels);
            dump_pyramid(pyr, dump_opts.out);
            std::cout << "wrote " << (3 * cfg.levels + 1) << " sub-band images and scales.txt to "
                      << dump_opts.out << "\n";
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    return dispatch(action);
}

}  // namespace wdst
