// udae: hyperspectral band reduction with stacked denoising autoencoders.
//
//   udae synth    --classes 3 --per-class 100 --bands 16 --latent 4 --out-dir data
//   udae reduce   --cube data/cube.raw --gt data/gt.csv --k 4 --segments 2 --out-dir run
//   udae evaluate --out-dir run --knn-k 5
//   udae compare  --cube data/cube.raw --gt data/gt.csv --k 4 --out-dir run

#include <cstdio>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "udae/error.hpp"
#include "udae/experiment.hpp"

namespace {

using udae::ExperimentConfig;

struct Flags {
    ExperimentConfig config;
    std::string config_file;
    std::string loss = "squared";
    std::string mode = "batch";
    std::string corruption = "masking";
    std::string cube, header, gt, features, out_dir = "out";
};

// Flags shared by every subcommand. Returns the options so the caller can see
// which ones were given explicitly.
std::vector<CLI::Option*> add_common(CLI::App* app, Flags& f) {
    auto& c = f.config;
    return {
        app->add_option("--config", f.config_file, "JSON file with flag-named keys; flags override it"),
        app->add_option("--seed", c.seed, "Master seed for training, splitting and synthesis"),
        app->add_option("--out-dir", f.out_dir, "Output directory"),
        app->add_option("--method", c.method, "udae or pca"),
        app->add_option("--k", c.k, "Number of reduced bands"),
        app->add_option("--segments", c.segments, "Spatial segments (1 = non-segmented)"),
        app->add_option("--noise", c.train.noise_fraction, "Corruption level psi in [0,1]"),
        app->add_option("--lr", c.train.learning_rate, "Learning rate"),
        app->add_option("--epochs", c.train.epochs, "Epochs per layer and for fine-tuning"),
        app->add_option("--batch", c.train.batch_size, "Mini-batch size"),
        app->add_option("--loss", f.loss, "squared or cross_entropy"),
        app->add_option("--knn-k", c.knn_k, "Neighbours for the kNN classifier"),
        app->add_option("--train-fraction", c.train_fraction, "Per-class training fraction"),
        app->add_option("--cube", f.cube, "Raw float32 cube"),
        app->add_option("--header", f.header, "JSON sidecar (default: cube path with .json)"),
        app->add_option("--gt", f.gt, "Ground-truth CSV"),
        app->add_option("--mask", c.mask, "1-based bands to drop, e.g. 108-112,154-167,224"),
        app->add_option("--widths", c.widths, "Hidden widths, innermost last (default L,3k,2k,k)"),
        app->add_option("--init-scale", c.train.init_scale, "Scale of the Gaussian weight init"),
        app->add_option("--mode", f.mode, "batch or stochastic"),
        app->add_option("--corruption", f.corruption, "masking or gaussian"),
        app->add_option("--threads", c.threads, "Segment workers (0 = all cores)"),
        app->add_option("--features", f.features, "Features CSV for evaluate (default <out-dir>/features.csv)"),
        app->add_flag("--knn-sweep", c.knn_sweep, "compare: sweep k = 1..20"),
    };
}

std::vector<CLI::Option*> add_synth(CLI::App* app, Flags& f) {
    auto& c = f.config;
    return {
        app->add_option("--classes", c.classes, "Number of classes"),
        app->add_option("--per-class", c.per_class, "Pixels per class"),
        app->add_option("--bands", c.bands, "Band count L"),
        app->add_option("--latent", c.latent, "Intrinsic dimension"),
        app->add_option("--noise-sd", c.noise_sd, "Gaussian band noise"),
        app->add_flag("--nonlinear", c.nonlinear, "Squash latent points with a sigmoid before mixing"),
    };
}

// Applies the config file underneath explicit flags, then copies string flags
// into the typed config.
void finalize(Flags& f, const std::vector<CLI::Option*>& options) {
    std::set<std::string> explicit_flags;
    for (auto* opt : options)
        if (opt->count() > 0) explicit_flags.insert(opt->get_name().substr(2));

    auto& c = f.config;
    c.train.loss = udae::parse_loss(f.loss);
    c.train.mode = udae::parse_mode(f.mode);
    c.train.corruption = udae::parse_corruption(f.corruption);
    c.cube = f.cube;
    c.header = f.header;
    c.gt = f.gt;
    c.features = f.features;
    c.out_dir = f.out_dir;
    if (!f.config_file.empty()) udae::apply_config_json(c, udae::read_json(f.config_file), explicit_flags);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperspectral band reduction with stacked denoising autoencoders"};
    app.require_subcommand(1);

    Flags flags;
    auto* synth = app.add_subcommand("synth", "Write a synthetic cube, header and ground truth");
    auto* reduce = app.add_subcommand("reduce", "Fit UDAE or PCA and write model.json, features.csv, trace.csv");
    auto* evaluate = app.add_subcommand("evaluate", "kNN on reduced features; writes metrics.json");
    auto* compare = app.add_subcommand("compare", "UDAE, segmented UDAE and PCA side by side; writes compare.csv");

    std::vector<CLI::Option*> synth_opts = add_common(synth, flags);
    for (auto* o : add_synth(synth, flags)) synth_opts.push_back(o);
    const auto reduce_opts = add_common(reduce, flags);
    const auto evaluate_opts = add_common(evaluate, flags);
    const auto compare_opts = add_common(compare, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            finalize(flags, synth_opts);
            const auto out = udae::cmd_synth(flags.config);
            std::cout << "wrote " << out.cube.string() << ", " << out.header.string() << ", " << out.gt.string()
                      << '\n';
        } else if (reduce->parsed()) {
            finalize(flags, reduce_opts);
            const auto red = udae::cmd_reduce(flags.config);
            std::printf("%s: %ld x %ld features in %.1f ms -> %s\n", flags.config.method.c_str(),
                        static_cast<long>(red.features.rows()), static_cast<long>(red.features.cols()), red.fit_ms,
                        flags.config.out_dir.string().c_str());
        } else if (evaluate->parsed()) {
            finalize(flags, evaluate_opts);
            const auto ev = udae::cmd_evaluate(flags.config);
            std::printf("kappa %.4f  OA %.4f  (train %zu, test %zu)\n", ev.kappa, ev.overall_accuracy,
                        ev.split.train.size(), ev.split.test.size());
        } else if (compare->parsed()) {
            finalize(flags, compare_opts);
            const auto rows = udae::cmd_compare(flags.config);
            std::printf("%-10s %8s %6s %8s %8s %12s %12s\n", "method", "segments", "knn_k", "kappa", "OA", "fit_ms",
                        "par_fit_ms");
            for (const auto& r : rows)
                std::printf("%-10s %8zu %6zu %8.4f %8.4f %12.1f %12.1f\n", r.method.c_str(), r.segments, r.knn_k,
                            r.kappa, r.overall_accuracy, r.fit_ms, r.parallel_fit_ms);
        }
    } catch (const udae::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
