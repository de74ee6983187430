#include "udae/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>

#include "udae/error.hpp"
#include "udae/pca.hpp"
#include "udae/stack.hpp"

namespace udae {

namespace fs = std::filesystem;

namespace {

template <typename T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::BadConfig, "config key '" + key + "' has the wrong type");
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

TrainConfig run_config(const ExperimentConfig& config) {
    TrainConfig tc = config.train;
    tc.seed = config.seed;
    return tc;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<int> labels_for(const ExperimentConfig& config, std::size_t pixels, const std::vector<int>& fallback) {
    if (!config.gt.empty()) return load_ground_truth(config.gt, pixels).labels;
    if (fallback.size() == pixels) return fallback;
    throw Error(ErrorCode::BadConfig, "no ground truth: pass --gt or a features file with a label column");
}

}  // namespace

void ExperimentConfig::validate_for_reduce() const {
    if (cube.empty()) throw Error(ErrorCode::BadConfig, "--cube is required");
    if (!fs::exists(cube)) throw Error(ErrorCode::IoError, "cube file " + cube.string() + " does not exist");
    if (!gt.empty() && !fs::exists(gt)) throw Error(ErrorCode::IoError, "ground truth " + gt.string() + " does not exist");
    if (k < 1) throw Error(ErrorCode::BadK, "--k must be >= 1");
    if (segments < 1) throw Error(ErrorCode::InvalidSegmentCount, "--segments must be >= 1");
    if (method != "udae" && method != "pca") throw Error(ErrorCode::BadConfig, "--method must be udae or pca");
    train.validate();
}

void apply_config_json(ExperimentConfig& c, const json& j, const std::set<std::string>& explicit_flags) {
    if (!j.is_object()) throw Error(ErrorCode::BadConfig, "config file must hold a JSON object");
    using Setter = std::function<void(const json&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"cube", [&](const json& v, const std::string& k) { c.cube = get_as<std::string>(v, k); }},
        {"header", [&](const json& v, const std::string& k) { c.header = get_as<std::string>(v, k); }},
        {"gt", [&](const json& v, const std::string& k) { c.gt = get_as<std::string>(v, k); }},
        {"mask", [&](const json& v, const std::string& k) { c.mask = get_as<std::string>(v, k); }},
        {"features", [&](const json& v, const std::string& k) { c.features = get_as<std::string>(v, k); }},
        {"method", [&](const json& v, const std::string& k) { c.method = get_as<std::string>(v, k); }},
        {"k", [&](const json& v, const std::string& k) { c.k = get_as<Eigen::Index>(v, k); }},
        {"segments", [&](const json& v, const std::string& k) { c.segments = get_as<std::size_t>(v, k); }},
        {"widths", [&](const json& v, const std::string& k) { c.widths = get_as<std::vector<Eigen::Index>>(v, k); }},
        {"noise", [&](const json& v, const std::string& k) { c.train.noise_fraction = get_as<double>(v, k); }},
        {"lr", [&](const json& v, const std::string& k) { c.train.learning_rate = get_as<double>(v, k); }},
        {"init-scale", [&](const json& v, const std::string& k) { c.train.init_scale = get_as<double>(v, k); }},
        {"epochs", [&](const json& v, const std::string& k) { c.train.epochs = get_as<int>(v, k); }},
        {"batch", [&](const json& v, const std::string& k) { c.train.batch_size = get_as<std::size_t>(v, k); }},
        {"loss", [&](const json& v, const std::string& k) { c.train.loss = parse_loss(get_as<std::string>(v, k)); }},
        {"mode", [&](const json& v, const std::string& k) { c.train.mode = parse_mode(get_as<std::string>(v, k)); }},
        {"corruption",
         [&](const json& v, const std::string& k) { c.train.corruption = parse_corruption(get_as<std::string>(v, k)); }},
        {"threads", [&](const json& v, const std::string& k) { c.threads = get_as<unsigned>(v, k); }},
        {"train-fraction", [&](const json& v, const std::string& k) { c.train_fraction = get_as<double>(v, k); }},
        {"knn-k", [&](const json& v, const std::string& k) { c.knn_k = get_as<std::size_t>(v, k); }},
        {"knn-sweep", [&](const json& v, const std::string& k) { c.knn_sweep = get_as<bool>(v, k); }},
        {"classes", [&](const json& v, const std::string& k) { c.classes = get_as<std::size_t>(v, k); }},
        {"per-class", [&](const json& v, const std::string& k) { c.per_class = get_as<std::size_t>(v, k); }},
        {"bands", [&](const json& v, const std::string& k) { c.bands = get_as<std::size_t>(v, k); }},
        {"latent", [&](const json& v, const std::string& k) { c.latent = get_as<std::size_t>(v, k); }},
        {"noise-sd", [&](const json& v, const std::string& k) { c.noise_sd = get_as<double>(v, k); }},
        {"nonlinear", [&](const json& v, const std::string& k) { c.nonlinear = get_as<bool>(v, k); }},
        {"seed", [&](const json& v, const std::string& k) { c.seed = get_as<Seed>(v, k); }},
        {"out-dir", [&](const json& v, const std::string& k) { c.out_dir = get_as<std::string>(v, k); }},
    };
    for (const auto& [key, value] : j.items()) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw Error(ErrorCode::BadConfig, "unknown config key '" + key + "'");
        if (explicit_flags.count(key)) continue;
        it->second(value, key);
    }
}

HyperCube load_experiment_cube(const ExperimentConfig& config) {
    fs::path header = config.header;
    if (header.empty()) header = fs::path(config.cube).replace_extension(".json");
    HyperCube cube = load_cube(config.cube, header);
    if (!config.mask.empty()) cube = apply_band_mask(cube, BandMask::parse(config.mask));
    return cube;
}

SynthOutputs cmd_synth(const ExperimentConfig& config) {
    SynthSpec spec;
    spec.pixels_per_class.assign(config.classes, config.per_class);
    spec.bands = config.bands;
    spec.intrinsic_dim = config.latent;
    spec.noise_sd = config.noise_sd;
    spec.seed = config.seed;
    spec.nonlinear = config.nonlinear;
    const SynthData data = synth_cube(spec);

    ensure_dir(config.out_dir);
    SynthOutputs out{config.out_dir / "cube.raw", config.out_dir / "cube.json", config.out_dir / "gt.csv"};
    save_cube(data.cube, out.cube, out.header);
    save_ground_truth(data.truth, out.gt);
    return out;
}

Reduction reduce_cube(const HyperCube& cube, const ExperimentConfig& config, const std::string& method,
                      std::size_t segments) {
    Reduction out;
    const auto start = std::chrono::steady_clock::now();
    if (method == "udae") {
        const UdaeModel model = fit_udae(cube, config.k, segments, run_config(config), config.widths, config.threads);
        out.fit_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        for (const auto& seg : model.segments) out.parallel_fit_ms = std::max(out.parallel_fit_ms, seg.fit_ms);
        out.features = transform(model, cube);
        out.model = to_json(model);
    } else if (method == "pca") {
        const Normalized norm = normalize_zero_mean(cube);
        const PcaModel model = pca_fit(norm.cube.data, config.k);
        out.fit_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        out.parallel_fit_ms = out.fit_ms;
        out.features = pca_transform(model, norm.cube.data);
        out.model = to_json(model);
    } else {
        throw Error(ErrorCode::BadConfig, "unknown method '" + method + "'");
    }
    return out;
}

Reduction cmd_reduce(const ExperimentConfig& config) {
    config.validate_for_reduce();
    const HyperCube cube = load_experiment_cube(config);
    std::vector<int> labels(cube.pixels(), 0);
    if (!config.gt.empty()) labels = load_ground_truth(config.gt, cube.pixels()).labels;

    Reduction red = reduce_cube(cube, config, config.method, config.segments);
    ensure_dir(config.out_dir);
    write_json(config.out_dir / "model.json", red.model);
    write_features_csv(config.out_dir / "features.csv", red.features, labels);
    if (config.method == "udae")
        write_trace_csv(config.out_dir / "trace.csv", udae_model_from_json(red.model));
    else
        write_pca_trace_csv(config.out_dir / "trace.csv", pca_model_from_json(red.model));
    return red;
}

Evaluation evaluate_features(const Matrix& features, const std::vector<int>& labels, const SplitSpec& split_spec,
                             std::size_t knn_k) {
    if (static_cast<std::size_t>(features.rows()) != labels.size())
        throw Error(ErrorCode::LengthMismatch, std::to_string(features.rows()) + " feature rows vs " +
                                                   std::to_string(labels.size()) + " labels");
    validate_labels(labels);
    Evaluation ev;
    ev.split = split(labels, split_spec);
    const auto train_rows = std::vector<Eigen::Index>(ev.split.train.begin(), ev.split.train.end());
    const auto test_rows = std::vector<Eigen::Index>(ev.split.test.begin(), ev.split.test.end());
    std::vector<int> train_labels, test_labels;
    for (auto i : ev.split.train) train_labels.push_back(labels[i]);
    for (auto i : ev.split.test) test_labels.push_back(labels[i]);

    const Matrix train = features(train_rows, Eigen::all);
    const Matrix test = features(test_rows, Eigen::all);
    const std::vector<int> predicted = knn_classify(train, train_labels, test, knn_k);

    int classes = 0;
    for (int v : labels) classes = std::max(classes, v);
    ev.cm = confusion(test_labels, predicted, classes);
    ev.kappa = kappa(ev.cm);
    ev.overall_accuracy = overall_accuracy(ev.cm);

    json matrix = json::array();
    json per_class = json::array();
    const auto acc = per_class_accuracy(ev.cm);
    for (int a = 1; a <= classes; ++a) {
        json row = json::array();
        for (int p = 1; p <= classes; ++p) row.push_back(ev.cm.at(a, p));
        matrix.push_back(std::move(row));
        const auto n_train = std::count(train_labels.begin(), train_labels.end(), a);
        const auto n_test = std::count(test_labels.begin(), test_labels.end(), a);
        json entry = {{"class", a}, {"train", n_train}, {"test", n_test}};
        entry["accuracy"] = acc[static_cast<std::size_t>(a - 1)] ? json(*acc[static_cast<std::size_t>(a - 1)]) : json();
        per_class.push_back(std::move(entry));
    }
    ev.report = {{"classes", classes},
                 {"kappa", ev.kappa},
                 {"overall_accuracy", ev.overall_accuracy},
                 {"confusion_matrix", std::move(matrix)},
                 {"per_class", std::move(per_class)},
                 {"split", {{"seed", split_spec.seed},
                            {"train_fraction", split_spec.train_fraction},
                            {"train_size", ev.split.train.size()},
                            {"test_size", ev.split.test.size()}}},
                 {"classifier", {{"name", "knn"}, {"k_neighbors", knn_k}, {"metric", "euclidean"}}}};
    return ev;
}

Evaluation cmd_evaluate(const ExperimentConfig& config) {
    const fs::path features_path = config.features.empty() ? config.out_dir / "features.csv" : config.features;
    const FeatureTable table = read_features_csv(features_path);
    const std::vector<int> labels =
        labels_for(config, static_cast<std::size_t>(table.features.rows()), table.labels);
    Evaluation ev = evaluate_features(table.features, labels, SplitSpec{config.train_fraction, config.seed},
                                      config.knn_k);
    ensure_dir(config.out_dir);
    write_json(config.out_dir / "metrics.json", ev.report);
    return ev;
}

std::vector<CompareRow> cmd_compare(const ExperimentConfig& config) {
    config.validate_for_reduce();
    const HyperCube cube = load_experiment_cube(config);
    const std::vector<int> labels = labels_for(config, cube.pixels(), {});
    const std::size_t seg_count = config.segments > 1 ? config.segments : 4;

    struct Run {
        std::string name;
        std::string method;
        std::size_t segments;
    };
    const std::vector<Run> runs = {{"udae", "udae", 1}, {"seg-udae", "udae", seg_count}, {"pca", "pca", 1}};
    std::vector<std::size_t> knn_values;
    if (config.knn_sweep)
        for (std::size_t k = 1; k <= 20; ++k) knn_values.push_back(k);
    else
        knn_values.push_back(config.knn_k);

    const SplitSpec split_spec{config.train_fraction, config.seed};
    std::vector<CompareRow> rows;
    for (const auto& run : runs) {
        const Reduction red = reduce_cube(cube, config, run.method, run.segments);
        for (auto kn : knn_values) {
            const Evaluation ev = evaluate_features(red.features, labels, split_spec, kn);
            rows.push_back({run.name, run.segments, kn, ev.kappa, ev.overall_accuracy, red.fit_ms,
                            red.parallel_fit_ms});
        }
    }

    ensure_dir(config.out_dir);
    std::ofstream out(config.out_dir / "compare.csv");
    if (!out) throw Error(ErrorCode::IoError, "cannot write compare.csv");
    out << "method,segments,knn_k,kappa,overall_accuracy,fit_ms,parallel_fit_ms\n";
    for (const auto& r : rows)
        out << r.method << ',' << r.segments << ',' << r.knn_k << ',' << fmt(r.kappa) << ','
            << fmt(r.overall_accuracy) << ',' << fmt(r.fit_ms) << ',' << fmt(r.parallel_fit_ms) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed on compare.csv");
    return rows;
}

}  // namespace udae
