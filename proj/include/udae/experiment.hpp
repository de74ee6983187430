#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "udae/cube_io.hpp"
#include "udae/eval.hpp"
#include "udae/model_io.hpp"
#include "udae/nn.hpp"

namespace udae {

/// Everything one run needs. A JSON config file uses the CLI flag names
/// without the leading dashes as keys ("knn-k", "out-dir", ...).
struct ExperimentConfig {
    // inputs
    std::filesystem::path cube;
    std::filesystem::path header;  // defaults to the cube path with a .json extension
    std::filesystem::path gt;
    std::string mask;
    std::filesystem::path features;  // evaluate: defaults to <out-dir>/features.csv

    // reduction
    std::string method = "udae";
    Eigen::Index k = 0;
    std::size_t segments = 1;
    std::vector<Eigen::Index> widths;
    TrainConfig train;
    unsigned threads = 0;

    // evaluation
    double train_fraction = 0.30;
    std::size_t knn_k = 5;
    bool knn_sweep = false;  // compare: k = 1..20

    // synth
    std::size_t classes = 3;
    std::size_t per_class = 100;
    std::size_t bands = 16;
    std::size_t latent = 4;
    double noise_sd = 0.01;
    bool nonlinear = false;

    Seed seed = 0;
    std::filesystem::path out_dir = "out";

    void validate_for_reduce() const;
};

/// Copies keys from a flat JSON object into `config`, skipping any key listed
/// in `explicit_flags` (those were set on the command line and win).
void apply_config_json(ExperimentConfig& config, const json& j, const std::set<std::string>& explicit_flags = {});

/// Cube with the configured band mask applied.
HyperCube load_experiment_cube(const ExperimentConfig& config);

struct SynthOutputs {
    std::filesystem::path cube;
    std::filesystem::path header;
    std::filesystem::path gt;
};
SynthOutputs cmd_synth(const ExperimentConfig& config);

struct Reduction {
    Matrix features;
    json model;
    double fit_ms = 0.0;
    /// Longest single-segment fit; the wall clock when segments run fully in parallel.
    double parallel_fit_ms = 0.0;
};

/// Fits the configured method on a loaded cube without touching the disk.
Reduction reduce_cube(const HyperCube& cube, const ExperimentConfig& config, const std::string& method,
                      std::size_t segments);

/// Writes model.json, features.csv and trace.csv under out_dir.
Reduction cmd_reduce(const ExperimentConfig& config);

struct Evaluation {
    Split split;
    ConfusionMatrix cm;
    double kappa = 0.0;
    double overall_accuracy = 0.0;
    json report;
};

/// split -> kNN -> confusion -> kappa / overall accuracy on labeled pixels.
Evaluation evaluate_features(const Matrix& features, const std::vector<int>& labels, const SplitSpec& split_spec,
                             std::size_t knn_k);

/// Reads features (and labels from gt or the label column), writes metrics.json.
Evaluation cmd_evaluate(const ExperimentConfig& config);

struct CompareRow {
    std::string method;
    std::size_t segments = 1;
    std::size_t knn_k = 0;
    double kappa = 0.0;
    double overall_accuracy = 0.0;
    double fit_ms = 0.0;
    double parallel_fit_ms = 0.0;
};

/// Non-segmented UDAE, segmented UDAE (config.segments, or 4 when that is 1)
/// and PCA on one shared split; writes compare.csv.
std::vector<CompareRow> cmd_compare(const ExperimentConfig& config);

}  // namespace udae
