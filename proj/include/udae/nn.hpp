#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "udae/types.hpp"

namespace udae {

enum class Activation { Sigmoid, Linear };
enum class LossKind { Squared, CrossEntropy };
/// Batch: mini-batches of `batch_size` rows (use batch_size >= P for the full
/// batch). Stochastic: one row per update.
enum class TrainMode { Batch, Stochastic };
/// Masking zeroes each scalar with probability psi; Gaussian adds N(0, psi^2).
enum class Corruption { Masking, Gaussian };

std::string_view to_string(Activation a);
std::string_view to_string(LossKind l);
std::string_view to_string(TrainMode m);
std::string_view to_string(Corruption c);
Activation parse_activation(std::string_view s);
LossKind parse_loss(std::string_view s);
TrainMode parse_mode(std::string_view s);
Corruption parse_corruption(std::string_view s);

/// One affine layer y = s(W x + b). weight is out_dim x in_dim.
struct LayerParams {
    Matrix weight;
    Vector bias;
    Activation activation = Activation::Sigmoid;

    Eigen::Index in_dim() const { return weight.cols(); }
    Eigen::Index out_dim() const { return weight.rows(); }
    void validate() const;
    bool operator==(const LayerParams& o) const {
        return activation == o.activation && weight.rows() == o.weight.rows() && weight.cols() == o.weight.cols() &&
               weight == o.weight && bias.size() == o.bias.size() && bias == o.bias;
    }
};

/// Layers applied in order; layer i+1 consumes the output of layer i.
using Network = std::vector<LayerParams>;

struct TrainConfig {
    double noise_fraction = 0.1;
    double learning_rate = 0.01;
    double init_scale = 0.1;
    int epochs = 225;
    std::size_t batch_size = 32;
    LossKind loss = LossKind::Squared;
    TrainMode mode = TrainMode::Batch;
    Corruption corruption = Corruption::Masking;
    Seed seed = 0;

    void validate() const;
};

/// End-of-epoch reconstruction error of the uncorrupted data, one value per
/// epoch.
struct EpochTrace {
    std::vector<double> errors;

    double final_error() const { return errors.empty() ? 0.0 : errors.back(); }
};

struct LayerGradient {
    Matrix weight;
    Vector bias;
};
using Gradients = std::vector<LayerGradient>;

double sigmoid(double v);

/// Applies one layer to every row of `x`.
Matrix forward(const LayerParams& layer, const Matrix& x);
/// Applies all layers in order.
Matrix forward(const Network& net, const Matrix& x);

Matrix corrupt(const Matrix& x, double psi, std::mt19937_64& rng, Corruption kind = Corruption::Masking);

/// Mean over rows of ||x - z||^2.
double loss_squared(const Matrix& x, const Matrix& z);
/// Mean over rows of the summed Bernoulli cross-entropy; z is clamped to
/// [1e-12, 1 - 1e-12].
double loss_cross_entropy(const Matrix& x, const Matrix& z);
double loss(LossKind kind, const Matrix& x, const Matrix& z);

/// Gradients of loss(clean, forward(net, corrupted)) with respect to every
/// weight and bias.
Gradients backward(const Network& net, const Matrix& corrupted, const Matrix& clean, LossKind kind);

/// p <- p - learning_rate * grad(p) for every parameter.
void sgd_step(Network& net, const Gradients& grads, double learning_rate);

/// Loss of the network on uncorrupted input.
double reconstruction_error(const Network& net, const Matrix& data, LossKind kind);

/// Denoising mini-batch SGD for `config.epochs` epochs. Each step corrupts
/// the batch, reconstructs, and descends on the loss against the clean batch.
/// Row order per epoch comes from a shuffle seeded by `config.seed`.
EpochTrace train_epochs(Network& net, const Matrix& data, const TrainConfig& config);

/// Gaussian(0,1) * init_scale weights, zero bias.
LayerParams init_layer(Eigen::Index in_dim, Eigen::Index out_dim, Activation act, double init_scale,
                       std::mt19937_64& rng);

}  // namespace udae
