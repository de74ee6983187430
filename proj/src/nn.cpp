#include "udae/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "udae/error.hpp"

namespace udae {

namespace {

constexpr double kClamp = 1e-12;

std::string dims(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void require_same_shape(const Matrix& x, const Matrix& z) {
    if (x.rows() != z.rows() || x.cols() != z.cols())
        throw Error(ErrorCode::ShapeMismatch, "shapes " + dims(x) + " and " + dims(z) + " differ");
}

// Elementwise derivative of the activation, written in terms of its output.
Matrix activation_slope(Activation act, const Matrix& out) {
    if (act == Activation::Linear) return Matrix::Ones(out.rows(), out.cols());
    return out.array() * (1.0 - out.array());
}

void check_chain(const Network& net, Eigen::Index input_dim) {
    if (net.empty()) throw Error(ErrorCode::ShapeMismatch, "network has no layers");
    Eigen::Index width = input_dim;
    for (std::size_t i = 0; i < net.size(); ++i) {
        if (net[i].in_dim() != width)
            throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(i) + " expects " +
                                                      std::to_string(net[i].in_dim()) + " inputs, got " +
                                                      std::to_string(width));
        if (net[i].bias.size() != net[i].out_dim())
            throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(i) + " bias length mismatch");
        width = net[i].out_dim();
    }
}

}  // namespace

std::string_view to_string(Activation a) { return a == Activation::Sigmoid ? "sigmoid" : "linear"; }
std::string_view to_string(LossKind l) { return l == LossKind::Squared ? "squared" : "cross_entropy"; }
std::string_view to_string(TrainMode m) { return m == TrainMode::Batch ? "batch" : "stochastic"; }
std::string_view to_string(Corruption c) { return c == Corruption::Masking ? "masking" : "gaussian"; }

Activation parse_activation(std::string_view s) {
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "linear") return Activation::Linear;
    throw Error(ErrorCode::BadConfig, "unknown activation '" + std::string(s) + "'");
}

LossKind parse_loss(std::string_view s) {
    if (s == "squared") return LossKind::Squared;
    if (s == "cross_entropy") return LossKind::CrossEntropy;
    throw Error(ErrorCode::BadConfig, "unknown loss '" + std::string(s) + "'");
}

TrainMode parse_mode(std::string_view s) {
    if (s == "batch") return TrainMode::Batch;
    if (s == "stochastic") return TrainMode::Stochastic;
    throw Error(ErrorCode::BadConfig, "unknown mode '" + std::string(s) + "'");
}

Corruption parse_corruption(std::string_view s) {
    if (s == "masking") return Corruption::Masking;
    if (s == "gaussian") return Corruption::Gaussian;
    throw Error(ErrorCode::BadConfig, "unknown corruption '" + std::string(s) + "'");
}

void LayerParams::validate() const {
    if (bias.size() != weight.rows())
        throw Error(ErrorCode::ShapeMismatch, "bias length " + std::to_string(bias.size()) + " != weight rows " +
                                                  std::to_string(weight.rows()));
    if (!weight.allFinite() || !bias.allFinite()) throw Error(ErrorCode::NonFinite, "layer has non-finite parameters");
}

void TrainConfig::validate() const {
    if (!(noise_fraction >= 0.0 && noise_fraction <= 1.0))
        throw Error(ErrorCode::BadNoiseFraction, "noise fraction must lie in [0,1]");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw Error(ErrorCode::BadConfig, "learning rate must be finite and non-negative");
    if (!(init_scale > 0.0) || !std::isfinite(init_scale))
        throw Error(ErrorCode::BadConfig, "init scale must be positive");
    if (epochs < 1) throw Error(ErrorCode::BadConfig, "epochs must be >= 1");
    if (batch_size < 1) throw Error(ErrorCode::BadConfig, "batch size must be >= 1");
}

double sigmoid(double v) {
    // Saturated inputs would round to exactly 0 or 1; keep the result inside (0,1).
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    return std::clamp(1.0 / (1.0 + std::exp(-v)), lo, hi);
}

Matrix forward(const LayerParams& layer, const Matrix& x) {
    if (x.cols() != layer.in_dim())
        throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(x.cols()) + " columns, layer expects " +
                                                  std::to_string(layer.in_dim()));
    Matrix pre = (x * layer.weight.transpose()).rowwise() + layer.bias.transpose();
    if (layer.activation == Activation::Sigmoid) return pre.unaryExpr([](double v) { return sigmoid(v); });
    return pre;
}

Matrix forward(const Network& net, const Matrix& x) {
    Matrix a = x;
    for (const auto& layer : net) a = forward(layer, a);
    return a;
}

Matrix corrupt(const Matrix& x, double psi, std::mt19937_64& rng, Corruption kind) {
    if (!(psi >= 0.0 && psi <= 1.0)) throw Error(ErrorCode::BadNoiseFraction, "psi must lie in [0,1]");
    if (psi == 0.0) return x;
    Matrix out = x;
    if (kind == Corruption::Masking) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            for (Eigen::Index i = 0; i < out.rows(); ++i)
                if (unif(rng) < psi) out(i, j) = 0.0;
    } else {
        std::normal_distribution<double> gauss(0.0, psi);
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) += gauss(rng);
    }
    return out;
}

double loss_squared(const Matrix& x, const Matrix& z) {
    require_same_shape(x, z);
    if (x.rows() == 0) return 0.0;
    return (x - z).squaredNorm() / static_cast<double>(x.rows());
}

double loss_cross_entropy(const Matrix& x, const Matrix& z) {
    require_same_shape(x, z);
    if ((x.array() < 0.0).any() || (x.array() > 1.0).any())
        throw Error(ErrorCode::DomainError, "cross-entropy targets must lie in [0,1]");
    if (x.rows() == 0) return 0.0;
    const auto zc = z.array().min(1.0 - kClamp).max(kClamp);
    const double total = -(x.array() * zc.log() + (1.0 - x.array()) * (1.0 - zc).log()).sum();
    return total / static_cast<double>(x.rows());
}

double loss(LossKind kind, const Matrix& x, const Matrix& z) {
    return kind == LossKind::Squared ? loss_squared(x, z) : loss_cross_entropy(x, z);
}

Gradients backward(const Network& net, const Matrix& corrupted, const Matrix& clean, LossKind kind) {
    check_chain(net, corrupted.cols());
    if (clean.rows() != corrupted.rows() || clean.cols() != net.back().out_dim())
        throw Error(ErrorCode::ShapeMismatch, "target " + dims(clean) + " does not match network output");
    if (kind == LossKind::CrossEntropy && net.back().activation != Activation::Sigmoid)
        throw Error(ErrorCode::LossActivationMismatch, "cross-entropy loss needs a sigmoid output layer");
    if (kind == LossKind::CrossEntropy && ((clean.array() < 0.0).any() || (clean.array() > 1.0).any()))
        throw Error(ErrorCode::DomainError, "cross-entropy targets must lie in [0,1]");

    // activations[0] is the input, activations[i+1] the output of layer i.
    std::vector<Matrix> activations;
    activations.reserve(net.size() + 1);
    activations.push_back(corrupted);
    for (const auto& layer : net) activations.push_back(forward(layer, activations.back()));

    const double scale = 1.0 / static_cast<double>(std::max<Eigen::Index>(clean.rows(), 1));
    const Matrix& out = activations.back();
    Matrix delta;  // d loss / d pre-activation of the current layer
    if (kind == LossKind::CrossEntropy) {
        delta = (out - clean) * scale;
    } else {
        delta = (2.0 * scale) * (out - clean).cwiseProduct(activation_slope(net.back().activation, out));
    }

    Gradients grads(net.size());
    for (std::size_t i = net.size(); i-- > 0;) {
        const Matrix& input = activations[i];
        grads[i].weight = delta.transpose() * input;
        grads[i].bias = delta.colwise().sum().transpose();
        if (i > 0) delta = (delta * net[i].weight).cwiseProduct(activation_slope(net[i - 1].activation, input));
    }
    return grads;
}

void sgd_step(Network& net, const Gradients& grads, double learning_rate) {
    if (grads.size() != net.size()) throw Error(ErrorCode::ShapeMismatch, "gradient count != layer count");
    for (std::size_t i = 0; i < net.size(); ++i) {
        if (grads[i].weight.rows() != net[i].weight.rows() || grads[i].weight.cols() != net[i].weight.cols() ||
            grads[i].bias.size() != net[i].bias.size())
            throw Error(ErrorCode::ShapeMismatch, "gradient shape mismatch at layer " + std::to_string(i));
    }
    if (learning_rate == 0.0) return;
    for (std::size_t i = 0; i < net.size(); ++i) {
        net[i].weight -= learning_rate * grads[i].weight;
        net[i].bias -= learning_rate * grads[i].bias;
    }
}

double reconstruction_error(const Network& net, const Matrix& data, LossKind kind) {
    return loss(kind, data, forward(net, data));
}

EpochTrace train_epochs(Network& net, const Matrix& data, const TrainConfig& config) {
    config.validate();
    if (data.rows() == 0) throw Error(ErrorCode::BadShape, "training data is empty");
    check_chain(net, data.cols());
    if (net.back().out_dim() != data.cols())
        throw Error(ErrorCode::ShapeMismatch, "autoencoder output width differs from input width");
    if (config.loss == LossKind::CrossEntropy && net.back().activation != Activation::Sigmoid)
        throw Error(ErrorCode::LossActivationMismatch, "cross-entropy loss needs a sigmoid output layer");

    std::mt19937_64 rng(config.seed);
    const auto rows = static_cast<std::size_t>(data.rows());
    const std::size_t batch =
        config.mode == TrainMode::Stochastic ? 1 : std::min<std::size_t>(config.batch_size, rows);
    // Near-equal batches so no epoch ends on a small, noisy remainder.
    const std::size_t batches = (rows + batch - 1) / batch;
    std::vector<Eigen::Index> order(rows);
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    EpochTrace trace;
    trace.errors.reserve(static_cast<std::size_t>(config.epochs));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t start = b * rows / batches;
            const std::size_t stop = (b + 1) * rows / batches;
            std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(stop));
            const Matrix clean = data(idx, Eigen::all);
            const Matrix noisy = corrupt(clean, config.noise_fraction, rng, config.corruption);
            sgd_step(net, backward(net, noisy, clean, config.loss), config.learning_rate);
        }
        const double err = reconstruction_error(net, data, config.loss);
        if (!std::isfinite(err))
            throw Error(ErrorCode::NonFiniteLoss, "reconstruction error became non-finite at epoch " +
                                                      std::to_string(epoch + 1) + "; try a smaller learning rate");
        trace.errors.push_back(err);
    }
    return trace;
}

LayerParams init_layer(Eigen::Index in_dim, Eigen::Index out_dim, Activation act, double init_scale,
                       std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    LayerParams layer;
    layer.weight.resize(out_dim, in_dim);
    for (Eigen::Index i = 0; i < out_dim; ++i)
        for (Eigen::Index j = 0; j < in_dim; ++j) layer.weight(i, j) = gauss(rng) * init_scale;
    layer.bias = Vector::Zero(out_dim);
    layer.activation = act;
    return layer;
}

}  // namespace udae
