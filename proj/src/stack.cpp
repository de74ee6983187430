#include "udae/stack.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "udae/error.hpp"

namespace udae {

std::vector<Eigen::Index> StackedNetwork::widths() const {
    std::vector<Eigen::Index> w;
    for (const auto& layer : encoder) w.push_back(layer.out_dim());
    return w;
}

Network StackedNetwork::layers() const {
    Network all = encoder;
    all.insert(all.end(), decoder.begin(), decoder.end());
    return all;
}

Activation output_activation_for(LossKind loss) {
    return loss == LossKind::Squared ? Activation::Linear : Activation::Sigmoid;
}

AutoencoderFit train_single_ae(const Matrix& data, Eigen::Index hidden_dim, const TrainConfig& config,
                               Activation decoder_activation, Activation encoder_activation) {
    config.validate();
    if (hidden_dim < 1) throw Error(ErrorCode::BadConfig, "hidden width must be >= 1");
    if (data.rows() == 0 || data.cols() == 0) throw Error(ErrorCode::BadShape, "training data is empty");

    std::mt19937_64 rng(config.seed);
    Network net;
    net.push_back(init_layer(data.cols(), hidden_dim, encoder_activation, config.init_scale, rng));
    net.push_back(init_layer(hidden_dim, data.cols(), decoder_activation, config.init_scale, rng));

    TrainConfig run = config;
    run.seed = derive_seed(config.seed, 1);
    EpochTrace trace = train_epochs(net, data, run);
    return {std::move(net[0]), std::move(net[1]), std::move(trace)};
}

AutoencoderFit train_single_ae(const Matrix& data, Eigen::Index hidden_dim, const TrainConfig& config) {
    return train_single_ae(data, hidden_dim, config, output_activation_for(config.loss));
}

Seed layer_seed(Seed seed, std::size_t layer) { return layer == 0 ? seed : derive_seed(seed, layer); }

PretrainResult greedy_pretrain(const Matrix& data, const std::vector<Eigen::Index>& widths,
                               const TrainConfig& config) {
    if (widths.empty()) throw Error(ErrorCode::BadConfig, "need at least one hidden width");
    PretrainResult out;
    Matrix input = data;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        TrainConfig layer_config = config;
        layer_config.seed = layer_seed(config.seed, i);
        AutoencoderFit ae = train_single_ae(input, widths[i], layer_config);
        out.layer_errors.push_back(ae.final_error());
        out.traces.push_back(std::move(ae.trace));
        if (i + 1 < widths.size()) input = forward(ae.encoder, input);
        out.encoders.push_back(std::move(ae.encoder));
    }
    return out;
}

StackedNetwork assemble_stack(const Network& encoders, Eigen::Index input_dim, LossKind loss) {
    if (encoders.empty()) throw Error(ErrorCode::ShapeMismatch, "encoder stack is empty");
    Eigen::Index width = input_dim;
    for (std::size_t i = 0; i < encoders.size(); ++i) {
        if (encoders[i].in_dim() != width || encoders[i].bias.size() != encoders[i].out_dim())
            throw Error(ErrorCode::ShapeMismatch, "encoder layer " + std::to_string(i) + " does not chain");
        width = encoders[i].out_dim();
    }

    StackedNetwork net;
    net.encoder = encoders;
    const std::size_t depth = encoders.size();
    for (std::size_t i = 0; i < depth; ++i) {
        const LayerParams& mirror = encoders[depth - 1 - i];
        LayerParams layer;
        layer.weight = mirror.weight.transpose();
        const bool outermost = i + 1 == depth;
        layer.bias = outermost ? Vector::Zero(input_dim) : encoders[depth - 2 - i].bias;
        layer.activation = outermost ? output_activation_for(loss) : Activation::Sigmoid;
        net.decoder.push_back(std::move(layer));
    }
    return net;
}

FineTuneResult fine_tune(const StackedNetwork& network, const Matrix& data, const TrainConfig& config) {
    if (network.encoder.empty() || network.decoder.size() != network.encoder.size())
        throw Error(ErrorCode::ShapeMismatch, "network is not an assembled stack");
    if (data.cols() != network.input_dim())
        throw Error(ErrorCode::ShapeMismatch, "data has " + std::to_string(data.cols()) + " bands, network expects " +
                                                  std::to_string(network.input_dim()));
    Network all = network.layers();
    EpochTrace trace = train_epochs(all, data, config);

    FineTuneResult out;
    const auto depth = static_cast<std::ptrdiff_t>(network.encoder.size());
    out.network.encoder.assign(all.begin(), all.begin() + depth);
    out.network.decoder.assign(all.begin() + depth, all.end());
    out.trace = std::move(trace);
    return out;
}

Matrix encode(const StackedNetwork& network, const Matrix& data) {
    if (data.cols() != network.input_dim())
        throw Error(ErrorCode::ShapeMismatch, "data has " + std::to_string(data.cols()) + " bands, network expects " +
                                                  std::to_string(network.input_dim()));
    return forward(network.encoder, data);
}

Matrix reconstruct(const StackedNetwork& network, const Matrix& data) {
    return forward(network.decoder, encode(network, data));
}

std::vector<Eigen::Index> default_widths(Eigen::Index bands, Eigen::Index k, std::size_t depth) {
    if (k < 1 || bands < 1) throw Error(ErrorCode::BadConfig, "band counts must be positive");
    if (depth < 1) throw Error(ErrorCode::BadConfig, "depth must be >= 1");
    if (depth == 4) return {bands, 3 * k, 2 * k, k};
    if (depth == 1) return {k};
    std::vector<Eigen::Index> w;
    const double ratio = static_cast<double>(k) / static_cast<double>(bands);
    for (std::size_t i = 0; i < depth; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(depth - 1);
        w.push_back(std::max<Eigen::Index>(1, std::lround(static_cast<double>(bands) * std::pow(ratio, t))));
    }
    w.back() = k;
    return w;
}

StackFit fit_stack(const Matrix& data, const std::vector<Eigen::Index>& widths, const TrainConfig& config) {
    StackFit out;
    out.pretrain = greedy_pretrain(data, widths, config);
    StackedNetwork assembled = assemble_stack(out.pretrain.encoders, data.cols(), config.loss);
    TrainConfig tune = config;
    tune.seed = layer_seed(config.seed, widths.size());
    FineTuneResult tuned = fine_tune(assembled, data, tune);
    out.network = std::move(tuned.network);
    out.fine_tune_trace = std::move(tuned.trace);
    return out;
}

UdaeModel fit_udae(const HyperCube& cube, Eigen::Index k, std::size_t segments, const TrainConfig& config,
                   std::vector<Eigen::Index> widths, unsigned threads) {
    cube.validate();
    config.validate();
    if (k < 1) throw Error(ErrorCode::BadK, "k must be >= 1");
    if (widths.empty()) widths = default_widths(static_cast<Eigen::Index>(cube.bands()), k);
    if (widths.back() != k)
        throw Error(ErrorCode::BadConfig, "innermost width " + std::to_string(widths.back()) + " != k " +
                                              std::to_string(k));
    for (auto w : widths)
        if (w < 1) throw Error(ErrorCode::BadConfig, "hidden widths must be >= 1");

    UdaeModel model;
    model.plan = make_segments(cube.pixels(), segments);
    model.widths = widths;
    model.config = config;
    model.segments.resize(model.plan.count());

    auto fit_one = [&](std::size_t j) {
        const auto& range = model.plan.ranges[j];
        const auto start = std::chrono::steady_clock::now();
        auto [centered, means] = center_columns(
            cube.data.middleRows(static_cast<Eigen::Index>(range.begin), static_cast<Eigen::Index>(range.size())));
        TrainConfig seg_config = config;
        seg_config.seed = config.seed + j;
        SegmentModel& seg = model.segments[j];
        seg.fit = fit_stack(centered, widths, seg_config);
        seg.means = std::move(means);
        seg.fit_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    };

    const std::size_t count = model.plan.count();
    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (workers <= 1) {
        for (std::size_t j = 0; j < count; ++j) fit_one(j);
        return model;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t j = next++; j < count; j = next++) {
                try {
                    fit_one(j);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return model;
}

Matrix transform(const UdaeModel& model, const HyperCube& cube) {
    if (model.segments.size() != model.plan.count() || model.segments.empty())
        throw Error(ErrorCode::SegmentCoverageError, "model has no trained segments");
    if (static_cast<Eigen::Index>(cube.bands()) != model.input_dim())
        throw Error(ErrorCode::ShapeMismatch, "cube has " + std::to_string(cube.bands()) +
                                                  " bands, model was trained on " +
                                                  std::to_string(model.input_dim()));
    if (cube.pixels() != model.plan.pixels())
        throw Error(ErrorCode::SegmentCoverageError, "cube has " + std::to_string(cube.pixels()) +
                                                         " pixels, segment plan covers " +
                                                         std::to_string(model.plan.pixels()));
    Matrix out(cube.data.rows(), model.code_dim());
    for (std::size_t j = 0; j < model.plan.count(); ++j) {
        const auto& range = model.plan.ranges[j];
        const auto begin = static_cast<Eigen::Index>(range.begin);
        const auto len = static_cast<Eigen::Index>(range.size());
        const Matrix centered = cube.data.middleRows(begin, len).rowwise() - model.segments[j].means;
        out.middleRows(begin, len) = encode(model.segments[j].fit.network, centered);
    }
    return out;
}

}  // namespace udae
