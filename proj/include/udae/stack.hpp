#pragma once

#include <cstddef>
#include <vector>

#include "udae/cube_io.hpp"
#include "udae/nn.hpp"

namespace udae {

/// Encoder L -> h1 -> ... -> k followed by a mirrored decoder k -> ... -> L.
struct StackedNetwork {
    Network encoder;
    Network decoder;

    Eigen::Index input_dim() const { return encoder.empty() ? 0 : encoder.front().in_dim(); }
    Eigen::Index code_dim() const { return encoder.empty() ? 0 : encoder.back().out_dim(); }
    /// Hidden widths of the encoder, e.g. {16, 12, 8, 4}.
    std::vector<Eigen::Index> widths() const;
    /// Encoder followed by decoder as one layer list.
    Network layers() const;

    bool operator==(const StackedNetwork&) const = default;
};

/// Output activation paired with each loss: linear for squared error, sigmoid
/// for cross-entropy.
Activation output_activation_for(LossKind loss);

struct AutoencoderFit {
    LayerParams encoder;
    LayerParams decoder;
    EpochTrace trace;

    double final_error() const { return trace.final_error(); }
};

/// Trains one denoising autoencoder data -> hidden_dim -> data. Weights start
/// as Gaussian * init_scale and biases at zero.
AutoencoderFit train_single_ae(const Matrix& data, Eigen::Index hidden_dim, const TrainConfig& config,
                               Activation decoder_activation, Activation encoder_activation = Activation::Sigmoid);
AutoencoderFit train_single_ae(const Matrix& data, Eigen::Index hidden_dim, const TrainConfig& config);

struct PretrainResult {
    Network encoders;
    std::vector<double> layer_errors;  // final error of each layer's autoencoder
    std::vector<EpochTrace> traces;    // one per layer
};

/// Seed used for pretraining layer `layer` (0-based) given the run seed.
Seed layer_seed(Seed seed, std::size_t layer);

/// Greedy layer-wise pretraining. Layer i trains on the clean encoder output
/// of layers 0..i-1; corruption is applied only to the input of the layer
/// being trained. Upper layers reconstruct sigmoid activations and so use a
/// sigmoid decoder.
PretrainResult greedy_pretrain(const Matrix& data, const std::vector<Eigen::Index>& widths,
                               const TrainConfig& config);

/// Mirrors a pretrained encoder stack. Decoder layer i gets the transpose of
/// encoder layer (n-1-i) and the bias of encoder layer (n-2-i); the outermost
/// decoder bias is zero.
StackedNetwork assemble_stack(const Network& encoders, Eigen::Index input_dim,
                              LossKind loss = LossKind::Squared);

struct FineTuneResult {
    StackedNetwork network;
    EpochTrace trace;
};

/// End-to-end denoising backprop through encoder and decoder. Tied weights
/// are not re-imposed.
FineTuneResult fine_tune(const StackedNetwork& network, const Matrix& data, const TrainConfig& config);

/// Innermost (code) activation for every row.
Matrix encode(const StackedNetwork& network, const Matrix& data);
Matrix reconstruct(const StackedNetwork& network, const Matrix& data);

/// {L, 3k, 2k, k} for depth 4; geometric steps from L down to k otherwise.
std::vector<Eigen::Index> default_widths(Eigen::Index bands, Eigen::Index k, std::size_t depth = 4);

struct StackFit {
    StackedNetwork network;
    PretrainResult pretrain;
    EpochTrace fine_tune_trace;
};

/// greedy_pretrain -> assemble_stack -> fine_tune on already centred data.
/// Fine-tuning runs with layer_seed(config.seed, widths.size()).
StackFit fit_stack(const Matrix& data, const std::vector<Eigen::Index>& widths, const TrainConfig& config);

struct SegmentModel {
    RowVector means;
    StackFit fit;
    double fit_ms = 0.0;  // wall clock; informational only
};

struct UdaeModel {
    SegmentPlan plan;
    std::vector<SegmentModel> segments;
    std::vector<Eigen::Index> widths;
    TrainConfig config;

    Eigen::Index input_dim() const { return segments.empty() ? 0 : segments.front().fit.network.input_dim(); }
    Eigen::Index code_dim() const { return widths.empty() ? 0 : widths.back(); }
};

/// Splits the cube into `segments` contiguous pixel blocks and fits one
/// stacked network per block, each on its own zero-mean data with seed
/// config.seed + block index. Blocks train on up to `threads` workers
/// (0 = hardware concurrency); results do not depend on the worker count.
/// Empty `widths` selects default_widths(L, k).
UdaeModel fit_udae(const HyperCube& cube, Eigen::Index k, std::size_t segments, const TrainConfig& config,
                   std::vector<Eigen::Index> widths = {}, unsigned threads = 0);

/// Encodes every pixel with its block's network after that block's centring.
Matrix transform(const UdaeModel& model, const HyperCube& cube);

}  // namespace udae
