#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "udae/nn.hpp"
#include "udae/pca.hpp"
#include "udae/stack.hpp"

namespace udae {

using json = nlohmann::json;

json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const json& j);

json to_json(const LayerParams& layer);
LayerParams layer_from_json(const json& j);

/// Model envelope: {"format": "udae-model", "version": 1, "method": ...}.
json to_json(const UdaeModel& model);
json to_json(const PcaModel& model);
UdaeModel udae_model_from_json(const json& j);
PcaModel pca_model_from_json(const json& j);

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

struct FeatureTable {
    Matrix features;          // P x k
    std::vector<int> labels;  // empty when the file had no label column
};

/// Header f1..fk,label; one pixel per row; label column last.
void write_features_csv(const std::filesystem::path& path, const Matrix& features, const std::vector<int>& labels);
FeatureTable read_features_csv(const std::filesystem::path& path);

/// segment,stage,layer,epoch,error. Pretraining rows carry their 1-based
/// layer; fine-tuning rows use layer 0.
void write_trace_csv(const std::filesystem::path& path, const UdaeModel& model);

/// component,eigenvalue,cumulative_fraction for a PCA fit.
void write_pca_trace_csv(const std::filesystem::path& path, const PcaModel& model);

}  // namespace udae
