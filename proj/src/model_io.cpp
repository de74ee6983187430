#include "udae/model_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "udae/error.hpp"

namespace udae {

namespace {

constexpr const char* kFormat = "udae-model";
constexpr int kVersion = 1;

std::vector<double> flatten(const Matrix& m) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
    return out;
}

Matrix unflatten(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols) {
    if (static_cast<Eigen::Index>(v.size()) != rows * cols)
        throw Error(ErrorCode::BadShape, "array of " + std::to_string(v.size()) + " values cannot fill " +
                                             std::to_string(rows) + "x" + std::to_string(cols));
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v[static_cast<std::size_t>(i * cols + j)];
    return m;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }
std::vector<double> to_std(const RowVector& v) { return {v.data(), v.data() + v.size()}; }

Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_envelope(const json& j, const char* method) {
    if (j.value("format", std::string{}) != kFormat || j.value("version", 0) != kVersion)
        throw Error(ErrorCode::BadConfig, "not a version-1 udae-model document");
    if (j.value("method", std::string{}) != method)
        throw Error(ErrorCode::BadConfig, std::string("model method is not '") + method + "'");
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename F>
auto json_guard(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadConfig, std::string("malformed model document: ") + e.what());
    }
}

}  // namespace

json to_json(const TrainConfig& c) {
    return {{"noise_fraction", c.noise_fraction},
            {"learning_rate", c.learning_rate},
            {"init_scale", c.init_scale},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"loss", std::string(to_string(c.loss))},
            {"mode", std::string(to_string(c.mode))},
            {"corruption", std::string(to_string(c.corruption))},
            {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
    return json_guard([&] {
        TrainConfig c;
        c.noise_fraction = j.at("noise_fraction").get<double>();
        c.learning_rate = j.at("learning_rate").get<double>();
        c.init_scale = j.at("init_scale").get<double>();
        c.epochs = j.at("epochs").get<int>();
        c.batch_size = j.at("batch_size").get<std::size_t>();
        c.loss = parse_loss(j.at("loss").get<std::string>());
        c.mode = parse_mode(j.at("mode").get<std::string>());
        c.corruption = parse_corruption(j.at("corruption").get<std::string>());
        c.seed = j.at("seed").get<Seed>();
        return c;
    });
}

json to_json(const LayerParams& layer) {
    return {{"activation", std::string(to_string(layer.activation))},
            {"in_dim", layer.in_dim()},
            {"out_dim", layer.out_dim()},
            {"weight", flatten(layer.weight)},
            {"bias", to_std(layer.bias)}};
}

LayerParams layer_from_json(const json& j) {
    return json_guard([&] {
        LayerParams layer;
        layer.activation = parse_activation(j.at("activation").get<std::string>());
        const auto in = j.at("in_dim").get<Eigen::Index>();
        const auto out = j.at("out_dim").get<Eigen::Index>();
        layer.weight = unflatten(j.at("weight").get<std::vector<double>>(), out, in);
        layer.bias = to_vector(j.at("bias").get<std::vector<double>>());
        layer.validate();
        return layer;
    });
}

json to_json(const UdaeModel& model) {
    json ranges = json::array();
    for (const auto& r : model.plan.ranges) ranges.push_back({r.begin, r.end});

    json segments = json::array();
    for (const auto& seg : model.segments) {
        json encoder = json::array();
        json decoder = json::array();
        for (const auto& l : seg.fit.network.encoder) encoder.push_back(to_json(l));
        for (const auto& l : seg.fit.network.decoder) decoder.push_back(to_json(l));
        json pretrain = json::array();
        for (const auto& t : seg.fit.pretrain.traces) pretrain.push_back(t.errors);
        segments.push_back({{"means", to_std(seg.means)},
                            {"encoder", std::move(encoder)},
                            {"decoder", std::move(decoder)},
                            {"pretrain_errors", seg.fit.pretrain.layer_errors},
                            {"pretrain_traces", std::move(pretrain)},
                            {"fine_tune_trace", seg.fit.fine_tune_trace.errors}});
    }
    return {{"format", kFormat},
            {"version", kVersion},
            {"method", "udae"},
            {"config", to_json(model.config)},
            {"widths", model.widths},
            {"segment_plan", {{"pixels", model.plan.pixels()}, {"ranges", std::move(ranges)}}},
            {"segments", std::move(segments)}};
}

UdaeModel udae_model_from_json(const json& j) {
    check_envelope(j, "udae");
    return json_guard([&] {
        UdaeModel model;
        model.config = train_config_from_json(j.at("config"));
        model.widths = j.at("widths").get<std::vector<Eigen::Index>>();
        for (const auto& r : j.at("segment_plan").at("ranges"))
            model.plan.ranges.push_back({r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>()});
        for (const auto& s : j.at("segments")) {
            SegmentModel seg;
            seg.means = to_vector(s.at("means").get<std::vector<double>>()).transpose();
            for (const auto& l : s.at("encoder")) seg.fit.network.encoder.push_back(layer_from_json(l));
            for (const auto& l : s.at("decoder")) seg.fit.network.decoder.push_back(layer_from_json(l));
            // Pretrained weights are not stored; only their errors and traces are.
            seg.fit.pretrain.layer_errors = s.at("pretrain_errors").get<std::vector<double>>();
            for (const auto& t : s.at("pretrain_traces"))
                seg.fit.pretrain.traces.push_back({t.get<std::vector<double>>()});
            seg.fit.fine_tune_trace.errors = s.at("fine_tune_trace").get<std::vector<double>>();
            const StackedNetwork& net = seg.fit.network;
            if (net.encoder.empty() || net.decoder.size() != net.encoder.size() || net.widths() != model.widths ||
                seg.means.size() != net.input_dim() || net.decoder.back().out_dim() != net.input_dim())
                throw Error(ErrorCode::BadShape, "segment " + std::to_string(model.segments.size()) +
                                                     " network does not match the stored widths");
            model.segments.push_back(std::move(seg));
        }
        if (model.segments.size() != model.plan.count())
            throw Error(ErrorCode::SegmentCoverageError, "segment count does not match the segment plan");
        return model;
    });
}

json to_json(const PcaModel& model) {
    return {{"format", kFormat},
            {"version", kVersion},
            {"method", "pca"},
            {"pca",
             {{"bands", model.bands()},
              {"k", model.k()},
              {"mean", to_std(model.mean)},
              {"components", flatten(model.components)},
              {"eigenvalues", to_std(model.eigenvalues)},
              {"total_variance", model.total_variance}}}};
}

PcaModel pca_model_from_json(const json& j) {
    check_envelope(j, "pca");
    return json_guard([&] {
        const json& p = j.at("pca");
        PcaModel model;
        const auto bands = p.at("bands").get<Eigen::Index>();
        const auto k = p.at("k").get<Eigen::Index>();
        model.mean = to_vector(p.at("mean").get<std::vector<double>>()).transpose();
        model.components = unflatten(p.at("components").get<std::vector<double>>(), k, bands);
        model.eigenvalues = to_vector(p.at("eigenvalues").get<std::vector<double>>());
        model.total_variance = p.at("total_variance").get<double>();
        if (model.mean.size() != bands || model.eigenvalues.size() != k)
            throw Error(ErrorCode::BadShape, "pca mean or eigenvalue length disagrees with bands/k");
        return model;
    });
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed on " + path.string());
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadConfig, path.string() + " is not valid JSON: " + e.what());
    }
}

void write_features_csv(const std::filesystem::path& path, const Matrix& features, const std::vector<int>& labels) {
    if (static_cast<std::size_t>(features.rows()) != labels.size())
        throw Error(ErrorCode::LengthMismatch, "feature rows and label count differ");
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    for (Eigen::Index j = 0; j < features.cols(); ++j) out << 'f' << (j + 1) << ',';
    out << "label\n";
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        for (Eigen::Index j = 0; j < features.cols(); ++j) out << format_double(features(i, j)) << ',';
        out << labels[static_cast<std::size_t>(i)] << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed on " + path.string());
}

FeatureTable read_features_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::IoError, path.string() + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    const bool has_label = !header.empty() && header.back() == "label";
    const std::size_t width = header.size() - (has_label ? 1 : 0);
    if (width == 0) throw Error(ErrorCode::BadShape, path.string() + " has no feature columns");

    std::vector<double> values;
    FeatureTable table;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col < width) {
                try {
                    std::size_t used = 0;
                    values.push_back(std::stod(cell, &used));
                    if (used != cell.size()) throw std::invalid_argument(cell);
                } catch (const std::exception&) {
                    throw Error(ErrorCode::IoError, path.string() + ": bad number '" + cell + "'");
                }
            } else if (has_label && col == width) {
                int v = 0;
                auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (ec != std::errc() || ptr != cell.data() + cell.size())
                    throw Error(ErrorCode::IoError, path.string() + ": bad label '" + cell + "'");
                table.labels.push_back(v);
            }
            ++col;
        }
        if (col != header.size())
            throw Error(ErrorCode::BadShape, path.string() + ": row " + std::to_string(rows + 1) + " has " +
                                                 std::to_string(col) + " fields, header has " +
                                                 std::to_string(header.size()));
        ++rows;
    }
    table.features = unflatten(values, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
    return table;
}

void write_trace_csv(const std::filesystem::path& path, const UdaeModel& model) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << "segment,stage,layer,epoch,error\n";
    for (std::size_t s = 0; s < model.segments.size(); ++s) {
        const auto& fit = model.segments[s].fit;
        for (std::size_t layer = 0; layer < fit.pretrain.traces.size(); ++layer) {
            const auto& errs = fit.pretrain.traces[layer].errors;
            for (std::size_t e = 0; e < errs.size(); ++e)
                out << s << ",pretrain," << (layer + 1) << ',' << (e + 1) << ',' << format_double(errs[e]) << '\n';
        }
        const auto& errs = fit.fine_tune_trace.errors;
        for (std::size_t e = 0; e < errs.size(); ++e)
            out << s << ",finetune,0," << (e + 1) << ',' << format_double(errs[e]) << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed on " + path.string());
}

void write_pca_trace_csv(const std::filesystem::path& path, const PcaModel& model) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << "component,eigenvalue,cumulative_fraction\n";
    double running = 0.0;
    for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i) {
        running += model.eigenvalues(i);
        const double frac = model.total_variance > 0.0 ? running / model.total_variance : 0.0;
        out << (i + 1) << ',' << format_double(model.eigenvalues(i)) << ',' << format_double(frac) << '\n';
    }
}

}  // namespace udae
