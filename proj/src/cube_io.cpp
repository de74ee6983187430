#include "udae/cube_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "udae/error.hpp"

namespace udae {

namespace {

using nlohmann::json;

std::size_t checked_size(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_unsigned())
        throw Error(ErrorCode::BadHeader, std::string("missing or non-integer key '") + key + "'");
    const auto v = j[key].get<std::size_t>();
    if (v == 0) throw Error(ErrorCode::BadHeader, std::string("key '") + key + "' must be positive");
    return v;
}

float load_le_float(const unsigned char* p) {
    std::uint32_t bits = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
                         (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

void store_le_float(float v, unsigned char* p) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    p[0] = static_cast<unsigned char>(bits & 0xFF);
    p[1] = static_cast<unsigned char>((bits >> 8) & 0xFF);
    p[2] = static_cast<unsigned char>((bits >> 16) & 0xFF);
    p[3] = static_cast<unsigned char>((bits >> 24) & 0xFF);
}

void check_wavelengths(const std::vector<double>& w, std::size_t bands) {
    if (w.empty()) return;
    if (w.size() != bands)
        throw Error(ErrorCode::BadShape, "wavelength count " + std::to_string(w.size()) +
                                             " != band count " + std::to_string(bands));
    for (std::size_t i = 1; i < w.size(); ++i)
        if (!(w[i] > w[i - 1])) throw Error(ErrorCode::BadShape, "wavelengths must be strictly increasing");
}

// Picks a near-square grid for P pixels: cols is the largest divisor <= sqrt(P).
std::pair<std::size_t, std::size_t> grid_for(std::size_t pixels) {
    std::size_t cols = 1;
    for (std::size_t d = 1; d * d <= pixels; ++d)
        if (pixels % d == 0) cols = d;
    return {pixels / cols, cols};
}

}  // namespace

void HyperCube::validate() const {
    if (data.rows() < 1 || data.cols() < 1) throw Error(ErrorCode::BadShape, "cube must have P >= 1 and L >= 1");
    if (rows * cols != pixels())
        throw Error(ErrorCode::BadShape, "grid " + std::to_string(rows) + "x" + std::to_string(cols) +
                                             " does not match " + std::to_string(pixels()) + " pixels");
    if (!data.allFinite()) throw Error(ErrorCode::NonFinite, "cube contains NaN or Inf");
    check_wavelengths(wavelengths, bands());
}

int GroundTruth::num_classes() const {
    int k = 0;
    for (int v : labels) k = std::max(k, v);
    return k;
}

std::size_t GroundTruth::labeled_count() const {
    return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int v) { return v > 0; }));
}

std::vector<std::size_t> GroundTruth::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes()), 0);
    for (int v : labels)
        if (v > 0) ++counts[static_cast<std::size_t>(v - 1)];
    return counts;
}

BandMask BandMask::parse(std::string_view spec) {
    BandMask mask;
    std::set<std::size_t> seen;
    auto parse_num = [&](std::string_view s) {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
            throw Error(ErrorCode::BadConfig, "bad band index '" + std::string(s) + "'");
        return v;
    };
    while (!spec.empty()) {
        const auto comma = spec.find(',');
        const auto item = spec.substr(0, comma);
        spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
        if (item.find_first_not_of(' ') == std::string_view::npos) continue;
        const auto dash = item.find('-');
        if (dash == std::string_view::npos) {
            seen.insert(parse_num(item));
        } else {
            const auto lo = parse_num(item.substr(0, dash));
            const auto hi = parse_num(item.substr(dash + 1));
            if (hi < lo) throw Error(ErrorCode::BadConfig, "descending band range '" + std::string(item) + "'");
            for (auto b = lo; b <= hi; ++b) seen.insert(b);
        }
    }
    mask.removed.assign(seen.begin(), seen.end());
    return mask;
}

CubeHeader read_header(const std::filesystem::path& header) {
    std::ifstream in(header);
    if (!in) throw Error(ErrorCode::BadHeader, "cannot open header " + header.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadHeader, std::string("header is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::BadHeader, "header must be a JSON object");

    CubeHeader h;
    h.rows = checked_size(j, "rows");
    h.cols = checked_size(j, "cols");
    h.bands = checked_size(j, "bands");
    if (j.value("dtype", std::string{}) != "float32")
        throw Error(ErrorCode::BadHeader, "dtype must be \"float32\"");
    if (j.value("byteorder", std::string{}) != "little")
        throw Error(ErrorCode::BadHeader, "byteorder must be \"little\"");
    if (j.contains("wavelengths")) {
        try {
            h.wavelengths = j["wavelengths"].get<std::vector<double>>();
        } catch (const json::exception&) {
            throw Error(ErrorCode::BadHeader, "wavelengths must be an array of numbers");
        }
        try {
            check_wavelengths(h.wavelengths, h.bands);
        } catch (const Error& e) {
            throw Error(ErrorCode::BadHeader, e.what());
        }
    }
    return h;
}

void write_header(const std::filesystem::path& header, const CubeHeader& h) {
    json j = {{"rows", h.rows}, {"cols", h.cols}, {"bands", h.bands}, {"dtype", "float32"}, {"byteorder", "little"}};
    if (!h.wavelengths.empty()) j["wavelengths"] = h.wavelengths;
    std::ofstream out(header);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + header.string());
    out << j.dump(2) << '\n';
}

HyperCube load_cube(const std::filesystem::path& data, const std::filesystem::path& header) {
    const CubeHeader h = read_header(header);
    const std::size_t pixels = h.rows * h.cols;
    const std::uintmax_t expected = std::uintmax_t(pixels) * h.bands * 4;

    std::error_code ec;
    const auto actual = std::filesystem::file_size(data, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot stat " + data.string() + ": " + ec.message());
    if (actual != expected)
        throw Error(ErrorCode::SizeMismatch, data.string() + " has " + std::to_string(actual) +
                                                 " bytes, header implies " + std::to_string(expected));

    std::ifstream in(data, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + data.string());
    std::vector<unsigned char> raw(static_cast<std::size_t>(expected));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw Error(ErrorCode::SizeMismatch, "short read on " + data.string());

    HyperCube cube;
    cube.rows = h.rows;
    cube.cols = h.cols;
    cube.wavelengths = h.wavelengths;
    cube.data.resize(static_cast<Eigen::Index>(pixels), static_cast<Eigen::Index>(h.bands));
    const unsigned char* p = raw.data();
    for (std::size_t px = 0; px < pixels; ++px) {
        for (std::size_t b = 0; b < h.bands; ++b, p += 4) {
            const float v = load_le_float(p);
            if (!std::isfinite(v))
                throw Error(ErrorCode::NonFinite, "non-finite value at pixel " + std::to_string(px) + ", band " +
                                                      std::to_string(b + 1));
            cube.data(static_cast<Eigen::Index>(px), static_cast<Eigen::Index>(b)) = v;
        }
    }
    return cube;
}

void save_cube(const HyperCube& cube, const std::filesystem::path& data, const std::filesystem::path& header) {
    cube.validate();
    std::vector<unsigned char> raw(cube.pixels() * cube.bands() * 4);
    unsigned char* p = raw.data();
    for (Eigen::Index px = 0; px < cube.data.rows(); ++px)
        for (Eigen::Index b = 0; b < cube.data.cols(); ++b, p += 4)
            store_le_float(static_cast<float>(cube.data(px, b)), p);

    std::ofstream out(data, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + data.string());
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed on " + data.string());
    write_header(header, CubeHeader{cube.rows, cube.cols, cube.bands(), cube.wavelengths});
}

HyperCube apply_band_mask(const HyperCube& cube, const BandMask& mask) {
    const std::size_t bands = cube.bands();
    std::vector<bool> drop(bands, false);
    for (std::size_t idx : mask.removed) {
        if (idx < 1 || idx > bands)
            throw Error(ErrorCode::IndexOutOfRange,
                        "band " + std::to_string(idx) + " outside 1.." + std::to_string(bands));
        drop[idx - 1] = true;
    }
    std::vector<Eigen::Index> keep;
    for (std::size_t b = 0; b < bands; ++b)
        if (!drop[b]) keep.push_back(static_cast<Eigen::Index>(b));
    if (keep.empty()) throw Error(ErrorCode::BadShape, "mask removes every band");

    HyperCube out;
    out.rows = cube.rows;
    out.cols = cube.cols;
    out.data = cube.data(Eigen::all, keep);
    if (!cube.wavelengths.empty())
        for (auto b : keep) out.wavelengths.push_back(cube.wavelengths[static_cast<std::size_t>(b)]);
    return out;
}

std::pair<Matrix, RowVector> center_columns(const Matrix& data) {
    RowVector means = data.colwise().mean();
    Matrix centered = data.rowwise() - means;
    return {std::move(centered), std::move(means)};
}

Normalized normalize_zero_mean(const HyperCube& cube) {
    auto [centered, means] = center_columns(cube.data);
    Normalized out{cube, std::move(means)};
    out.cube.data = std::move(centered);
    return out;
}

SegmentPlan make_segments(std::size_t pixels, std::size_t segments) {
    if (segments < 1 || segments > pixels)
        throw Error(ErrorCode::InvalidSegmentCount,
                    "segment count " + std::to_string(segments) + " outside 1.." + std::to_string(pixels));
    SegmentPlan plan;
    const std::size_t base = pixels / segments;
    const std::size_t extra = pixels % segments;
    std::size_t begin = 0;
    for (std::size_t s = 0; s < segments; ++s) {
        const std::size_t len = base + (s < extra ? 1 : 0);
        plan.ranges.push_back({begin, begin + len});
        begin += len;
    }
    return plan;
}

SynthData synth_cube(const SynthSpec& spec) {
    const std::size_t classes = spec.pixels_per_class.size();
    if (classes == 0) throw Error(ErrorCode::BadShape, "need at least one class");
    if (spec.bands == 0 || spec.intrinsic_dim == 0) throw Error(ErrorCode::BadShape, "bands and latent dim must be positive");
    if (spec.intrinsic_dim > spec.bands)
        throw Error(ErrorCode::BadShape, "latent dim " + std::to_string(spec.intrinsic_dim) + " exceeds band count " +
                                             std::to_string(spec.bands));
    if (!(spec.noise_sd >= 0.0) || !std::isfinite(spec.noise_sd))
        throw Error(ErrorCode::BadShape, "noise_sd must be a finite non-negative number");
    for (auto n : spec.pixels_per_class)
        if (n == 0) throw Error(ErrorCode::BadShape, "every class needs at least one pixel");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto L = static_cast<Eigen::Index>(spec.bands);
    const auto k = static_cast<Eigen::Index>(spec.intrinsic_dim);

    Matrix mixing(L, k);
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = 0; j < k; ++j) mixing(i, j) = gauss(rng) / std::sqrt(double(k));

    // Latent class points, spread so that classes stay distinct at low noise.
    std::vector<Vector> class_spectra;
    for (std::size_t c = 0; c < classes; ++c) {
        Vector latent(k);
        for (Eigen::Index j = 0; j < k; ++j) latent(j) = 2.0 * gauss(rng);
        if (spec.nonlinear) latent = latent.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        class_spectra.push_back(mixing * latent);
    }

    std::size_t pixels = 0;
    for (auto n : spec.pixels_per_class) pixels += n;

    SynthData out;
    out.cube.data.resize(static_cast<Eigen::Index>(pixels), L);
    out.truth.labels.reserve(pixels);
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        out.truth.class_names.push_back("class_" + std::to_string(c + 1));
        for (std::size_t i = 0; i < spec.pixels_per_class[c]; ++i, ++row) {
            for (Eigen::Index b = 0; b < L; ++b) {
                const double noise = spec.noise_sd > 0.0 ? spec.noise_sd * gauss(rng) : 0.0;
                out.cube.data(row, b) = class_spectra[c](b) + noise;
            }
            out.truth.labels.push_back(static_cast<int>(c + 1));
        }
    }
    std::tie(out.cube.rows, out.cube.cols) = grid_for(pixels);
    return out;
}

void validate_labels(const std::vector<int>& labels) {
    int k = 0;
    for (int v : labels) {
        if (v < 0) throw Error(ErrorCode::NonContiguousClasses, "negative class id " + std::to_string(v));
        k = std::max(k, v);
    }
    std::vector<bool> present(static_cast<std::size_t>(k), false);
    for (int v : labels)
        if (v > 0) present[static_cast<std::size_t>(v - 1)] = true;
    for (int c = 1; c <= k; ++c)
        if (!present[static_cast<std::size_t>(c - 1)])
            throw Error(ErrorCode::NonContiguousClasses,
                        "class " + std::to_string(c) + " missing while max class is " + std::to_string(k));
}

GroundTruth load_ground_truth(const std::filesystem::path& path, std::optional<std::size_t> expected_pixels) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    GroundTruth gt;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t");
        std::string_view field(line.data() + first, last - first + 1);
        int v = 0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc() || ptr != field.data() + field.size())
            throw Error(ErrorCode::IoError, path.string() + ":" + std::to_string(lineno) + ": not an integer label");
        gt.labels.push_back(v);
    }
    if (expected_pixels && gt.labels.size() != *expected_pixels)
        throw Error(ErrorCode::LengthMismatch, std::to_string(gt.labels.size()) + " labels for " +
                                                   std::to_string(*expected_pixels) + " pixels");
    validate_labels(gt.labels);
    return gt;
}

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    for (int v : truth.labels) out << v << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed on " + path.string());
}

}  // namespace udae
