#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "udae/types.hpp"

namespace udae {

/// Hyperspectral cube stored pixels-as-rows, bands-as-columns. Row index is
/// the row-major position on the spatial grid.
struct HyperCube {
    Matrix data;                       // P x L
    std::size_t rows = 0;              // spatial grid rows
    std::size_t cols = 0;              // spatial grid cols
    std::vector<double> wavelengths;   // empty, or one centre wavelength (nm) per band

    std::size_t pixels() const { return static_cast<std::size_t>(data.rows()); }
    std::size_t bands() const { return static_cast<std::size_t>(data.cols()); }

    /// Throws BadShape / NonFinite when an invariant is broken.
    void validate() const;
};

/// Per-pixel class ids: 0 is unlabeled, labeled pixels use 1..K.
struct GroundTruth {
    std::vector<int> labels;
    std::vector<std::string> class_names;

    int num_classes() const;
    std::size_t labeled_count() const;
    /// counts[c-1] is the number of pixels of class c.
    std::vector<std::size_t> class_counts() const;
};

/// Sorted, unique, 1-based band indices to drop.
struct BandMask {
    std::vector<std::size_t> removed;

    /// Parses "108-112,154-167,224". Empty string gives an empty mask.
    static BandMask parse(std::string_view spec);
};

struct SegmentRange {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive

    std::size_t size() const { return end - begin; }
    bool operator==(const SegmentRange&) const = default;
};

/// Equal contiguous partition of the flattened pixel index.
struct SegmentPlan {
    std::vector<SegmentRange> ranges;

    std::size_t count() const { return ranges.size(); }
    std::size_t pixels() const { return ranges.empty() ? 0 : ranges.back().end; }
    bool operator==(const SegmentPlan&) const = default;
};

struct CubeHeader {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t bands = 0;
    std::vector<double> wavelengths;
};

CubeHeader read_header(const std::filesystem::path& header);
void write_header(const std::filesystem::path& header, const CubeHeader& h);

/// Reads a raw little-endian float32 band-interleaved-by-pixel file described
/// by a JSON sidecar (rows, cols, bands, dtype, byteorder).
HyperCube load_cube(const std::filesystem::path& data, const std::filesystem::path& header);

/// Writes the cube as float32; values are narrowed from double.
void save_cube(const HyperCube& cube, const std::filesystem::path& data,
               const std::filesystem::path& header);

HyperCube apply_band_mask(const HyperCube& cube, const BandMask& mask);

struct Normalized {
    HyperCube cube;
    RowVector means;  // one per band
};

/// Shifts every band to zero mean. Adding `means` back to each row inverts it.
Normalized normalize_zero_mean(const HyperCube& cube);

/// Same shift applied to a bare matrix.
std::pair<Matrix, RowVector> center_columns(const Matrix& data);

SegmentPlan make_segments(std::size_t pixels, std::size_t segments);

struct SynthSpec {
    std::vector<std::size_t> pixels_per_class;  // one entry per class
    std::size_t bands = 16;
    std::size_t intrinsic_dim = 4;
    double noise_sd = 0.01;
    Seed seed = 0;
    /// Passes latent class points through an elementwise sigmoid before the
    /// linear band mixing.
    bool nonlinear = false;
};

struct SynthData {
    HyperCube cube;
    GroundTruth truth;
};

/// Class spectra are fixed latent points mapped through a random L x k
/// linear map plus Gaussian band noise. Pixels of one class are contiguous in
/// row-major order.
SynthData synth_cube(const SynthSpec& spec);

/// One integer per line, row-major pixel order. `expected_pixels` enables
/// the length check.
GroundTruth load_ground_truth(const std::filesystem::path& path,
                              std::optional<std::size_t> expected_pixels = std::nullopt);

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);

/// Checks that labeled ids form exactly 1..K.
void validate_labels(const std::vector<int>& labels);

}  // namespace udae
