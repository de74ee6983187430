#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace udae {

/// Samples are rows, features are columns throughout the library.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

using Seed = std::uint64_t;

/// SplitMix64 step; used to derive independent sub-stream seeds from one
/// master seed.
inline Seed derive_seed(Seed base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace udae
