#pragma once

#include "udae/types.hpp"

namespace udae {

/// Top-k principal axes of mean-centred data, largest variance first.
struct PcaModel {
    RowVector mean;         // 1 x L
    Matrix components;      // k x L, orthonormal rows
    Vector eigenvalues;     // k, non-increasing
    double total_variance = 0.0;  // trace of the sample covariance

    Eigen::Index bands() const { return components.cols(); }
    Eigen::Index k() const { return components.rows(); }
};

/// Sample covariance uses 1/(P-1). Each component is signed so its
/// largest-magnitude entry is positive.
PcaModel pca_fit(const Matrix& data, Eigen::Index k);

/// (data - mean) * components^T.
Matrix pca_transform(const PcaModel& model, const Matrix& data);

/// mean + codes * components.
Matrix pca_reconstruct(const PcaModel& model, const Matrix& codes);

}  // namespace udae
