#include "udae/pca.hpp"

#include <Eigen/Eigenvalues>

#include "udae/error.hpp"

namespace udae {

PcaModel pca_fit(const Matrix& data, Eigen::Index k) {
    if (data.rows() < 2) throw Error(ErrorCode::BadShape, "PCA needs at least two samples");
    if (k < 1 || k > std::min(data.rows(), data.cols()))
        throw Error(ErrorCode::BadK, "k=" + std::to_string(k) + " outside 1.." +
                                         std::to_string(std::min(data.rows(), data.cols())));
    if (!data.allFinite()) throw Error(ErrorCode::NonFinite, "PCA input contains NaN or Inf");

    PcaModel model;
    model.mean = data.colwise().mean();
    const Matrix centered = data.rowwise() - model.mean;
    const Matrix cov = (centered.transpose() * centered) / static_cast<double>(data.rows() - 1);
    model.total_variance = cov.trace();

    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorCode::ConvergenceError, "symmetric eigen-decomposition did not converge");

    // Eigen returns ascending eigenvalues; take the top k in reverse.
    const Eigen::Index L = data.cols();
    model.components.resize(k, L);
    model.eigenvalues.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::Index src = L - 1 - i;
        Vector axis = solver.eigenvectors().col(src);
        Eigen::Index pivot = 0;
        axis.cwiseAbs().maxCoeff(&pivot);
        if (axis(pivot) < 0.0) axis = -axis;
        model.components.row(i) = axis.transpose();
        model.eigenvalues(i) = solver.eigenvalues()(src);
    }
    return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& data) {
    if (data.cols() != model.bands())
        throw Error(ErrorCode::ShapeMismatch, "data has " + std::to_string(data.cols()) + " bands, model expects " +
                                                  std::to_string(model.bands()));
    return (data.rowwise() - model.mean) * model.components.transpose();
}

Matrix pca_reconstruct(const PcaModel& model, const Matrix& codes) {
    if (codes.cols() != model.k())
        throw Error(ErrorCode::ShapeMismatch, "codes have " + std::to_string(codes.cols()) + " columns, model has k=" +
                                                  std::to_string(model.k()));
    return (codes * model.components).rowwise() + model.mean;
}

}  // namespace udae
