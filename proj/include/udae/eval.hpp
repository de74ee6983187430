#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "udae/types.hpp"

namespace udae {

struct SplitSpec {
    double train_fraction = 0.30;
    Seed seed = 0;
};

/// Pixel indices; both lists are sorted ascending.
struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Number of training samples drawn from a class of `count` samples:
/// ceil(fraction * count), at least 1 and at most count - 1.
std::size_t train_count(std::size_t count, double fraction);

/// Stratified random split over labeled pixels (label > 0). Unlabeled pixels
/// appear in neither list.
Split split(const std::vector<int>& labels, const SplitSpec& spec);

/// Euclidean kNN. Votes are tallied over the k nearest training rows (equal
/// distances resolved by lower training index). A vote tie goes to the class
/// with the smaller summed distance, then to the lower class id.
std::vector<int> knn_classify(const Matrix& train, const std::vector<int>& train_labels, const Matrix& test,
                              std::size_t k_neighbors);

/// Rows are actual classes, columns predicted classes; ids are 1-based.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int classes = 0);

    int classes() const { return classes_; }
    std::int64_t& at(int actual, int predicted);
    std::int64_t at(int actual, int predicted) const;
    std::int64_t total() const;
    std::int64_t row_sum(int actual) const;
    std::int64_t col_sum(int predicted) const;
    std::int64_t diagonal_sum() const;

private:
    int classes_;
    std::vector<std::int64_t> counts_;
};

ConfusionMatrix confusion(const std::vector<int>& actual, const std::vector<int>& predicted, int classes);

/// kappa = (n * sum(diag) - sum(row_k * col_k)) / (n^2 - sum(row_k * col_k)).
double kappa(const ConfusionMatrix& cm);
double overall_accuracy(const ConfusionMatrix& cm);
/// Recall per actual class; empty rows yield nullopt.
std::vector<std::optional<double>> per_class_accuracy(const ConfusionMatrix& cm);

}  // namespace udae
