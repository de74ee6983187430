#include "udae/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "udae/error.hpp"

namespace udae {

std::size_t train_count(std::size_t count, double fraction) {
    // The epsilon keeps exact products such as 0.3 * 10 from rounding up.
    auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(count) - 1e-9));
    n = std::max<std::size_t>(n, 1);
    return std::min(n, count - 1);
}

Split split(const std::vector<int>& labels, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw Error(ErrorCode::BadConfig, "train fraction must lie in (0,1)");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) throw Error(ErrorCode::LabelOutOfRange, "negative label at pixel " + std::to_string(i));
        if (labels[i] > 0) by_class[labels[i]].push_back(i);
    }

    std::mt19937_64 rng(spec.seed);
    Split out;
    for (auto& [cls, members] : by_class) {
        if (members.size() < 2)
            throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(cls) + " has " +
                                                      std::to_string(members.size()) + " labeled sample(s)");
        std::shuffle(members.begin(), members.end(), rng);
        const std::size_t n = train_count(members.size(), spec.train_fraction);
        out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n));
        out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n), members.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::vector<int> knn_classify(const Matrix& train, const std::vector<int>& train_labels, const Matrix& test,
                              std::size_t k_neighbors) {
    if (train.rows() == 0) throw Error(ErrorCode::EmptyTrainSet, "no training samples");
    if (static_cast<std::size_t>(train.rows()) != train_labels.size())
        throw Error(ErrorCode::ShapeMismatch, "train rows and label count differ");
    if (test.rows() > 0 && test.cols() != train.cols())
        throw Error(ErrorCode::ShapeMismatch, "train and test feature widths differ");
    if (k_neighbors < 1 || k_neighbors > static_cast<std::size_t>(train.rows()))
        throw Error(ErrorCode::BadK, "k_neighbors must lie in 1.." + std::to_string(train.rows()));

    const auto n_train = static_cast<std::size_t>(train.rows());
    std::vector<int> predicted(static_cast<std::size_t>(test.rows()));
    std::vector<double> dist2(n_train);
    std::vector<std::size_t> order(n_train);

    for (Eigen::Index t = 0; t < test.rows(); ++t) {
        for (std::size_t i = 0; i < n_train; ++i)
            dist2[i] = (train.row(static_cast<Eigen::Index>(i)) - test.row(t)).squaredNorm();
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_neighbors), order.end(),
                          [&](std::size_t a, std::size_t b) {
                              return dist2[a] != dist2[b] ? dist2[a] < dist2[b] : a < b;
                          });

        struct Tally {
            int votes = 0;
            double distance = 0.0;
        };
        std::map<int, Tally> tally;
        for (std::size_t n = 0; n < k_neighbors; ++n) {
            auto& entry = tally[train_labels[order[n]]];
            ++entry.votes;
            entry.distance += std::sqrt(dist2[order[n]]);
        }
        // map iterates class ids ascending, so strict comparisons keep the lower id on full ties.
        int best = 0;
        Tally best_tally{-1, 0.0};
        for (const auto& [cls, t2] : tally) {
            if (t2.votes > best_tally.votes || (t2.votes == best_tally.votes && t2.distance < best_tally.distance)) {
                best = cls;
                best_tally = t2;
            }
        }
        predicted[static_cast<std::size_t>(t)] = best;
    }
    return predicted;
}

ConfusionMatrix::ConfusionMatrix(int classes)
    : classes_(classes), counts_(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes), 0) {
    if (classes < 0) throw Error(ErrorCode::BadShape, "class count must be non-negative");
}

std::int64_t& ConfusionMatrix::at(int actual, int predicted) {
    if (actual < 1 || actual > classes_ || predicted < 1 || predicted > classes_)
        throw Error(ErrorCode::LabelOutOfRange, "cell (" + std::to_string(actual) + "," + std::to_string(predicted) +
                                                    ") outside 1.." + std::to_string(classes_));
    return counts_[static_cast<std::size_t>(actual - 1) * static_cast<std::size_t>(classes_) +
                   static_cast<std::size_t>(predicted - 1)];
}

std::int64_t ConfusionMatrix::at(int actual, int predicted) const {
    return const_cast<ConfusionMatrix*>(this)->at(actual, predicted);
}

std::int64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0}); }

std::int64_t ConfusionMatrix::row_sum(int actual) const {
    std::int64_t s = 0;
    for (int p = 1; p <= classes_; ++p) s += at(actual, p);
    return s;
}

std::int64_t ConfusionMatrix::col_sum(int predicted) const {
    std::int64_t s = 0;
    for (int a = 1; a <= classes_; ++a) s += at(a, predicted);
    return s;
}

std::int64_t ConfusionMatrix::diagonal_sum() const {
    std::int64_t s = 0;
    for (int c = 1; c <= classes_; ++c) s += at(c, c);
    return s;
}

ConfusionMatrix confusion(const std::vector<int>& actual, const std::vector<int>& predicted, int classes) {
    if (actual.size() != predicted.size())
        throw Error(ErrorCode::LengthMismatch, std::to_string(actual.size()) + " actual vs " +
                                                   std::to_string(predicted.size()) + " predicted labels");
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < actual.size(); ++i) ++cm.at(actual[i], predicted[i]);
    return cm;
}

double kappa(const ConfusionMatrix& cm) {
    const std::int64_t n = cm.total();
    if (n <= 0) throw Error(ErrorCode::EmptyMatrix, "confusion matrix is empty");
    std::int64_t chance = 0;
    for (int c = 1; c <= cm.classes(); ++c) chance += cm.row_sum(c) * cm.col_sum(c);
    const std::int64_t numerator = n * cm.diagonal_sum() - chance;
    const std::int64_t denominator = n * n - chance;
    if (denominator == 0)
        throw Error(ErrorCode::DegenerateMatrix, "chance agreement is total; kappa is undefined");
    return static_cast<double>(numerator) / static_cast<double>(denominator);
}

double overall_accuracy(const ConfusionMatrix& cm) {
    const std::int64_t n = cm.total();
    if (n <= 0) throw Error(ErrorCode::EmptyMatrix, "confusion matrix is empty");
    return static_cast<double>(cm.diagonal_sum()) / static_cast<double>(n);
}

std::vector<std::optional<double>> per_class_accuracy(const ConfusionMatrix& cm) {
    std::vector<std::optional<double>> out;
    for (int c = 1; c <= cm.classes(); ++c) {
        const auto row = cm.row_sum(c);
        if (row == 0)
            out.emplace_back(std::nullopt);
        else
            out.emplace_back(static_cast<double>(cm.at(c, c)) / static_cast<double>(row));
    }
    return out;
}

}  // namespace udae
