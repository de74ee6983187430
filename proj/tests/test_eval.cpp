#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "udae/error.hpp"
#include "udae/eval.hpp"

using namespace udae;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected udae::Error");
    return ErrorCode::IoError;
}

std::vector<int> repeat_classes(const std::vector<std::size_t>& counts) {
    std::vector<int> labels;
    for (std::size_t c = 0; c < counts.size(); ++c) labels.insert(labels.end(), counts[c], static_cast<int>(c + 1));
    return labels;
}

// Exhaustive reference: full sort of (distance, index), then the same tie rules.
std::vector<int> knn_oracle(const Matrix& train, const std::vector<int>& labels, const Matrix& test, std::size_t k) {
    std::vector<int> out;
    for (Eigen::Index t = 0; t < test.rows(); ++t) {
        std::vector<std::pair<double, Eigen::Index>> all;
        for (Eigen::Index i = 0; i < train.rows(); ++i) {
            double d = 0.0;
            for (Eigen::Index j = 0; j < train.cols(); ++j) d += (train(i, j) - test(t, j)) * (train(i, j) - test(t, j));
            all.emplace_back(d, i);
        }
        std::sort(all.begin(), all.end());
        std::map<int, std::pair<int, double>> tally;
        for (std::size_t n = 0; n < k; ++n) {
            auto& slot = tally[labels[static_cast<std::size_t>(all[n].second)]];
            slot.first += 1;
            slot.second += std::sqrt(all[n].first);
        }
        int best = 0, votes = -1;
        double dist = 0.0;
        for (const auto& [cls, v] : tally) {
            if (v.first > votes || (v.first == votes && v.second < dist)) {
                best = cls;
                votes = v.first;
                dist = v.second;
            }
        }
        out.push_back(best);
    }
    return out;
}

ConfusionMatrix matrix_of(const std::vector<std::vector<std::int64_t>>& rows) {
    ConfusionMatrix cm(static_cast<int>(rows.size()));
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t p = 0; p < rows.size(); ++p) cm.at(int(a + 1), int(p + 1)) = rows[a][p];
    return cm;
}

}  // namespace

TEST_CASE("train_count follows the ceiling rule") {
    CHECK(train_count(10, 0.3) == 3);
    CHECK(train_count(2, 0.3) == 1);
    CHECK(train_count(2, 0.99) == 1);
    CHECK(train_count(3, 0.01) == 1);
    CHECK(train_count(100, 0.3) == 30);  // 0.3 * 100 is 30.000000000000004 in binary
}

TEST_CASE("split") {
    SUBCASE("10 samples at 0.3") {
        const Split s = split(repeat_classes({10}), {0.3, 1});
        CHECK(s.train.size() == 3);
        CHECK(s.test.size() == 7);
    }
    SUBCASE("Salinas-A class counts") {
        const std::vector<std::size_t> counts = {391, 1343, 616, 1525, 674, 799};
        const std::vector<int> labels = repeat_classes(counts);
        const Split s = split(labels, {0.30, 5});
        const std::vector<std::size_t> expected = {118, 403, 185, 458, 203, 240};
        std::vector<std::size_t> got(6, 0);
        for (auto i : s.train) ++got[static_cast<std::size_t>(labels[i] - 1)];
        CHECK(got == expected);
        CHECK(s.train.size() + s.test.size() == 5348);
    }
    SUBCASE("deterministic given seed") {
        const std::vector<int> labels = repeat_classes({40, 25, 31});
        const Split a = split(labels, {0.3, 9});
        const Split b = split(labels, {0.3, 9});
        CHECK(a.train == b.train);
        CHECK(a.test == b.test);
        CHECK(split(labels, {0.3, 10}).train != a.train);
    }
    SUBCASE("disjoint and exhaustive over labeled pixels") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            std::uniform_int_distribution<int> cls(0, 4);
            std::vector<int> labels(200);
            for (auto& v : labels) v = cls(rng);
            for (int c = 1; c <= 4; ++c) labels[static_cast<std::size_t>(c)] = labels[static_cast<std::size_t>(c + 10)] = c;
            const Split s = split(labels, {0.3, static_cast<Seed>(trial)});
            std::set<std::size_t> train(s.train.begin(), s.train.end()), test(s.test.begin(), s.test.end());
            CHECK(train.size() == s.train.size());
            CHECK(std::is_sorted(s.train.begin(), s.train.end()));
            CHECK(std::is_sorted(s.test.begin(), s.test.end()));
            std::set<std::size_t> labeled;
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (labels[i] > 0) labeled.insert(i);
            std::set<std::size_t> joined = train;
            joined.insert(test.begin(), test.end());
            CHECK(joined == labeled);
            CHECK(joined.size() == train.size() + test.size());
        }
    }
    SUBCASE("a class with a single sample is rejected") {
        CHECK(code_of([] { split({1, 1, 1, 2}, {0.3, 0}); }) == ErrorCode::ClassTooSmall);
    }
}

TEST_CASE("knn_classify") {
    SUBCASE("zero distance wins at k=1") {
        Matrix train(3, 2);
        train << 0, 0, 5, 5, 9, 1;
        Matrix test(1, 2);
        test << 5, 5;
        CHECK(knn_classify(train, {1, 2, 3}, test, 1) == std::vector<int>{2});
    }
    SUBCASE("geometry") {
        Matrix train(5, 2);
        train << 0, 0, 0, 0, 0, 0, 10, 10, 10, 10;
        Matrix test(1, 2);
        test << 1, 1;
        CHECK(knn_classify(train, {1, 1, 1, 2, 2}, test, 3) == std::vector<int>{1});
    }
    SUBCASE("vote tie goes to the nearer class, then the lower id") {
        Matrix train(2, 1);
        train << 1.0, -3.0;
        Matrix test(1, 1);
        test << 0.0;
        CHECK(knn_classify(train, {2, 1}, test, 2) == std::vector<int>{2});
        train << 2.0, -2.0;
        CHECK(knn_classify(train, {2, 1}, test, 2) == std::vector<int>{1});
    }
    SUBCASE("equal distances prefer the lower training index") {
        Matrix train(2, 1);
        train << 1.0, -1.0;
        Matrix test(1, 1);
        test << 0.0;
        CHECK(knn_classify(train, {2, 1}, test, 1) == std::vector<int>{2});
    }
    SUBCASE("matches the exhaustive oracle on random 2-D points") {
        std::mt19937_64 rng(50);
        std::normal_distribution<double> g(0.0, 1.0);
        std::uniform_int_distribution<int> cls(1, 3);
        for (int trial = 0; trial < 10; ++trial) {
            Matrix pts(50, 2);
            std::vector<int> labels(50);
            for (Eigen::Index i = 0; i < 50; ++i) {
                pts(i, 0) = g(rng);
                pts(i, 1) = g(rng);
                labels[static_cast<std::size_t>(i)] = cls(rng);
            }
            Matrix queries(50, 2);
            for (Eigen::Index i = 0; i < queries.size(); ++i) queries(i) = g(rng);
            for (std::size_t k : {1u, 3u, 5u}) {
                CHECK(knn_classify(pts, labels, queries, k) == knn_oracle(pts, labels, queries, k));
                CHECK(knn_classify(pts, labels, pts, k) == knn_oracle(pts, labels, pts, k));
            }
        }
    }
    SUBCASE("k=1 on the training set reproduces its labels") {
        std::mt19937_64 rng(51);
        std::normal_distribution<double> g(0.0, 1.0);
        Matrix pts(40, 3);
        for (Eigen::Index i = 0; i < pts.size(); ++i) pts(i) = g(rng);
        std::vector<int> labels(40);
        for (std::size_t i = 0; i < 40; ++i) labels[i] = int(i % 4) + 1;
        CHECK(knn_classify(pts, labels, pts, 1) == labels);
    }
    SUBCASE("errors") {
        const Matrix train = Matrix::Zero(3, 2);
        CHECK(code_of([] { knn_classify(Matrix(0, 2), {}, Matrix::Zero(1, 2), 1); }) == ErrorCode::EmptyTrainSet);
        CHECK(code_of([&] { knn_classify(train, {1, 1, 2}, Matrix::Zero(1, 3), 1); }) == ErrorCode::ShapeMismatch);
        CHECK(code_of([&] { knn_classify(train, {1, 1, 2}, Matrix::Zero(1, 2), 4); }) == ErrorCode::BadK);
        CHECK(code_of([&] { knn_classify(train, {1, 1, 2}, Matrix::Zero(1, 2), 0); }) == ErrorCode::BadK);
        CHECK(code_of([&] { knn_classify(train, {1, 2}, Matrix::Zero(1, 2), 1); }) == ErrorCode::ShapeMismatch);
    }
}

TEST_CASE("confusion") {
    SUBCASE("hand tally of ten pairs") {
        const std::vector<int> actual = {1, 1, 2, 3, 2, 1, 3, 3, 2, 1};
        const std::vector<int> predicted = {1, 2, 2, 3, 1, 1, 3, 2, 2, 3};
        const ConfusionMatrix cm = confusion(actual, predicted, 3);
        // actual 1: predicted 1,2,1,3 -> [2,1,1]; actual 2: 2,1,2 -> [1,2,0]; actual 3: 3,3,2 -> [0,1,2]
        const std::vector<std::vector<std::int64_t>> hand = {{2, 1, 1}, {1, 2, 0}, {0, 1, 2}};
        for (int a = 1; a <= 3; ++a)
            for (int p = 1; p <= 3; ++p) CHECK(cm.at(a, p) == hand[std::size_t(a - 1)][std::size_t(p - 1)]);
        CHECK(cm.total() == 10);
        CHECK(cm.diagonal_sum() == 6);
        CHECK(cm.row_sum(1) == 4);
        CHECK(cm.col_sum(2) == 4);
    }
    SUBCASE("perfect predictions are diagonal; constant predictions fill one column") {
        const std::vector<int> labels = {1, 2, 3, 3, 2};
        const ConfusionMatrix diag = confusion(labels, labels, 3);
        CHECK(diag.diagonal_sum() == 5);
        const ConfusionMatrix ones = confusion(labels, std::vector<int>(5, 1), 3);
        CHECK(ones.col_sum(1) == 5);
        CHECK(ones.col_sum(2) + ones.col_sum(3) == 0);
    }
    SUBCASE("errors") {
        CHECK(code_of([] { confusion({1, 2}, {1}, 2); }) == ErrorCode::LengthMismatch);
        CHECK(code_of([] { confusion({1, 3}, {1, 1}, 2); }) == ErrorCode::LabelOutOfRange);
        CHECK(code_of([] { confusion({1, 0}, {1, 1}, 2); }) == ErrorCode::LabelOutOfRange);
        ConfusionMatrix cm(2);
        CHECK(code_of([&] { cm.at(3, 1); }) == ErrorCode::LabelOutOfRange);
    }
}

TEST_CASE("kappa") {
    CHECK(kappa(matrix_of({{40, 10}, {20, 30}})) == 0.4);
    CHECK(kappa(matrix_of({{25, 25}, {25, 25}})) == 0.0);

    SUBCASE("random diagonal matrices give 1") {
        std::mt19937_64 rng(60);
        std::uniform_int_distribution<int> count(1, 500), size(1, 8);
        for (int trial = 0; trial < 100; ++trial) {
            ConfusionMatrix cm(size(rng));
            for (int c = 1; c <= cm.classes(); ++c) cm.at(c, c) = count(rng);
            if (cm.classes() == 1) {
                CHECK(code_of([&] { kappa(cm); }) == ErrorCode::DegenerateMatrix);
                continue;
            }
            CHECK(kappa(cm) == doctest::Approx(1.0).epsilon(1e-15));
        }
    }
    SUBCASE("uniform scaling leaves kappa unchanged") {
        std::mt19937_64 rng(61);
        std::uniform_int_distribution<int> count(0, 50);
        for (int trial = 0; trial < 50; ++trial) {
            ConfusionMatrix cm(4), scaled(4);
            for (int a = 1; a <= 4; ++a)
                for (int p = 1; p <= 4; ++p) {
                    cm.at(a, p) = count(rng) + (a == p ? 1 : 0);
                    scaled.at(a, p) = 3 * cm.at(a, p);
                }
            CHECK(kappa(scaled) == doctest::Approx(kappa(cm)).epsilon(1e-14));
        }
    }
    SUBCASE("chance agreement gives 0") {
        // Every row proportional to the column marginals (2:3:5).
        std::mt19937_64 rng(62);
        std::uniform_int_distribution<int> mult(1, 20);
        for (int trial = 0; trial < 50; ++trial) {
            ConfusionMatrix cm(3);
            const std::int64_t shares[3] = {2, 3, 5};
            for (int a = 1; a <= 3; ++a) {
                const int m = mult(rng);
                for (int p = 1; p <= 3; ++p) cm.at(a, p) = m * shares[p - 1];
            }
            CHECK(std::abs(kappa(cm)) < 1e-15);
        }
    }
    SUBCASE("degenerate and empty matrices") {
        CHECK(code_of([] { kappa(matrix_of({{5, 0}, {0, 0}})); }) == ErrorCode::DegenerateMatrix);
        CHECK(code_of([] { kappa(ConfusionMatrix(2)); }) == ErrorCode::EmptyMatrix);
    }
}

TEST_CASE("overall and per-class accuracy") {
    CHECK(overall_accuracy(matrix_of({{40, 10}, {20, 30}})) == doctest::Approx(0.70).epsilon(1e-15));
    CHECK(overall_accuracy(matrix_of({{7, 0}, {0, 3}})) == 1.0);
    CHECK(overall_accuracy(matrix_of({{0, 4}, {6, 0}})) == 0.0);
    CHECK(code_of([] { overall_accuracy(ConfusionMatrix(3)); }) == ErrorCode::EmptyMatrix);

    const auto per = per_class_accuracy(matrix_of({{40, 10, 0}, {20, 30, 0}, {0, 0, 0}}));
    REQUIRE(per.size() == 3);
    CHECK(*per[0] == doctest::Approx(0.8));
    CHECK(*per[1] == doctest::Approx(0.6));
    CHECK(!per[2].has_value());
}
