#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include "udae/cube_io.hpp"
#include "udae/error.hpp"

using namespace udae;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "udae_test_cube_io";
    fs::create_directories(dir);
    return dir / name;
}

void write_raw(const fs::path& path, const std::vector<float>& values) {
    std::ofstream out(path, std::ios::binary);
    for (float v : values) {
        unsigned char b[4];
        std::memcpy(b, &v, 4);  // test host is little-endian
        out.write(reinterpret_cast<const char*>(b), 4);
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

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

}  // namespace

TEST_CASE("load_cube reads band-interleaved-by-pixel float32 in file order") {
    const auto raw = scratch("small.raw");
    const auto hdr = scratch("small.json");
    std::vector<float> values = {1.5f, -2.f, 3.25f, 4.f, 5.f, 6.f, 7.f, 8.f, 9.f, 10.f, 11.f, 12.5f};
    write_raw(raw, values);
    write_text(hdr, R"({"rows": 2, "cols": 2, "bands": 3, "dtype": "float32", "byteorder": "little"})");

    const HyperCube cube = load_cube(raw, hdr);
    CHECK(cube.pixels() == 4);
    CHECK(cube.bands() == 3);
    CHECK(cube.rows == 2);
    CHECK(cube.cols == 2);
    for (std::size_t i = 0; i < values.size(); ++i)
        CHECK(cube.data(static_cast<Eigen::Index>(i / 3), static_cast<Eigen::Index>(i % 3)) == values[i]);
}

TEST_CASE("load_cube rejects a short file instead of truncating") {
    const auto raw = scratch("short.raw");
    const auto hdr = scratch("short.json");
    write_raw(raw, std::vector<float>(10, 1.f));  // 40 bytes
    write_text(hdr, R"({"rows": 2, "cols": 2, "bands": 3, "dtype": "float32", "byteorder": "little"})");
    CHECK(code_of([&] { load_cube(raw, hdr); }) == ErrorCode::SizeMismatch);
}

TEST_CASE("load_cube handles a Salinas-A shaped cube") {
    const auto raw = scratch("salinas_a.raw");
    const auto hdr = scratch("salinas_a.json");
    write_raw(raw, std::vector<float>(86 * 83 * 204, 0.25f));
    write_text(hdr, R"({"rows": 86, "cols": 83, "bands": 204, "dtype": "float32", "byteorder": "little"})");
    const HyperCube cube = load_cube(raw, hdr);
    CHECK(cube.pixels() == 7138);
    CHECK(cube.bands() == 204);
    fs::remove(raw);
}

TEST_CASE("load_cube error paths") {
    const auto raw = scratch("bad.raw");
    const auto hdr = scratch("bad.json");
    write_raw(raw, {1.f, std::numeric_limits<float>::quiet_NaN(), 3.f, 4.f});

    SUBCASE("NaN in data") {
        write_text(hdr, R"({"rows": 1, "cols": 2, "bands": 2, "dtype": "float32", "byteorder": "little"})");
        CHECK(code_of([&] { load_cube(raw, hdr); }) == ErrorCode::NonFinite);
    }
    SUBCASE("wrong dtype") {
        write_text(hdr, R"({"rows": 1, "cols": 2, "bands": 2, "dtype": "float64", "byteorder": "little"})");
        CHECK(code_of([&] { load_cube(raw, hdr); }) == ErrorCode::BadHeader);
    }
    SUBCASE("big endian") {
        write_text(hdr, R"({"rows": 1, "cols": 2, "bands": 2, "dtype": "float32", "byteorder": "big"})");
        CHECK(code_of([&] { load_cube(raw, hdr); }) == ErrorCode::BadHeader);
    }
    SUBCASE("missing key") {
        write_text(hdr, R"({"rows": 1, "bands": 2, "dtype": "float32", "byteorder": "little"})");
        CHECK(code_of([&] { load_cube(raw, hdr); }) == ErrorCode::BadHeader);
    }
    SUBCASE("not json") {
        write_text(hdr, "rows = 1");
        CHECK(code_of([&] { load_cube(raw, hdr); }) == ErrorCode::BadHeader);
    }
    SUBCASE("wavelengths not increasing") {
        write_text(hdr, R"({"rows": 1, "cols": 2, "bands": 2, "dtype": "float32", "byteorder": "little",
                            "wavelengths": [500.0, 400.0]})");
        CHECK(code_of([&] { load_cube(raw, hdr); }) == ErrorCode::BadHeader);
    }
}

TEST_CASE("save_cube then load_cube is bit-exact for float32 data") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<float> unif(-1e6f, 1e6f);
    for (int trial = 0; trial < 5; ++trial) {
        HyperCube cube;
        cube.rows = 3 + trial;
        cube.cols = 2;
        cube.data.resize(static_cast<Eigen::Index>(cube.rows * cube.cols), 5);
        for (Eigen::Index i = 0; i < cube.data.size(); ++i) cube.data(i) = static_cast<double>(unif(rng));
        cube.data(0, 0) = std::numeric_limits<float>::denorm_min();
        cube.data(1, 1) = -0.0;
        cube.data(0, 4) = std::numeric_limits<float>::max();
        cube.wavelengths = {400, 450, 500, 550, 600};

        save_cube(cube, scratch("rt.raw"), scratch("rt.json"));
        const HyperCube back = load_cube(scratch("rt.raw"), scratch("rt.json"));
        CHECK(back.rows == cube.rows);
        CHECK(back.cols == cube.cols);
        CHECK(back.wavelengths == cube.wavelengths);
        REQUIRE(back.data.rows() == cube.data.rows());
        for (Eigen::Index i = 0; i < cube.data.size(); ++i) {
            const float a = static_cast<float>(cube.data(i));
            const float b = static_cast<float>(back.data(i));
            CHECK(std::memcmp(&a, &b, 4) == 0);
        }
    }
}

TEST_CASE("apply_band_mask") {
    HyperCube cube;
    cube.rows = 2;
    cube.cols = 1;
    cube.data.resize(2, 224);
    for (Eigen::Index b = 0; b < 224; ++b) {
        cube.data(0, b) = static_cast<double>(b + 1);
        cube.data(1, b) = -static_cast<double>(b + 1);
        cube.wavelengths.push_back(400.0 + 10.0 * static_cast<double>(b));
    }

    SUBCASE("water absorption bands of the AVIRIS scene") {
        const BandMask mask = BandMask::parse("108-112,154-167,224");
        CHECK(mask.removed.size() == 20);
        const HyperCube out = apply_band_mask(cube, mask);
        CHECK(out.bands() == 204);
        CHECK(out.wavelengths.size() == 204);
        const std::set<std::size_t> removed(mask.removed.begin(), mask.removed.end());
        Eigen::Index col = 0;
        for (std::size_t b = 1; b <= 224; ++b) {
            if (removed.count(b)) continue;
            CHECK(out.data(0, col) == static_cast<double>(b));
            CHECK(out.wavelengths[static_cast<std::size_t>(col)] == cube.wavelengths[b - 1]);
            ++col;
        }
    }
    SUBCASE("empty mask is the identity") {
        const HyperCube out = apply_band_mask(cube, BandMask{});
        CHECK(out.data == cube.data);
        CHECK(out.wavelengths == cube.wavelengths);
        const HyperCube twice = apply_band_mask(apply_band_mask(cube, BandMask::parse("3,5")), BandMask{});
        CHECK(twice.data == apply_band_mask(cube, BandMask::parse("3,5")).data);
    }
    SUBCASE("out of range") {
        HyperCube small;
        small.rows = 1;
        small.cols = 1;
        small.data = Matrix::Ones(1, 5);
        CHECK(code_of([&] { apply_band_mask(small, BandMask{{6}}); }) == ErrorCode::IndexOutOfRange);
        CHECK(code_of([&] { apply_band_mask(small, BandMask{{0}}); }) == ErrorCode::IndexOutOfRange);
    }
    SUBCASE("malformed mask text") {
        CHECK(code_of([] { BandMask::parse("3-x"); }) == ErrorCode::BadConfig);
        CHECK(code_of([] { BandMask::parse("9-4"); }) == ErrorCode::BadConfig);
    }
}

TEST_CASE("normalize_zero_mean") {
    SUBCASE("single column") {
        HyperCube cube;
        cube.rows = 3;
        cube.cols = 1;
        cube.data.resize(3, 1);
        cube.data << 1, 2, 3;
        const Normalized n = normalize_zero_mean(cube);
        CHECK(n.cube.data(0, 0) == -1.0);
        CHECK(n.cube.data(1, 0) == 0.0);
        CHECK(n.cube.data(2, 0) == 1.0);
        CHECK(n.means(0) == 2.0);
    }
    SUBCASE("already zero mean") {
        HyperCube cube;
        cube.rows = 4;
        cube.cols = 1;
        cube.data.resize(4, 2);
        cube.data << -1.5, 2, 0.5, -2, 3, 0, -2, 0;
        const Normalized n = normalize_zero_mean(cube);
        CHECK((n.cube.data - cube.data).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("random cube: column means vanish and means invert") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> g(3.0, 10.0);
        HyperCube cube;
        cube.rows = 100;
        cube.cols = 1;
        cube.data.resize(100, 8);
        for (Eigen::Index i = 0; i < cube.data.size(); ++i) cube.data(i) = g(rng);
        const Normalized n = normalize_zero_mean(cube);
        for (Eigen::Index b = 0; b < 8; ++b) {
            double sum = 0.0;
            for (Eigen::Index p = 0; p < 100; ++p) sum += n.cube.data(p, b);
            CHECK(std::abs(sum / 100.0) < 1e-9);
        }
        const Matrix restored = n.cube.data.rowwise() + n.means;
        CHECK((restored - cube.data).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("make_segments") {
    CHECK(make_segments(10, 2).ranges == std::vector<SegmentRange>{{0, 5}, {5, 10}});
    CHECK(make_segments(7, 3).ranges == std::vector<SegmentRange>{{0, 3}, {3, 5}, {5, 7}});
    CHECK(make_segments(10, 1).ranges == std::vector<SegmentRange>{{0, 10}});
    CHECK(code_of([] { make_segments(10, 0); }) == ErrorCode::InvalidSegmentCount);
    CHECK(code_of([] { make_segments(3, 4); }) == ErrorCode::InvalidSegmentCount);
}

TEST_CASE("make_segments always partitions 0..P") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t pixels = 1 + rng() % 300;
        const std::size_t segments = 1 + rng() % pixels;
        const SegmentPlan plan = make_segments(pixels, segments);
        REQUIRE(plan.count() == segments);

        std::vector<int> hits(pixels, 0);
        std::size_t smallest = pixels, largest = 0;
        for (const auto& r : plan.ranges) {
            REQUIRE(r.begin < r.end);
            for (auto p = r.begin; p < r.end; ++p) ++hits[p];
            smallest = std::min(smallest, r.size());
            largest = std::max(largest, r.size());
        }
        for (std::size_t p = 0; p < pixels; ++p) REQUIRE(hits[p] == 1);
        for (std::size_t s = 1; s < plan.count(); ++s) REQUIRE(plan.ranges[s].begin == plan.ranges[s - 1].end);
        CHECK(largest - smallest <= 1);
    }
}

TEST_CASE("synth_cube") {
    SUBCASE("zero noise makes class spectra identical") {
        const SynthData d = synth_cube({{20, 30}, 12, 3, 0.0, 4});
        for (Eigen::Index i = 1; i < 20; ++i) CHECK(d.cube.data.row(i) == d.cube.data.row(0));
        for (Eigen::Index i = 21; i < 50; ++i) CHECK(d.cube.data.row(i) == d.cube.data.row(20));
        CHECK(d.cube.data.row(0) != d.cube.data.row(20));
        CHECK(d.cube.pixels() == 50);
        CHECK(d.cube.rows * d.cube.cols == 50);
        CHECK(d.truth.class_counts() == std::vector<std::size_t>{20, 30});
    }
    SUBCASE("same seed gives bit-identical cubes") {
        const SynthSpec spec{{40, 40, 40}, 16, 4, 0.05, 123};
        CHECK(synth_cube(spec).cube.data == synth_cube(spec).cube.data);
        SynthSpec other = spec;
        other.seed = 124;
        CHECK(synth_cube(spec).cube.data != synth_cube(other).cube.data);
    }
    SUBCASE("1-NN on raw spectra separates two classes") {
        const SynthData d = synth_cube({{60, 60}, 16, 4, 0.02, 99});
        // Exhaustive 1-NN with even rows as reference and odd rows as queries.
        int correct = 0, total = 0;
        for (Eigen::Index q = 1; q < d.cube.data.rows(); q += 2) {
            double best = std::numeric_limits<double>::infinity();
            int label = -1;
            for (Eigen::Index r = 0; r < d.cube.data.rows(); r += 2) {
                double dist = 0.0;
                for (Eigen::Index b = 0; b < d.cube.data.cols(); ++b) {
                    const double diff = d.cube.data(q, b) - d.cube.data(r, b);
                    dist += diff * diff;
                }
                if (dist < best) {
                    best = dist;
                    label = d.truth.labels[static_cast<std::size_t>(r)];
                }
            }
            correct += label == d.truth.labels[static_cast<std::size_t>(q)];
            ++total;
        }
        CHECK(correct == total);
    }
    SUBCASE("bad shapes") {
        CHECK(code_of([] { synth_cube({{10}, 16, 20, 0.1, 0}); }) == ErrorCode::BadShape);
        CHECK(code_of([] { synth_cube({{10, 0}, 16, 4, 0.1, 0}); }) == ErrorCode::BadShape);
        CHECK(code_of([] { synth_cube({{}, 16, 4, 0.1, 0}); }) == ErrorCode::BadShape);
    }
}

TEST_CASE("load_ground_truth") {
    SUBCASE("Salinas-A class totals") {
        const std::vector<std::size_t> counts = {391, 1343, 616, 1525, 674, 799};
        GroundTruth gt;
        for (std::size_t c = 0; c < counts.size(); ++c) gt.labels.insert(gt.labels.end(), counts[c], int(c + 1));
        gt.labels.resize(7138, 0);
        save_ground_truth(gt, scratch("salinas_gt.csv"));

        const GroundTruth back = load_ground_truth(scratch("salinas_gt.csv"), 7138);
        CHECK(back.num_classes() == 6);
        CHECK(back.class_counts() == counts);
        CHECK(back.class_counts()[0] == 391);
        CHECK(back.class_counts()[1] == 1343);
        CHECK(back.labeled_count() == 5348);
    }
    SUBCASE("all zero") {
        write_text(scratch("zeros.csv"), "0\n0\n0\n");
        const GroundTruth gt = load_ground_truth(scratch("zeros.csv"));
        CHECK(gt.num_classes() == 0);
        CHECK(gt.labeled_count() == 0);
    }
    SUBCASE("errors") {
        write_text(scratch("gap.csv"), "1\n3\n0\n");
        CHECK(code_of([] { load_ground_truth(scratch("gap.csv")); }) == ErrorCode::NonContiguousClasses);
        write_text(scratch("len.csv"), "1\n2\n");
        CHECK(code_of([] { load_ground_truth(scratch("len.csv"), 3); }) == ErrorCode::LengthMismatch);
        write_text(scratch("text.csv"), "1\nfoo\n");
        CHECK(code_of([] { load_ground_truth(scratch("text.csv")); }) == ErrorCode::IoError);
    }
}
