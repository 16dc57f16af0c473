#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "stereo_bp/cost_volume.hpp"

using namespace stereo_bp;

namespace {

GrayImage from_rows(std::initializer_list<std::initializer_list<int>> rows) {
    GrayImage img(static_cast<int>(rows.begin()->size()), static_cast<int>(rows.size()));
    int y = 0;
    for (const auto& row : rows) {
        int x = 0;
        for (int v : row) img(x++, y) = static_cast<std::uint8_t>(v);
        ++y;
    }
    return img;
}

}  // namespace

TEST_CASE("ncc of identical, negated and flat windows") {
    const GrayImage a = from_rows({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
    CHECK(ncc_score(a, a, 1, 1, 0, 1) == doctest::Approx(1.0).epsilon(1e-15));

    // 10 - a mirrors every sample around the common mean 5
    const GrayImage neg = from_rows({{9, 8, 7}, {6, 5, 4}, {3, 2, 1}});
    CHECK(ncc_score(a, neg, 1, 1, 0, 1) == doctest::Approx(-1.0).epsilon(1e-15));

    const GrayImage flat = from_rows({{42, 42, 42}, {42, 42, 42}, {42, 42, 42}});
    CHECK(ncc_score(a, flat, 1, 1, 0, 1) == 0.0);
}

TEST_CASE("ncc frozen values") {
    // Reference values evaluated with numpy.
    const GrayImage a = from_rows({{12, 200, 37}, {90, 4, 150}, {66, 181, 23}});
    const GrayImage b = from_rows({{15, 190, 40}, {80, 9, 160}, {70, 170, 30}});
    const GrayImage c = from_rows({{9, 3, 7}, {1, 8, 2}, {6, 4, 5}});
    CHECK(std::abs(ncc_score(a, b, 1, 1, 0, 1) - 0.9956688591905951) < 1e-12);
    CHECK(std::abs(ncc_score(a, c, 1, 1, 0, 1) - -0.7240993523385387) < 1e-12);
}

TEST_CASE("ncc matches direct summation on random windows") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const GrayImage l = oracle::random_image(rng, 9, 5);
        const GrayImage r = oracle::random_image(rng, 9, 5);
        const int d = trial % 4;
        const double expected = oracle::ncc(oracle::window(l, 6, 2, 1), oracle::window(r, 6 - d, 2, 1));
        CHECK(std::abs(ncc_score(l, r, 6, 2, d, 1) - expected) < 1e-12);
    }
}

TEST_CASE("ncc is symmetric, bounded and affine invariant") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-50, 300), scale(0.01, 20), offset(-1000, 1000);
    for (int trial = 0; trial < 300; ++trial) {
        Eigen::ArrayXXd a(5, 5), b(5, 5);
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            a.data()[i] = u(rng);
            b.data()[i] = u(rng);
        }
        const double base = ncc_windows(a, b);
        CHECK(base >= -1.0);
        CHECK(base <= 1.0);
        CHECK(std::abs(ncc_windows(b, a) - base) < 1e-12);
        const double alpha = scale(rng), beta = offset(rng);
        CHECK(std::abs(ncc_windows((alpha * a + beta).eval(), b) - base) < 1e-9);
        CHECK(std::abs(ncc_windows(a, (alpha * b + beta).eval()) - base) < 1e-9);
    }
}

TEST_CASE("ncc rejects windows leaving the image") {
    const GrayImage a(5, 5);
    CHECK_THROWS_AS(ncc_score(a, a, 0, 2, 0, 1), Error);
    CHECK_THROWS_AS(ncc_score(a, a, 2, 2, 2, 1), Error);
    CHECK_NOTHROW(ncc_score(a, a, 3, 2, 2, 1));
}

TEST_CASE("zero-shift pair has zero cost at d = 0") {
    std::mt19937 rng(3);
    const GrayImage img = oracle::random_image(rng, 12, 10);
    const auto vol = build_cost_volume<double>(img, img, 4, NccParams{});
    for (int y = 2; y < 8; ++y)
        for (int x = 5; x < 10; ++x) {
            CHECK(vol(x, y, 0) == doctest::Approx(0.0).epsilon(1e-12));
            Eigen::Index arg;
            vol.at(x, y).minCoeff(&arg);
            CHECK(arg == 0);
        }
}

TEST_CASE("cost truncation") {
    const GrayImage a = from_rows({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
    const GrayImage neg = from_rows({{9, 8, 7}, {6, 5, 4}, {3, 2, 1}});
    NccParams p;
    p.window_radius = 1;
    p.data_weight = 1.0;
    p.data_truncation = 1.5;
    const auto vol = build_cost_volume<double>(a, neg, 1, p);
    CHECK(vol(1, 1, 0) == 1.5);
    CHECK(vol(0, 0, 0) == 1.5);  // border pixel
}

TEST_CASE("cost volume equals per-element ncc oracle") {
    std::mt19937 rng(21);
    const GrayImage l = oracle::random_image(rng, 16, 16);
    const GrayImage r = oracle::random_image(rng, 16, 16);
    NccParams p;
    p.window_radius = 2;
    p.data_weight = 1.3;
    p.data_truncation = 1.7;
    const auto vol = build_cost_volume<double>(l, r, 5, p);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            for (int d = 0; d < 5; ++d) {
                const bool inside = x - 2 >= 0 && x + 2 < 16 && y - 2 >= 0 && y + 2 < 16 && x - d - 2 >= 0;
                const double expected =
                    inside ? std::min(1.3 * (1.0 - oracle::ncc(oracle::window(l, x, y, 2), oracle::window(r, x - d, y, 2))),
                                      1.7)
                           : 1.7;
                CHECK(std::abs(vol(x, y, d) - expected) < 1e-12);
                CHECK(vol(x, y, d) >= 0.0);
                CHECK(vol(x, y, d) <= 1.7);
            }
}

TEST_CASE("build_cost_volume errors") {
    const GrayImage a(4, 4), b(5, 4);
    CHECK_THROWS_AS(build_cost_volume<double>(a, b, 2, NccParams{}), Error);
    CHECK_THROWS_AS(build_cost_volume<double>(a, a, 0, NccParams{}), Error);
    NccParams bad;
    bad.window_radius = 0;
    CHECK_THROWS_AS(build_cost_volume<double>(a, a, 2, bad), Error);
}

TEST_CASE("prune keeps the k cheapest levels") {
    CostVolumed vol(1, 1, 4, 1.0);
    vol.at(0, 0) << 0.9, 0.1, 0.1, 0.7;
    const auto pruned = prune_candidates(vol, 2);
    REQUIRE(pruned.candidates);
    CHECK((*pruned.candidates)(0, 0) == 1);
    CHECK((*pruned.candidates)(1, 0) == 2);
    CHECK(pruned(0, 0, 0) == 1.0);
    CHECK(pruned(0, 0, 1) == 0.1);
    CHECK(pruned(0, 0, 2) == 0.1);
    CHECK(pruned(0, 0, 3) == 1.0);

    const auto same = prune_candidates(vol, 4);
    CHECK(same.costs == vol.costs);
    CHECK_FALSE(same.candidates);
    CHECK(prune_candidates(vol, std::nullopt).costs == vol.costs);
    CHECK_THROWS_AS(prune_candidates(vol, 0), Error);
    CHECK_THROWS_AS(prune_candidates(vol, 5), Error);
}

TEST_CASE("prune matches a full-sort oracle and preserves the argmin") {
    std::mt19937 rng(8);
    std::uniform_int_distribution<int> coarse(0, 5);
    for (int trial = 0; trial < 50; ++trial) {
        const int L = 2 + trial % 7;
        auto vol = oracle::random_volume(rng, 4, 3, L, 1.0);
        // quantize to force ties
        if (trial % 2) vol.costs = vol.costs.unaryExpr([&](double) { return coarse(rng) / 5.0; });
        const int k = 1 + trial % L;
        const auto pruned = prune_candidates(vol, k);
        for (int p = 0; p < vol.pixel_count(); ++p) {
            std::vector<std::pair<double, int>> sorted;
            for (int d = 0; d < L; ++d) sorted.push_back({vol.costs(d, p), d});
            std::sort(sorted.begin(), sorted.end());
            std::vector<int> expected;
            for (int i = 0; i < k; ++i) expected.push_back(sorted[i].second);
            std::sort(expected.begin(), expected.end());
            if (k < L) {
                REQUIRE(pruned.candidates);
                for (int i = 0; i < k; ++i) CHECK((*pruned.candidates)(i, p) == expected[i]);
            }
            Eigen::Index a, b;
            vol.costs.col(p).minCoeff(&a);
            pruned.costs.col(p).minCoeff(&b);
            CHECK(a == b);
        }
    }
}

TEST_CASE("downsample sums 2x2 blocks") {
    CostVolumed vol(2, 2, 2);
    vol(0, 0, 1) = 1;
    vol(1, 0, 1) = 2;
    vol(0, 1, 1) = 3;
    vol(1, 1, 1) = 4;
    const auto c = downsample_volume(vol);
    CHECK(c.width == 1);
    CHECK(c.height == 1);
    CHECK(c(0, 0, 1) == 10);
    CHECK(c(0, 0, 0) == 0);

    CostVolumed one(1, 1, 3);
    one.at(0, 0) << 1, 2, 3;
    const auto same = downsample_volume(one);
    CHECK(same.width == 1);
    CHECK(same.costs == one.costs);
}

TEST_CASE("downsample matches a double-loop oracle on odd sizes and drops candidates") {
    std::mt19937 rng(99);
    const auto vol = prune_candidates(oracle::random_volume(rng, 5, 7, 3, 2.0), 2);
    const auto c = downsample_volume(vol);
    CHECK(c.width == 3);
    CHECK(c.height == 4);
    CHECK_FALSE(c.candidates);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 3; ++x)
            for (int d = 0; d < 3; ++d) {
                double sum = 0;
                for (int sy = 2 * y; sy < std::min(2 * y + 2, 7); ++sy)
                    for (int sx = 2 * x; sx < std::min(2 * x + 2, 5); ++sx) sum += vol(sx, sy, d);
                CHECK(std::abs(c(x, y, d) - sum) < 1e-12);
            }
    for (int d = 0; d < 3; ++d) CHECK(std::abs(c.costs.row(d).sum() - vol.costs.row(d).sum()) < 1e-9);
}

TEST_CASE("cost volume dump layout") {
    CostVolumef vol(2, 1, 3);
    vol.at(0, 0) << 0.5f, 1.0f, 1.5f;
    vol.at(1, 0) << 2.0f, 2.5f, 3.0f;
    const auto path = std::filesystem::temp_directory_path() / "stereo_bp_volume.bin";
    write_cost_volume(vol, path);
    CHECK(std::filesystem::file_size(path) == 12 + 6 * 4);
    std::ifstream in(path, std::ios::binary);
    unsigned char header[12];
    in.read(reinterpret_cast<char*>(header), 12);
    CHECK(header[0] == 2);
    CHECK(header[4] == 1);
    CHECK(header[8] == 3);
    // (y, x, d) order: the fourth float is pixel (1, 0) level 0
    in.seekg(12 + 3 * 4);
    unsigned char f[4];
    in.read(reinterpret_cast<char*>(f), 4);
    const std::uint32_t bits = f[0] | f[1] << 8 | f[2] << 16 | std::uint32_t(f[3]) << 24;
    CHECK(std::bit_cast<float>(bits) == 2.0f);

    const auto back = read_cost_volume<float>(path);
    CHECK(back.costs == vol.costs);
}
