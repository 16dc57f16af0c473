#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "stereo_bp/evaluation.hpp"
#include "stereo_bp/hierarchy.hpp"

using namespace stereo_bp;

TEST_CASE("pyramid dimensions and mass") {
    std::mt19937 rng(2);
    const auto vol = oracle::random_volume(rng, 8, 8, 3, 1.0);
    CHECK(build_pyramid(vol, 1).size() == 1);

    const auto levels = build_pyramid(vol, 4);
    REQUIRE(levels.size() == 4);
    const int dims[] = {8, 4, 2, 1};
    for (int k = 0; k < 4; ++k) {
        CHECK(levels[k].width == dims[k]);
        CHECK(levels[k].height == dims[k]);
        for (int d = 0; d < 3; ++d)
            CHECK(std::abs(levels[k].costs.row(d).sum() - vol.costs.row(d).sum()) < 1e-9);
    }

    const auto odd = build_pyramid(oracle::random_volume(rng, 13, 6, 2, 1.0), 4);
    CHECK(odd[1].width == 7);
    CHECK(odd[1].height == 3);
    CHECK(odd[2].width == 4);
    CHECK(odd[2].height == 2);
    CHECK(odd[3].width == 2);
    CHECK(odd[3].height == 1);

    CHECK_THROWS_AS(build_pyramid(vol, 0), Error);
    CHECK_THROWS_AS(build_pyramid(vol, 5), Error);
}

TEST_CASE("lift copies parent vectors") {
    MessageFieldd zero(1, 1, 3);
    const auto lifted = lift_messages(zero, 2, 2);
    for (int k = 0; k < 4; ++k) CHECK(lifted.front()[k].isZero(0));

    MessageFieldd coarse(1, 1, 2);
    coarse.incoming(0, 0, Neighbor::Up) << 0, 2;
    const auto fine = lift_messages(coarse, 2, 2);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
            CHECK(fine.incoming(x, y, Neighbor::Up)(0) == 0);
            CHECK(fine.incoming(x, y, Neighbor::Up)(1) == 2);
        }

    CHECK_THROWS_AS(lift_messages(coarse, 3, 3), Error);
}

TEST_CASE("lift matches the index map on random fields") {
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> u(0, 4);
    MessageFieldd coarse(4, 3, 5);
    for (int k = 0; k < 4; ++k) {
        coarse.front()[k] = coarse.front()[k].unaryExpr([&](double) { return u(rng); });
        for (Eigen::Index p = 0; p < coarse.front()[k].cols(); ++p)
            coarse.front()[k].col(p).array() -= coarse.front()[k].col(p).minCoeff();
    }
    const auto fine = lift_messages(coarse, 7, 6);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 7; ++x)
            for (Neighbor n : kNeighbors) {
                CHECK(fine.incoming(x, y, n) == coarse.incoming(x / 2, y / 2, n));
                CHECK(fine.incoming(x, y, n).minCoeff() == 0.0);
            }
}

TEST_CASE("single scale equals a flat run") {
    std::mt19937 rng(6);
    const auto vol = oracle::random_volume(rng, 10, 7, 4, 1.0);
    PyramidConfig cfg;
    cfg.scale_count = 1;
    cfg.sweeps_per_scale = {12};
    const auto result = run_hierarchical(vol, cfg);

    MessageFieldd field(10, 7, 4);
    BpConfig bp = cfg.bp;
    bp.max_sweeps = 12;
    const auto trace = run_bp(vol, field, bp);
    CHECK((result.disparity.labels == extract_disparity(vol, field).labels).all());
    REQUIRE(result.scales.size() == 1);
    CHECK(result.scales[0].sweeps.size() == trace.size());
    CHECK(result.scales[0].final_energy == trace.back().energy);
}

TEST_CASE("hierarchical run on a zero-shift pair") {
    std::mt19937 rng(9);
    const GrayImage img = oracle::random_image(rng, 32, 32);
    const auto vol = build_cost_volume<double>(img, img, 8, NccParams{});
    const auto result = run_hierarchical(vol, PyramidConfig{});
    for (int y = 2; y < 30; ++y)
        for (int x = 2; x < 30; ++x) CHECK(result.disparity(x, y) == 0);
    REQUIRE(result.scales.size() == 4);
    CHECK(result.scales.front().scale == 3);
    CHECK(result.scales.back().scale == 0);
    CHECK(result.scales.back().width == 32);
}

TEST_CASE("config validation") {
    PyramidConfig cfg;
    cfg.sweeps_per_scale = {10, 10};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.scale_count = 2;
    CHECK_NOTHROW(cfg.validate());
    cfg.sweeps_per_scale = {10, 0};
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("four scales are no worse than one on random-dot stereograms") {
    int wins = 0;
    for (std::uint32_t seed = 1; seed <= 10; ++seed) {
        const auto s = random_dot_stereogram(64, 64, 4, seed);
        const auto vol = build_cost_volume<double>(s.left, s.right, 12, NccParams{});
        PyramidConfig multi;  // 10 + 10 + 10 + 20 = 50 sweeps
        PyramidConfig flat;
        flat.scale_count = 1;
        flat.sweeps_per_scale = {50};
        const double e_multi = run_hierarchical(vol, multi).scales.back().final_energy;
        const double e_flat = run_hierarchical(vol, flat).scales.back().final_energy;
        if (e_multi <= e_flat * 1.05) ++wins;
    }
    CHECK(wins >= 8);
}
