#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stereo_bp/bp_engine.hpp"
#include "stereo_bp/cost_volume.hpp"
#include "stereo_bp/image.hpp"

namespace stereo_bp {

struct EvalReport {
    double bad_pixel_rate = 0;
    double threshold = 1.0;
    int evaluated_count = 0;
    int excluded_count = 0;
    double mean_abs_error = 0;

    /// `bad_rate,threshold,evaluated,excluded,mae`
    std::string to_csv() const;
};

/// A pixel is bad when |result - truth| > threshold. Pixels with INVALID truth or x < border
/// are excluded. An INVALID result on a scored pixel counts as bad and is left out of the MAE.
EvalReport bad_pixel_rate(const DisparityMap& result, const DisparityMap& truth, double threshold = 1.0,
                          int border = 0);

struct LabelingSolution {
    std::vector<int> labels;
    double energy = 0;
};

/// Exact MAP of a chain by dynamic programming; ties go to smaller labels while backtracking.
LabelingSolution exact_map_chain(const std::vector<Eigen::VectorXd>& costs, const SmoothnessParams& params);

/// Exhaustive MAP over every labeling of a tiny grid (L^(W*H) <= 1e7). Labels are row-major and
/// ties keep the lexicographically smallest labeling.
template <typename Scalar>
LabelingSolution exact_map_grid_small(const CostVolume<Scalar>& volume, const SmoothnessParams& params) {
    const int n = volume.pixel_count();
    const int levels = volume.levels();
    if (n < 1) throw Error("empty grid");
    if (n * std::log10(double(levels)) > 7.0 + 1e-12)
        throw Error("grid too large for exhaustive search: " + std::to_string(levels) + "^" + std::to_string(n) +
                    " labelings");

    DisparityMap map(volume.width, volume.height, levels);
    std::vector<int> labels(n, 0);
    LabelingSolution best{labels, std::numeric_limits<double>::infinity()};
    while (true) {
        for (int p = 0; p < n; ++p) map.labels.data()[p] = labels[p];
        const double energy = labeling_energy(volume, map, params);
        if (energy < best.energy) best = {labels, energy};
        // Odometer increment, last pixel fastest, so labelings are visited in lexicographic order.
        int p = n - 1;
        while (p >= 0 && ++labels[p] == levels) labels[p--] = 0;
        if (p < 0) break;
    }
    return best;
}

struct Stereogram {
    GrayImage left;
    GrayImage right;
    DisparityMap truth;
};

/// Random-dot pair: uniform noise on the left; the central rectangle [W/4, 3W/4) x [H/4, 3H/4)
/// appears `shift` pixels further left in the right view, and the strip it uncovers gets fresh
/// noise. Truth is `shift` on the rectangle and 0 elsewhere. Requires 0 <= 4*shift < width.
Stereogram random_dot_stereogram(int width, int height, int shift, std::uint32_t seed);

}  // namespace stereo_bp
