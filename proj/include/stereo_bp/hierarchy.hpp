#pragma once

#include <string>
#include <vector>

#include "stereo_bp/bp_engine.hpp"
#include "stereo_bp/cost_volume.hpp"

namespace stereo_bp {

struct PyramidConfig {
    int scale_count = 4;
    std::vector<int> sweeps_per_scale = {10, 10, 10, 20};  // coarsest first
    BpConfig bp;

    void validate() const {
        if (scale_count < 1) throw Error("scale count must be >= 1");
        if (static_cast<int>(sweeps_per_scale.size()) != scale_count)
            throw Error("expected " + std::to_string(scale_count) + " per-scale sweep budgets, got " +
                        std::to_string(sweeps_per_scale.size()));
        for (int s : sweeps_per_scale)
            if (s < 1) throw Error("per-scale sweep budgets must be >= 1");
        bp.validate();
    }
};

/// Largest scale count whose coarsest level is still produced by a real halving step.
inline int max_scale_count(int width, int height) {
    int count = 1;
    while (width > 1 || height > 1) {
        width = (width + 1) / 2;
        height = (height + 1) / 2;
        ++count;
    }
    return count;
}

/// Level 0 is `volume`; level k+1 is downsample_volume(level k). Finest first.
template <typename Scalar>
std::vector<CostVolume<Scalar>> build_pyramid(const CostVolume<Scalar>& volume, int scale_count) {
    if (scale_count < 1) throw Error("scale count must be >= 1");
    const int limit = max_scale_count(volume.width, volume.height);
    if (scale_count > limit)
        throw Error("a " + std::to_string(volume.width) + "x" + std::to_string(volume.height) +
                    " volume supports at most " + std::to_string(limit) + " scales, requested " +
                    std::to_string(scale_count));
    std::vector<CostVolume<Scalar>> levels;
    levels.reserve(scale_count);
    levels.push_back(volume);
    for (int k = 1; k < scale_count; ++k) levels.push_back(downsample_volume(levels.back()));
    return levels;
}

/// Each fine pixel (x, y) copies every slot of coarse pixel (x/2, y/2) into the front buffer.
template <typename Scalar>
MessageField<Scalar> lift_messages(const MessageField<Scalar>& coarse, int fine_width, int fine_height) {
    if (coarse.width != (fine_width + 1) / 2 || coarse.height != (fine_height + 1) / 2)
        throw Error("coarse field " + std::to_string(coarse.width) + "x" + std::to_string(coarse.height) +
                    " is not the halved size of " + std::to_string(fine_width) + "x" + std::to_string(fine_height));
    MessageField<Scalar> fine(fine_width, fine_height, coarse.levels);
    for (int s = 0; s < 4; ++s) {
        const auto& src = coarse.front()[s];
        auto& dst = fine.front()[s];
        for (int y = 0; y < fine_height; ++y)
            for (int x = 0; x < fine_width; ++x) dst.col(fine.index(x, y)) = src.col(coarse.index(x / 2, y / 2));
    }
    return fine;
}

struct ScaleTrace {
    int scale = 0;  // 0 is the finest
    int width = 0;
    int height = 0;
    std::vector<SweepRecord> sweeps;
    double final_energy = 0;
};

struct HierarchicalResult {
    DisparityMap disparity;
    std::vector<ScaleTrace> scales;  // in execution order, coarsest first
};

/// Coarse-to-fine BP: zero messages at the coarsest scale, lifted messages everywhere else.
template <typename Scalar>
HierarchicalResult run_hierarchical(const CostVolume<Scalar>& volume, const PyramidConfig& config) {
    config.validate();
    const auto pyramid = build_pyramid(volume, config.scale_count);

    HierarchicalResult result;
    MessageField<Scalar> field;
    for (int k = config.scale_count - 1; k >= 0; --k) {
        const auto& level = pyramid[k];
        if (k == config.scale_count - 1)
            field = MessageField<Scalar>(level.width, level.height, level.levels());
        else
            field = lift_messages(field, level.width, level.height);

        BpConfig bp = config.bp;
        bp.max_sweeps = config.sweeps_per_scale[config.scale_count - 1 - k];
        ScaleTrace trace{k, level.width, level.height, run_bp(level, field, bp), 0.0};
        trace.final_energy = trace.sweeps.back().energy;
        result.scales.push_back(std::move(trace));
    }
    result.disparity = extract_disparity(volume, field);
    return result;
}

}  // namespace stereo_bp
