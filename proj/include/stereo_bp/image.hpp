#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "stereo_bp/errors.hpp"

namespace stereo_bp {

/// 8-bit luminance raster. Rows are image rows, so `samples(y, x)` addresses pixel (x, y).
struct GrayImage {
    using Raster = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    Raster samples;

    GrayImage() = default;
    GrayImage(int width, int height) : samples(Raster::Zero(height, width)) {}
    explicit GrayImage(Raster raster) : samples(std::move(raster)) {}

    int width() const { return static_cast<int>(samples.cols()); }
    int height() const { return static_cast<int>(samples.rows()); }

    std::uint8_t operator()(int x, int y) const { return samples(y, x); }
    std::uint8_t& operator()(int x, int y) { return samples(y, x); }

    friend bool operator==(const GrayImage& a, const GrayImage& b) {
        return a.samples.rows() == b.samples.rows() && a.samples.cols() == b.samples.cols() &&
               (a.samples == b.samples).all();
    }
};

/// Three equally sized channel rasters.
struct RgbImage {
    GrayImage::Raster red;
    GrayImage::Raster green;
    GrayImage::Raster blue;
};

/// Integer disparity labels in [0, levels), or kInvalid.
struct DisparityMap {
    using Labels = Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    static constexpr int kInvalid = -1;

    Labels labels;
    int levels = 1;
    int scale_factor = 1;  // gray = label * scale_factor when written as PGM

    DisparityMap() = default;
    DisparityMap(int width, int height, int levels_, int scale = 1)
        : labels(Labels::Zero(height, width)), levels(levels_), scale_factor(scale) {}

    int width() const { return static_cast<int>(labels.cols()); }
    int height() const { return static_cast<int>(labels.rows()); }

    int operator()(int x, int y) const { return labels(y, x); }
    int& operator()(int x, int y) { return labels(y, x); }

    bool valid(int x, int y) const { return labels(y, x) != kInvalid; }
};

}  // namespace stereo_bp
