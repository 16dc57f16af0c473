#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stereo_bp/errors.hpp"
#include "stereo_bp/image.hpp"

namespace stereo_bp {

/// Data term D_p(d) over a W x H grid and L disparity levels.
///
/// Costs are stored as an L x (W*H) matrix so that each pixel's cost vector is one
/// contiguous column; pixel (x, y) is column y*W + x.
template <typename Scalar = double>
struct CostVolume {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    /// k x (W*H); each column lists a pixel's admissible levels in ascending order.
    using Candidates = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

    int width = 0;
    int height = 0;
    Matrix costs;
    std::optional<Candidates> candidates;
    /// Ceiling applied to data costs; pruned levels are raised to this value.
    Scalar truncation = Scalar(1);

    CostVolume() = default;
    CostVolume(int w, int h, int levels, Scalar trunc = Scalar(1))
        : width(w), height(h), costs(Matrix::Zero(levels, Eigen::Index(w) * h)), truncation(trunc) {}

    int levels() const { return static_cast<int>(costs.rows()); }
    int pixel_count() const { return width * height; }
    int index(int x, int y) const { return y * width + x; }

    Scalar operator()(int x, int y, int d) const { return costs(d, index(x, y)); }
    Scalar& operator()(int x, int y, int d) { return costs(d, index(x, y)); }

    auto at(int x, int y) const { return costs.col(index(x, y)); }
    auto at(int x, int y) { return costs.col(index(x, y)); }
};

using CostVolumed = CostVolume<double>;
using CostVolumef = CostVolume<float>;

struct NccParams {
    int window_radius = 2;
    double data_weight = 1.0;      // cost = data_weight * (1 - ncc)
    double data_truncation = 1.0;  // cap on the cost
    std::optional<int> candidate_count;  // nullopt keeps every level

    void validate() const {
        if (window_radius < 1) throw Error("NCC window radius must be >= 1");
        if (!(data_weight > 0.0)) throw Error("data weight must be > 0");
        if (!(data_truncation > 0.0)) throw Error("data truncation must be > 0");
        if (candidate_count && *candidate_count < 1) throw Error("candidate count must be >= 1");
    }
};

/// Normalized cross correlation of two equally sized windows. Zero-variance windows score 0.
template <typename DerivedA, typename DerivedB>
double ncc_windows(const Eigen::ArrayBase<DerivedA>& a, const Eigen::ArrayBase<DerivedB>& b) {
    const Eigen::ArrayXXd ca = a.template cast<double>() - a.template cast<double>().mean();
    const Eigen::ArrayXXd cb = b.template cast<double>() - b.template cast<double>().mean();
    const double saa = ca.square().sum();
    const double sbb = cb.square().sum();
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return std::clamp((ca * cb).sum() / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline bool ncc_window_inside(const GrayImage& left, const GrayImage& right, int x, int y, int d, int r) {
    return x - r >= 0 && x + r < left.width() && y - r >= 0 && y + r < left.height() &&
           x - d - r >= 0 && x - d + r < right.width() && y + r < right.height();
}

/// NCC between the (2r+1)^2 window at (x, y) in `left` and at (x - d, y) in `right`.
inline double ncc_score(const GrayImage& left, const GrayImage& right, int x, int y, int d, int r) {
    if (r < 0 || !ncc_window_inside(left, right, x, y, d, r))
        throw Error("NCC window at (" + std::to_string(x) + ", " + std::to_string(y) + ") with disparity " +
                    std::to_string(d) + " leaves the image");
    const int n = 2 * r + 1;
    return ncc_windows(left.samples.block(y - r, x - r, n, n), right.samples.block(y - r, x - d - r, n, n));
}

/// cost(x, y, d) = min(weight * (1 - ncc), truncation); windows leaving either image cost `truncation`.
template <typename Scalar = double>
CostVolume<Scalar> build_cost_volume(const GrayImage& left, const GrayImage& right, int levels,
                                     const NccParams& params) {
    params.validate();
    if (left.width() != right.width() || left.height() != right.height())
        throw Error("image sizes differ: " + std::to_string(left.width()) + "x" + std::to_string(left.height()) +
                    " vs " + std::to_string(right.width()) + "x" + std::to_string(right.height()));
    if (levels < 1) throw Error("disparity level count must be >= 1");

    const int w = left.width();
    const int h = left.height();
    const int r = params.window_radius;
    const int n = 2 * r + 1;
    CostVolume<Scalar> volume(w, h, levels, static_cast<Scalar>(params.data_truncation));
    volume.costs.setConstant(static_cast<Scalar>(params.data_truncation));

    Eigen::ArrayXXd lw(n, n), rw(n, n);
    for (int y = r; y + r < h; ++y) {
        for (int x = r; x + r < w; ++x) {
            lw = left.samples.block(y - r, x - r, n, n).template cast<double>();
            lw -= lw.mean();
            const double sll = lw.square().sum();
            for (int d = 0; d < levels && x - d - r >= 0; ++d) {
                rw = right.samples.block(y - r, x - d - r, n, n).template cast<double>();
                rw -= rw.mean();
                const double srr = rw.square().sum();
                const double ncc =
                    (sll == 0.0 || srr == 0.0) ? 0.0 : std::clamp((lw * rw).sum() / std::sqrt(sll * srr), -1.0, 1.0);
                volume(x, y, d) =
                    static_cast<Scalar>(std::min(params.data_weight * (1.0 - ncc), params.data_truncation));
            }
        }
    }
    return volume;
}

/// Keeps each pixel's k cheapest levels (ties toward smaller d) and raises every other
/// level to the volume's truncation. nullopt or k == L returns the volume unchanged.
template <typename Scalar>
CostVolume<Scalar> prune_candidates(const CostVolume<Scalar>& volume, std::optional<int> k) {
    const int levels = volume.levels();
    if (!k || *k == levels) return volume;
    if (*k < 1 || *k > levels)
        throw Error("candidate count " + std::to_string(*k) + " outside [1, " + std::to_string(levels) + "]");

    CostVolume<Scalar> out = volume;
    typename CostVolume<Scalar>::Candidates cand(*k, volume.pixel_count());
    std::vector<int> order(levels);
    for (int p = 0; p < volume.pixel_count(); ++p) {
        const auto col = volume.costs.col(p);
        std::iota(order.begin(), order.end(), 0);
        std::partial_sort(order.begin(), order.begin() + *k, order.end(), [&](int a, int b) {
            return col(a) < col(b) || (col(a) == col(b) && a < b);
        });
        std::sort(order.begin(), order.begin() + *k);
        out.costs.col(p).setConstant(volume.truncation);
        for (int i = 0; i < *k; ++i) {
            cand(i, p) = order[i];
            out.costs(order[i], p) = col(order[i]);
        }
    }
    out.candidates = std::move(cand);
    return out;
}

/// Halves each dimension (rounding up) by summing 2x2 blocks. Candidate sets are dropped.
template <typename Scalar>
CostVolume<Scalar> downsample_volume(const CostVolume<Scalar>& volume) {
    const int cw = (volume.width + 1) / 2;
    const int ch = (volume.height + 1) / 2;
    CostVolume<Scalar> out(cw, ch, volume.levels(), volume.truncation);
    for (int y = 0; y < volume.height; ++y)
        for (int x = 0; x < volume.width; ++x) out.at(x / 2, y / 2) += volume.at(x, y);
    return out;
}

namespace detail {

inline void put_u32_le(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32_le(const unsigned char* b) {
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

}  // namespace detail

/// Debug dump: u32 W, H, L then W*H*L float32 in (y, x, d) order, all little-endian.
template <typename Scalar>
void write_cost_volume(const CostVolume<Scalar>& volume, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    detail::put_u32_le(out, static_cast<std::uint32_t>(volume.width));
    detail::put_u32_le(out, static_cast<std::uint32_t>(volume.height));
    detail::put_u32_le(out, static_cast<std::uint32_t>(volume.levels()));
    // Column-major L x (W*H) storage is already (y, x, d) order.
    for (Eigen::Index i = 0; i < volume.costs.size(); ++i)
        detail::put_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(volume.costs.data()[i])));
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

template <typename Scalar = double>
CostVolume<Scalar> read_cost_volume(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 12) throw FormatError("truncated cost volume header", bytes.size());
    const auto w = detail::get_u32_le(bytes.data());
    const auto h = detail::get_u32_le(bytes.data() + 4);
    const auto l = detail::get_u32_le(bytes.data() + 8);
    const std::size_t count = std::size_t(w) * h * l;
    if (bytes.size() != 12 + 4 * count)
        throw FormatError("cost volume body has " + std::to_string(bytes.size() - 12) + " bytes, expected " +
                              std::to_string(4 * count),
                          bytes.size());
    CostVolume<Scalar> volume(static_cast<int>(w), static_cast<int>(h), static_cast<int>(l));
    for (std::size_t i = 0; i < count; ++i)
        volume.costs.data()[i] =
            static_cast<Scalar>(std::bit_cast<float>(detail::get_u32_le(bytes.data() + 12 + 4 * i)));
    return volume;
}

}  // namespace stereo_bp
