#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stereo_bp/cost_volume.hpp"
#include "stereo_bp/errors.hpp"
#include "stereo_bp/image.hpp"
#include "stereo_bp/parallel.hpp"

namespace stereo_bp {

/// Truncated linear jump cost V(a, b) = min(slope * |a - b|, truncation).
struct SmoothnessParams {
    double slope = 1.0;
    double truncation = 2.0;

    void validate() const {
        if (!(slope >= 0.0) || !std::isfinite(slope)) throw Error("smoothness slope must be finite and >= 0");
        if (!(truncation > 0.0) || !std::isfinite(truncation)) throw Error("smoothness truncation must be > 0");
    }
};

inline double smoothness_cost(int a, int b, const SmoothnessParams& params) {
    return std::min(params.slope * std::abs(a - b), params.truncation);
}

/// Grid neighbors. As a message slot, a value names the neighbor the message came FROM.
enum class Neighbor : int { Left = 0, Right = 1, Up = 2, Down = 3 };

inline constexpr std::array<Neighbor, 4> kNeighbors = {Neighbor::Left, Neighbor::Right, Neighbor::Up, Neighbor::Down};

constexpr Neighbor opposite(Neighbor n) {
    switch (n) {
        case Neighbor::Left: return Neighbor::Right;
        case Neighbor::Right: return Neighbor::Left;
        case Neighbor::Up: return Neighbor::Down;
        case Neighbor::Down: return Neighbor::Up;
    }
    return n;
}

constexpr int dx(Neighbor n) { return n == Neighbor::Left ? -1 : n == Neighbor::Right ? 1 : 0; }
constexpr int dy(Neighbor n) { return n == Neighbor::Up ? -1 : n == Neighbor::Down ? 1 : 0; }

inline bool has_neighbor(int x, int y, Neighbor n, int width, int height) {
    const int nx = x + dx(n);
    const int ny = y + dy(n);
    return nx >= 0 && nx < width && ny >= 0 && ny < height;
}

/// Incoming messages for every pixel in four direction slots, double buffered.
///
/// Slot `s` of pixel p holds the message p received from its `s` neighbor. Each slot is an
/// L x (W*H) matrix, so 4 slots x 2 buffers = 8 planes. Slots facing the image boundary stay zero.
template <typename Scalar = double>
struct MessageField {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Buffer = std::array<Matrix, 4>;

    int width = 0;
    int height = 0;
    int levels = 0;
    std::array<Buffer, 2> buffers;
    int front_index = 0;

    MessageField() = default;
    MessageField(int w, int h, int l) : width(w), height(h), levels(l) {
        for (auto& buffer : buffers)
            for (auto& slot : buffer) slot = Matrix::Zero(l, Eigen::Index(w) * h);
    }

    int index(int x, int y) const { return y * width + x; }

    /// Most recently completed sweep.
    const Buffer& front() const { return buffers[front_index]; }
    Buffer& front() { return buffers[front_index]; }
    /// Scratch buffer written by the next sweep.
    Buffer& back() { return buffers[1 - front_index]; }
    void swap() { front_index = 1 - front_index; }

    auto incoming(int x, int y, Neighbor from) const { return front()[int(from)].col(index(x, y)); }
    auto incoming(int x, int y, Neighbor from) { return front()[int(from)].col(index(x, y)); }
};

using MessageFieldd = MessageField<double>;

/// Per-pixel activity for the fast schedule. Inactive pixels satisfy last_delta < epsilon.
struct ConvergenceMask {
    std::vector<std::uint8_t> active;
    std::vector<double> last_delta;
    double epsilon = 1e-3;

    ConvergenceMask() = default;
    ConvergenceMask(int pixel_count, double eps)
        : active(pixel_count, 1), last_delta(pixel_count, std::numeric_limits<double>::infinity()), epsilon(eps) {}

    int active_count() const { return static_cast<int>(std::count(active.begin(), active.end(), 1)); }
};

enum class Schedule { Full, Fast };

struct BpConfig {
    int max_sweeps = 20;
    double epsilon = 1e-3;
    Schedule schedule = Schedule::Fast;
    SmoothnessParams smoothness;
    int threads = 1;

    void validate() const {
        if (max_sweeps < 1) throw Error("sweep budget must be >= 1");
        if (!(epsilon >= 0.0)) throw Error("convergence epsilon must be >= 0");
        smoothness.validate();
    }
};

struct SweepStats {
    int updated = 0;       // pixels that recomputed their outgoing messages
    int active_after = 0;  // pixels scheduled for the next sweep
    double max_delta = 0;  // largest max-norm change of any message
};

namespace detail {

/// h(d) = cost(p, d) + sum of p's incoming messages except the one from `toward`.
template <typename Scalar, typename Out>
void gather_belief(const CostVolume<Scalar>& volume, const typename MessageField<Scalar>::Buffer& prev, int p,
                   Neighbor toward, Out&& h) {
    h = volume.costs.col(p);
    for (Neighbor n : kNeighbors)
        if (n != toward) h += prev[int(n)].col(p);
}

/// out(dq) = min_dp h(dp) + V(dp, dq), then shifted so min(out) = 0.
template <typename Scalar, typename In, typename Out>
void min_convolve(const CostVolume<Scalar>& volume, int p, const In& h, const SmoothnessParams& params, Out&& out) {
    const int levels = static_cast<int>(h.size());
    const Scalar slope = static_cast<Scalar>(params.slope);
    const Scalar trunc = static_cast<Scalar>(params.truncation);
    if (volume.candidates) {
        const auto cand = volume.candidates->col(p);
        for (int dq = 0; dq < levels; ++dq) {
            Scalar best = std::numeric_limits<Scalar>::infinity();
            for (Eigen::Index i = 0; i < cand.size(); ++i) {
                const int dp = cand(i);
                best = std::min(best, h(dp) + std::min(slope * Scalar(std::abs(dp - dq)), trunc));
            }
            out(dq) = best;
        }
    } else {
        // Two-pass lower envelope of the linear cones, then clip at min(h) + truncation.
        out = h;
        for (int d = 1; d < levels; ++d) out(d) = std::min(out(d), out(d - 1) + slope);
        for (int d = levels - 2; d >= 0; --d) out(d) = std::min(out(d), out(d + 1) + slope);
        out = out.cwiseMin(h.minCoeff() + trunc);
    }
    out.array() -= out.minCoeff();
}

}  // namespace detail

/// Message from pixel (x, y) to its neighbor in direction `toward`, computed from the field's
/// front buffer and min-normalized.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> update_message(int x, int y, Neighbor toward, const CostVolume<Scalar>& volume,
                                                        const MessageField<Scalar>& field,
                                                        const SmoothnessParams& params) {
    if (field.width != volume.width || field.height != volume.height || field.levels != volume.levels())
        throw Error("message field and cost volume dimensions differ");
    if (x < 0 || y < 0 || x >= volume.width || y >= volume.height)
        throw Error("pixel outside the grid");
    if (!has_neighbor(x, y, toward, volume.width, volume.height))
        throw Error("target is not a neighbor inside the grid");
    const int p = volume.index(x, y);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> h(volume.levels()), out(volume.levels());
    detail::gather_belief(volume, field.front(), p, toward, h);
    detail::min_convolve(volume, p, h, params, out);
    return out;
}

/// One synchronous sweep: reads the front buffer, writes the back buffer, then swaps.
///
/// Under Schedule::Fast only active pixels recompute; inactive ones carry their outgoing
/// messages forward. Afterwards a recomputed pixel stays active if any of its outgoing messages
/// moved by >= epsilon (max norm), and any pixel is activated when an incoming message did.
template <typename Scalar>
SweepStats sweep(const CostVolume<Scalar>& volume, MessageField<Scalar>& field, ConvergenceMask& mask,
                 const BpConfig& config) {
    const int w = volume.width;
    const int h = volume.height;
    const int n = volume.pixel_count();
    if (field.width != w || field.height != h || field.levels != volume.levels())
        throw Error("message field and cost volume dimensions differ");
    if (static_cast<int>(mask.active.size()) != n || static_cast<int>(mask.last_delta.size()) != n)
        throw Error("convergence mask size differs from the grid");

    const bool fast = config.schedule == Schedule::Fast;
    const auto& prev = field.front();
    auto& next = field.back();
    // change(s, q): max-norm change of the message stored in slot s of pixel q
    Eigen::Matrix<double, 4, Eigen::Dynamic> change = Eigen::Matrix<double, 4, Eigen::Dynamic>::Zero(4, n);
    std::vector<std::uint8_t> updated(n, 0);

    parallel_for(h, config.threads, [&](int row_begin, int row_end) {
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> belief(volume.levels());
        for (int y = row_begin; y < row_end; ++y) {
            for (int x = 0; x < w; ++x) {
                const int p = volume.index(x, y);
                const bool recompute = !fast || mask.active[p];
                updated[p] = recompute;
                for (Neighbor toward : kNeighbors) {
                    if (!has_neighbor(x, y, toward, w, h)) continue;
                    const int q = volume.index(x + dx(toward), y + dy(toward));
                    const int slot = int(opposite(toward));
                    auto out = next[slot].col(q);
                    if (recompute) {
                        detail::gather_belief(volume, prev, p, toward, belief);
                        detail::min_convolve(volume, p, belief, config.smoothness, out);
                        change(slot, q) = static_cast<double>((out - prev[slot].col(q)).cwiseAbs().maxCoeff());
                    } else {
                        out = prev[slot].col(q);
                    }
                }
            }
        }
    });

    std::vector<double> row_max(h, 0.0);
    parallel_for(h, config.threads, [&](int row_begin, int row_end) {
        for (int y = row_begin; y < row_end; ++y) {
            for (int x = 0; x < w; ++x) {
                const int p = volume.index(x, y);
                const double in_delta = change.col(p).maxCoeff();
                double out_delta = 0.0;
                for (Neighbor toward : kNeighbors) {
                    if (!has_neighbor(x, y, toward, w, h)) continue;
                    const int q = volume.index(x + dx(toward), y + dy(toward));
                    out_delta = std::max(out_delta, change(int(opposite(toward)), q));
                }
                if (updated[p]) mask.last_delta[p] = out_delta;
                if (!fast)
                    mask.active[p] = 1;
                else if (updated[p])
                    mask.active[p] = out_delta >= mask.epsilon || in_delta >= mask.epsilon;
                else
                    mask.active[p] = in_delta >= mask.epsilon;
                row_max[y] = std::max(row_max[y], in_delta);
            }
        }
    });

    field.swap();
    SweepStats stats;
    stats.updated = static_cast<int>(std::count(updated.begin(), updated.end(), 1));
    stats.active_after = mask.active_count();
    stats.max_delta = h > 0 ? *std::max_element(row_max.begin(), row_max.end()) : 0.0;
    return stats;
}

/// Per-pixel argmin of cost plus all four incoming messages; ties go to the smaller level.
template <typename Scalar>
DisparityMap extract_disparity(const CostVolume<Scalar>& volume, const MessageField<Scalar>& field) {
    if (field.width != volume.width || field.height != volume.height || field.levels != volume.levels())
        throw Error("message field and cost volume dimensions differ");
    DisparityMap map(volume.width, volume.height, volume.levels());
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> belief(volume.levels());
    for (int y = 0; y < volume.height; ++y) {
        for (int x = 0; x < volume.width; ++x) {
            const int p = volume.index(x, y);
            belief = volume.costs.col(p);
            for (Neighbor n : kNeighbors) belief += field.front()[int(n)].col(p);
            int best = 0;
            for (int d = 1; d < volume.levels(); ++d)
                if (belief(d) < belief(best)) best = d;
            map(x, y) = best;
        }
    }
    return map;
}

/// Winner-take-all labeling: argmin of the data term alone.
template <typename Scalar>
DisparityMap winner_take_all(const CostVolume<Scalar>& volume) {
    return extract_disparity(volume, MessageField<Scalar>(volume.width, volume.height, volume.levels()));
}

/// Data cost of every label plus V over each 4-connected pair, counted once.
template <typename Scalar>
double labeling_energy(const CostVolume<Scalar>& volume, const DisparityMap& map, const SmoothnessParams& params) {
    if (map.width() != volume.width || map.height() != volume.height)
        throw Error("labeling and cost volume dimensions differ");
    double energy = 0.0;
    for (int y = 0; y < volume.height; ++y) {
        for (int x = 0; x < volume.width; ++x) {
            const int d = map(x, y);
            if (d == DisparityMap::kInvalid) throw Error("labeling contains INVALID labels");
            if (d < 0 || d >= volume.levels()) throw Error("label " + std::to_string(d) + " out of range");
            energy += static_cast<double>(volume(x, y, d));
            if (x + 1 < volume.width) energy += smoothness_cost(d, map(x + 1, y), params);
            if (y + 1 < volume.height) energy += smoothness_cost(d, map(x, y + 1), params);
        }
    }
    return energy;
}

/// One line of the per-sweep trace.
struct SweepRecord {
    int sweep = 0;
    int active = 0;  // pixels recomputed during this sweep
    double max_delta = 0;
    double energy = 0;
};

/// Runs up to config.max_sweeps sweeps on `field`. The fast schedule stops once no pixel is
/// active, since further sweeps would not change anything.
template <typename Scalar>
std::vector<SweepRecord> run_bp(const CostVolume<Scalar>& volume, MessageField<Scalar>& field,
                                const BpConfig& config) {
    config.validate();
    ConvergenceMask mask(volume.pixel_count(), config.epsilon);
    std::vector<SweepRecord> trace;
    for (int s = 1; s <= config.max_sweeps; ++s) {
        const SweepStats stats = sweep(volume, field, mask, config);
        trace.push_back({s, stats.updated, stats.max_delta,
                         labeling_energy(volume, extract_disparity(volume, field), config.smoothness)});
        if (config.schedule == Schedule::Fast && stats.active_after == 0) break;
    }
    return trace;
}

}  // namespace stereo_bp
