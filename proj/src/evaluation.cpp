#include "stereo_bp/evaluation.hpp"

#include <charconv>
#include <cstdio>
#include <limits>
#include <random>

namespace stereo_bp {

std::string EvalReport::to_csv() const {
    char thr[64];
    auto [end, ec] = std::to_chars(thr, thr + sizeof thr, threshold);
    std::string threshold_text(thr, end);
    if (threshold_text.find_first_of(".en") == std::string::npos) threshold_text += ".0";
    char line[256];
    std::snprintf(line, sizeof line, "%.6f,%s,%d,%d,%.6f", bad_pixel_rate, threshold_text.c_str(), evaluated_count,
                  excluded_count, mean_abs_error);
    return line;
}

EvalReport bad_pixel_rate(const DisparityMap& result, const DisparityMap& truth, double threshold, int border) {
    if (result.width() != truth.width() || result.height() != truth.height())
        throw Error("result is " + std::to_string(result.width()) + "x" + std::to_string(result.height()) +
                    " but truth is " + std::to_string(truth.width()) + "x" + std::to_string(truth.height()));
    if (!(threshold > 0.0)) throw Error("threshold must be > 0");

    EvalReport report;
    report.threshold = threshold;
    int bad = 0;
    int measured = 0;
    double abs_sum = 0.0;
    for (int y = 0; y < truth.height(); ++y) {
        for (int x = 0; x < truth.width(); ++x) {
            if (!truth.valid(x, y) || x < border) {
                ++report.excluded_count;
                continue;
            }
            ++report.evaluated_count;
            if (!result.valid(x, y)) {
                ++bad;
                continue;
            }
            const double err = std::abs(result(x, y) - truth(x, y));
            abs_sum += err;
            ++measured;
            if (err > threshold) ++bad;
        }
    }
    if (report.evaluated_count > 0) report.bad_pixel_rate = double(bad) / report.evaluated_count;
    if (measured > 0) report.mean_abs_error = abs_sum / measured;
    return report;
}

LabelingSolution exact_map_chain(const std::vector<Eigen::VectorXd>& costs, const SmoothnessParams& params) {
    if (costs.empty()) throw Error("empty chain");
    const int levels = static_cast<int>(costs.front().size());
    if (levels < 1) throw Error("chain nodes need at least one label");
    for (const auto& c : costs)
        if (c.size() != levels) throw Error("chain cost vectors differ in length");

    const int n = static_cast<int>(costs.size());
    // best(d, i): cheapest energy of nodes 0..i with node i at label d
    Eigen::MatrixXd best(levels, n);
    best.col(0) = costs[0];
    for (int i = 1; i < n; ++i) {
        for (int d = 0; d < levels; ++d) {
            double m = std::numeric_limits<double>::infinity();
            for (int e = 0; e < levels; ++e) m = std::min(m, best(e, i - 1) + smoothness_cost(e, d, params));
            best(d, i) = costs[i](d) + m;
        }
    }

    LabelingSolution solution;
    solution.labels.assign(n, 0);
    int label = 0;
    for (int d = 1; d < levels; ++d)
        if (best(d, n - 1) < best(label, n - 1)) label = d;
    solution.labels[n - 1] = label;
    solution.energy = best(label, n - 1);
    for (int i = n - 1; i > 0; --i) {
        const int next = solution.labels[i];
        int arg = 0;
        double m = std::numeric_limits<double>::infinity();
        for (int e = 0; e < levels; ++e) {
            const double v = best(e, i - 1) + smoothness_cost(e, next, params);
            if (v < m) {
                m = v;
                arg = e;
            }
        }
        solution.labels[i - 1] = arg;
    }
    return solution;
}

Stereogram random_dot_stereogram(int width, int height, int shift, std::uint32_t seed) {
    if (width < 1 || height < 1) throw Error("stereogram dimensions must be positive");
    if (shift < 0 || 4 * shift >= width)
        throw Error("shift " + std::to_string(shift) + " must satisfy 0 <= shift < width/4 (width " +
                    std::to_string(width) + ")");

    // mt19937 output is fully specified, so the top byte gives portable noise.
    std::mt19937 rng(seed);
    auto noise = [&rng] { return static_cast<std::uint8_t>(rng() >> 24); };

    Stereogram s{GrayImage(width, height), GrayImage(width, height), DisparityMap(width, height, shift + 1)};
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) s.left(x, y) = noise();
    s.right = s.left;

    const int x0 = width / 4, x1 = 3 * width / 4;
    const int y0 = height / 4, y1 = 3 * height / 4;
    if (shift == 0) return s;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            s.right(x - shift, y) = s.left(x, y);
            s.truth(x, y) = shift;
        }
        for (int x = std::max(x0, x1 - shift); x < x1; ++x) s.right(x, y) = noise();
    }
    return s;
}

}  // namespace stereo_bp
