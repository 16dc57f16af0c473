#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stereo_bp/cost_volume.hpp"
#include "stereo_bp/hierarchy.hpp"

namespace stereo_bp::cli {

struct RunConfig {
    std::filesystem::path left_path;
    std::filesystem::path right_path;
    std::optional<std::filesystem::path> truth_path;
    std::filesystem::path out_path;
    int max_disp = 20;
    NccParams ncc;
    PyramidConfig pyramid;
    int disp_scale = 8;
    int threads = 1;  // already resolved
    std::uint32_t seed = 0;
    bool trace = false;
    double threshold = 1.0;
    std::optional<int> border;  // defaults to max_disp
};

/// Default budgets for `scale_count` scales: 10 sweeps per coarse scale, 20 at the finest.
std::vector<int> default_sweeps(int scale_count);

/// Path of the trace written for `out`: same directory and stem, extension `.trace.csv`.
std::filesystem::path trace_path(const std::filesystem::path& out);

// The cmd_* functions throw stereo_bp::Error on failure.
void cmd_match(const RunConfig& config, std::ostream& out);
void cmd_eval(const std::filesystem::path& result_path, const std::filesystem::path& truth_path, double threshold,
              int border, int disp_scale, std::ostream& out);
void cmd_synth(int width, int height, int shift, std::uint32_t seed, const std::filesystem::path& out_left,
               const std::filesystem::path& out_right, const std::filesystem::path& out_truth, int disp_scale);

/// Parses `args` (without the program name) and dispatches. Returns the process exit status;
/// failures print exactly one line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stereo_bp::cli
