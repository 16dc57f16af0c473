#include "stereo_bp/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "stereo_bp/evaluation.hpp"
#include "stereo_bp/pixmap_io.hpp"

namespace stereo_bp::cli {

namespace {

int parse_int(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error("invalid " + what + " '" + text + "'");
}

std::vector<int> parse_sweeps(const std::string& text, int scale_count) {
    std::vector<int> sweeps;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) sweeps.push_back(parse_int(item, "sweep budget"));
    if (sweeps.size() == 1 && scale_count > 1) sweeps.assign(scale_count, sweeps.front());
    return sweeps;
}

int parse_threads(const std::string& text) {
    if (text == "auto" || text == "AUTO") return resolve_threads(0);
    const int n = parse_int(text, "thread count");
    if (n < 1) throw Error("thread count must be >= 1 or 'auto'");
    return n;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::vector<int> default_sweeps(int scale_count) {
    std::vector<int> sweeps(std::max(scale_count, 0), 10);
    if (!sweeps.empty()) sweeps.back() = 20;
    return sweeps;
}

std::filesystem::path trace_path(const std::filesystem::path& out) {
    std::filesystem::path p = out;
    p.replace_extension(".trace.csv");
    return p;
}

void cmd_match(const RunConfig& config, std::ostream& out) {
    if (config.max_disp < 1) throw Error("--max-disp must be >= 1");
    if (config.disp_scale < 1) throw Error("--disp-scale must be >= 1");
    if ((config.max_disp - 1) * config.disp_scale > 255)
        throw Error("max disparity " + std::to_string(config.max_disp - 1) + " x scale " +
                    std::to_string(config.disp_scale) + " does not fit in 8-bit output");
    config.ncc.validate();
    if (config.ncc.candidate_count && *config.ncc.candidate_count > config.max_disp)
        throw Error("--topk exceeds --max-disp");

    const GrayImage left = read_pgm(config.left_path);
    const GrayImage right = read_pgm(config.right_path);
    std::optional<DisparityMap> truth;
    if (config.truth_path) {
        truth = gray_to_disparity(read_pgm(*config.truth_path), config.disp_scale);
        if (truth->width() != left.width() || truth->height() != left.height())
            throw Error("truth is " + std::to_string(truth->width()) + "x" + std::to_string(truth->height()) +
                        " but images are " + std::to_string(left.width()) + "x" + std::to_string(left.height()));
    }

    PyramidConfig pyramid = config.pyramid;
    pyramid.bp.threads = config.threads;
    const auto volume = prune_candidates(build_cost_volume<double>(left, right, config.max_disp, config.ncc),
                                         config.ncc.candidate_count);
    HierarchicalResult result = run_hierarchical(volume, pyramid);
    result.disparity.scale_factor = config.disp_scale;
    write_pgm(result.disparity, config.out_path);

    if (config.trace) {
        const auto path = trace_path(config.out_path);
        std::ofstream trace(path, std::ios::trunc);
        if (!trace) throw Error("cannot open '" + path.string() + "' for writing");
        trace << "scale,sweep,active,max_delta,energy\n";
        for (const auto& scale : result.scales)
            for (const auto& s : scale.sweeps)
                trace << scale.scale << ',' << s.sweep << ',' << s.active << ',' << format_double(s.max_delta) << ','
                      << format_double(s.energy) << '\n';
        if (!trace) throw Error("write failed for '" + path.string() + "'");
    }

    if (truth)
        out << bad_pixel_rate(result.disparity, *truth, config.threshold, config.border.value_or(config.max_disp))
                   .to_csv()
            << '\n';
}

void cmd_eval(const std::filesystem::path& result_path, const std::filesystem::path& truth_path, double threshold,
              int border, int disp_scale, std::ostream& out) {
    const auto result = gray_to_disparity(read_pgm(result_path), disp_scale);
    const auto truth = gray_to_disparity(read_pgm(truth_path), disp_scale);
    out << bad_pixel_rate(result, truth, threshold, border).to_csv() << '\n';
}

void cmd_synth(int width, int height, int shift, std::uint32_t seed, const std::filesystem::path& out_left,
               const std::filesystem::path& out_right, const std::filesystem::path& out_truth, int disp_scale) {
    Stereogram s = random_dot_stereogram(width, height, shift, seed);
    s.truth.scale_factor = disp_scale;
    const GrayImage truth = disparity_to_gray(s.truth);
    write_pgm(s.left, out_left);
    write_pgm(s.right, out_right);
    write_pgm(truth, out_truth);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dense stereo matching with NCC costs and hierarchical loopy belief propagation", "stereo_bp"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value file whose entries mirror the flags (flags win)");

    const char* env_threads = std::getenv("STEREO_BP_THREADS");
    std::string threads_text = env_threads && *env_threads ? env_threads : "auto";

    // match
    RunConfig rc;
    std::string left, right, truth, result_out, sweeps_text, topk_text = "all", schedule_text = "fast";
    double epsilon = 1e-3;
    int window = 2;
    auto* match = app.add_subcommand("match", "Compute a disparity map for a rectified pair");
    match->add_option("--left", left, "Left (reference) PGM")->required();
    match->add_option("--right", right, "Right PGM")->required();
    match->add_option("--truth", truth, "Ground-truth disparity PGM; prints an evaluation line");
    match->add_option("--out", result_out, "Output disparity PGM")->required();
    match->add_option("--max-disp", rc.max_disp, "Number of disparity levels L")->capture_default_str();
    match->add_option("--scales", rc.pyramid.scale_count, "Pyramid scales")->capture_default_str();
    match->add_option("--sweeps", sweeps_text, "Sweep budgets, coarsest first (comma list or one value)");
    match->add_option("--epsilon", epsilon, "Convergence threshold for the fast schedule")->capture_default_str();
    match->add_option("--schedule", schedule_text, "full | fast")
        ->check(CLI::IsMember({"full", "fast"}))
        ->capture_default_str();
    match->add_option("--window", window, "NCC window radius")->capture_default_str();
    match->add_option("--topk", topk_text, "Candidate levels kept per pixel, or 'all'")->capture_default_str();
    match->add_option("--data-weight", rc.ncc.data_weight, "Scale of 1 - NCC")->capture_default_str();
    match->add_option("--data-trunc", rc.ncc.data_truncation, "Data cost ceiling")->capture_default_str();
    match->add_option("--slope", rc.pyramid.bp.smoothness.slope, "Jump cost per level")->capture_default_str();
    match->add_option("--jump-trunc", rc.pyramid.bp.smoothness.truncation, "Jump cost ceiling")
        ->capture_default_str();
    match->add_option("--disp-scale", rc.disp_scale, "Gray value per disparity level")->capture_default_str();
    match->add_option("--threshold", rc.threshold, "Bad-pixel threshold")->capture_default_str();
    auto* match_border = match->add_option("--border", "Excluded left columns (default: max-disp)");
    match->add_option("--threads", threads_text, "Worker threads or 'auto'");
    match->add_option("--seed", rc.seed, "RNG seed")->capture_default_str();
    match->add_flag("--trace", rc.trace, "Write <out>.trace.csv");

    // eval
    std::string eval_result, eval_truth;
    double eval_threshold = 1.0;
    int eval_border = 0, eval_scale = 8;
    auto* eval = app.add_subcommand("eval", "Score a disparity map against ground truth");
    eval->add_option("--result", eval_result, "Disparity PGM to score")->required();
    eval->add_option("--truth", eval_truth, "Ground-truth disparity PGM")->required();
    eval->add_option("--threshold", eval_threshold, "Bad-pixel threshold")->capture_default_str();
    eval->add_option("--border", eval_border, "Excluded left columns")->capture_default_str();
    eval->add_option("--disp-scale", eval_scale, "Gray value per disparity level")->capture_default_str();

    // synth
    std::string synth_left, synth_right, synth_truth;
    int synth_width = 128, synth_height = 128, synth_shift = 5, synth_scale = 8;
    std::uint32_t synth_seed = 1;
    auto* synth = app.add_subcommand("synth", "Write a random-dot stereogram with exact ground truth");
    synth->add_option("--left", synth_left, "Output left PGM")->required();
    synth->add_option("--right", synth_right, "Output right PGM")->required();
    synth->add_option("--truth", synth_truth, "Output truth PGM")->required();
    synth->add_option("--width", synth_width)->capture_default_str();
    synth->add_option("--height", synth_height)->capture_default_str();
    synth->add_option("--shift", synth_shift)->capture_default_str();
    synth->add_option("--seed", synth_seed)->capture_default_str();
    synth->add_option("--disp-scale", synth_scale, "Gray value per disparity level")->capture_default_str();

    std::vector<const char*> argv{"stereo_bp"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (*match) {
            rc.left_path = left;
            rc.right_path = right;
            if (!truth.empty()) rc.truth_path = truth;
            rc.out_path = result_out;
            rc.ncc.window_radius = window;
            if (topk_text != "all" && topk_text != "ALL") rc.ncc.candidate_count = parse_int(topk_text, "--topk");
            rc.pyramid.bp.epsilon = epsilon;
            rc.pyramid.bp.schedule = schedule_text == "full" ? Schedule::Full : Schedule::Fast;
            rc.pyramid.sweeps_per_scale = sweeps_text.empty() ? default_sweeps(rc.pyramid.scale_count)
                                                              : parse_sweeps(sweeps_text, rc.pyramid.scale_count);
            if (*match_border) rc.border = match_border->as<int>();
            rc.threads = parse_threads(threads_text);
            cmd_match(rc, out);
        } else if (*eval) {
            cmd_eval(eval_result, eval_truth, eval_threshold, eval_border, eval_scale, out);
        } else if (*synth) {
            cmd_synth(synth_width, synth_height, synth_shift, synth_seed, synth_left, synth_right, synth_truth,
                      synth_scale);
        }
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (char& c : msg)
            if (c == '\n') c = ' ';
        err << "error: " << msg << '\n';
        return 1;
    }
    return 0;
}

}  // namespace stereo_bp::cli
