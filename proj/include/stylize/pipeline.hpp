#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stylize/align.hpp"
#include "stylize/image.hpp"
#include "stylize/mrf.hpp"

namespace stylize {

struct PipelineConfig {
    int patch_size = 40;
    int stride = 20;
    int stack_depth = 5;
    double alpha = 0.8;
    double sigma_d = 0.5;
    double sigma_c = 1.0;
    double eps_remap = 1e-4;
    double gain_max = 10.0;
    int bp_iters = 10;
    double bp_tol = 1e-6;
    int gf_radius = 60;
    double gf_eps = 0.02;
    SelectionMode selection_mode = SelectionMode::argmax;
    RefineMode refine = RefineMode::off;
    bool dump_intermediate = false;
    double working_scale = 1.0;

    void validate() const; // throws on out-of-range fields
};

/// Overlay `base` with key=value lines from a config file. Keys are the
/// PipelineConfig field names; unknown keys are rejected.
PipelineConfig load_config(const std::string& path, PipelineConfig base = {});

struct RunInputs {
    std::string input_path;
    std::string landmarks_path;
    std::string manifest_path;
    std::string output_path;
    std::string matte_path;      // optional; requires background_path
    std::string background_path; // optional
    std::string dump_dir;        // optional; enables intermediate dumps
};

struct RunResult {
    Image output;        // final image at working scale
    Image working_input; // the input after optional downscale
    LabelField labels;   // per patch node
    int grid_cols = 0;
    int grid_rows = 0;
    int bp_iterations = 0;
    bool bp_converged = false;
    int floor_warnings = 0;
    double psnr_vs_input = 0.0;
    std::vector<std::pair<std::string, std::string>> report; // written kv lines
};

/// Full run: load, align every exemplar, solve the patch MRF on luminance,
/// remap the band energy, clean up seams, optionally substitute the
/// background, and write the output, a node label map (<out>.labels.png)
/// and a report (<out>.report.txt). Aborts on the first hard error with a
/// stage-tagged message.
RunResult run_pipeline(const RunInputs& inputs, const PipelineConfig& config);

/// 10*log10(1/MSE) over all samples, peak 1.0. Identical images give +inf.
double psnr(const Image& a, const Image& b);

} // namespace stylize
