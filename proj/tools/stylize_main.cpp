#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "stylize/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Multi-exemplar headshot style transfer"};

    stylize::RunInputs inputs;
    std::string config_path;
    std::string mode = "argmax";
    std::string refine = "off";
    double scale = 1.0;
    bool dump_intermediate = false;

    app.add_option("--input", inputs.input_path, "Input photo (PNG/JPEG)")->required();
    app.add_option("--landmarks", inputs.landmarks_path, "68-point landmark file for the input")
        ->required();
    app.add_option("--collection", inputs.manifest_path, "Style collection manifest")->required();
    app.add_option("--out", inputs.output_path, "Output image path")->required();
    app.add_option("--scale", scale, "Working scale applied to all images")
        ->check(CLI::Range(1e-3, 8.0));
    app.add_option("--mode", mode, "Patch selection: argmax or mmse")
        ->check(CLI::IsMember({"argmax", "mmse"}));
    app.add_option("--refine", refine, "Dense refinement: off or blockmatch")
        ->check(CLI::IsMember({"off", "blockmatch"}));
    app.add_option("--dump-dir", inputs.dump_dir, "Directory for diagnostic dumps");
    app.add_option("--matte", inputs.matte_path, "Foreground matte (with --background)");
    app.add_option("--background", inputs.background_path, "Replacement background image");
    app.add_option("--config", config_path, "key=value config file overriding defaults");
    app.add_flag("--dump-intermediate", dump_intermediate,
                 "Also dump stack layers and energy maps into --dump-dir");

    CLI11_PARSE(app, argc, argv);

    try {
        stylize::PipelineConfig config;
        if (!config_path.empty())
            config = stylize::load_config(config_path, config);
        // Explicitly passed flags override the config file.
        if (app.count("--scale")) config.working_scale = scale;
        if (app.count("--mode"))
            config.selection_mode = mode == "mmse" ? stylize::SelectionMode::mmse
                                                   : stylize::SelectionMode::argmax;
        if (app.count("--refine"))
            config.refine = refine == "blockmatch" ? stylize::RefineMode::blockmatch
                                                   : stylize::RefineMode::off;
        if (dump_intermediate) config.dump_intermediate = true;

        const stylize::RunResult result = stylize::run_pipeline(inputs, config);
        std::printf("wrote %s (%dx%d, %d exemplar labels, bp %d iters%s)\n",
                    inputs.output_path.c_str(), result.output.width(),
                    result.output.height(), result.labels.labels,
                    result.bp_iterations, result.bp_converged ? "" : ", not converged");
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
