#include "stylize/pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "stylize/cleanup.hpp"
#include "stylize/landmarks.hpp"
#include "stylize/stack.hpp"
#include "stylize/transfer.hpp"

namespace stylize {

void PipelineConfig::validate() const {
    auto fail = [](const std::string& msg) {
        throw std::invalid_argument("config: " + msg);
    };
    if (patch_size < 2) fail("patch_size must be >= 2");
    if (stride < 1 || stride > patch_size) fail("stride must be in [1, patch_size]");
    if (stack_depth < 2) fail("stack_depth must be >= 2");
    if (alpha < 0.0 || alpha > 1.0) fail("alpha must be in [0, 1]");
    if (sigma_d <= 0.0) fail("sigma_d must be positive");
    if (sigma_c <= 0.0) fail("sigma_c must be positive");
    if (eps_remap <= 0.0) fail("eps_remap must be positive");
    if (gain_max <= 0.0) fail("gain_max must be positive");
    if (bp_iters < 1) fail("bp_iters must be >= 1");
    if (bp_tol < 0.0) fail("bp_tol must be >= 0");
    if (gf_radius < 1) fail("gf_radius must be >= 1");
    if (gf_eps < 0.0) fail("gf_eps must be >= 0");
    if (working_scale <= 0.0 || working_scale > 8.0)
        fail("working_scale must be in (0, 8]");
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t\r\n");
        if (first == std::string::npos || line[first] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected key=value");
        auto strip = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r\n");
            auto e = s.find_last_not_of(" \t\r\n");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        auto as_int = [&] { return std::stoi(value); };
        auto as_double = [&] { return std::stod(value); };
        auto as_bool = [&] {
            if (value == "1" || value == "true") return true;
            if (value == "0" || value == "false") return false;
            throw std::runtime_error(path + ": bad boolean for " + key);
        };
        if (key == "patch_size") base.patch_size = as_int();
        else if (key == "stride") base.stride = as_int();
        else if (key == "stack_depth") base.stack_depth = as_int();
        else if (key == "alpha") base.alpha = as_double();
        else if (key == "sigma_d") base.sigma_d = as_double();
        else if (key == "sigma_c") base.sigma_c = as_double();
        else if (key == "eps_remap") base.eps_remap = as_double();
        else if (key == "gain_max") base.gain_max = as_double();
        else if (key == "bp_iters") base.bp_iters = as_int();
        else if (key == "bp_tol") base.bp_tol = as_double();
        else if (key == "gf_radius") base.gf_radius = as_int();
        else if (key == "gf_eps") base.gf_eps = as_double();
        else if (key == "working_scale") base.working_scale = as_double();
        else if (key == "dump_intermediate") base.dump_intermediate = as_bool();
        else if (key == "selection_mode") {
            if (value == "argmax") base.selection_mode = SelectionMode::argmax;
            else if (value == "mmse") base.selection_mode = SelectionMode::mmse;
            else throw std::runtime_error(path + ": selection_mode must be argmax or mmse");
        } else if (key == "refine") {
            if (value == "off") base.refine = RefineMode::off;
            else if (value == "blockmatch") base.refine = RefineMode::blockmatch;
            else throw std::runtime_error(path + ": refine must be off or blockmatch");
        } else {
            throw std::runtime_error(path + ": unknown config key '" + key + "'");
        }
    }
    return base;
}

double psnr(const Image& a, const Image& b) {
    if (!a.same_shape(b))
        throw std::invalid_argument("psnr: image dimensions differ");
    auto pa = a.samples();
    auto pb = b.samples();
    double acc = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double d = static_cast<double>(pa[i]) - pb[i];
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(pa.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

using Clock = std::chrono::steady_clock;

struct StageScope {
    // Tags any exception out of `fn` with the stage name and records the
    // elapsed time into `ms`.
    template <typename F>
    static auto run(const std::string& stage, double& ms, F&& fn) {
        const auto start = Clock::now();
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                ms = elapsed(start);
            } else {
                auto value = fn();
                ms = elapsed(start);
                return value;
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("[" + stage + "] " + e.what());
        }
    }
    static double elapsed(Clock::time_point start) {
        return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }
};

int scaled_dim(int v, double scale) {
    return std::max(1, static_cast<int>(std::lround(v * scale)));
}

// Fixed palette for the node label map.
constexpr std::array<std::array<float, 3>, 12> kLabelPalette = {{
    {0.894f, 0.102f, 0.110f}, {0.216f, 0.494f, 0.722f}, {0.302f, 0.686f, 0.290f},
    {0.596f, 0.306f, 0.639f}, {1.000f, 0.498f, 0.000f}, {1.000f, 1.000f, 0.200f},
    {0.651f, 0.337f, 0.157f}, {0.969f, 0.506f, 0.749f}, {0.600f, 0.600f, 0.600f},
    {0.121f, 0.471f, 0.706f}, {0.682f, 0.780f, 0.910f}, {0.090f, 0.745f, 0.812f},
}};

Image render_label_map(const LabelField& labels, int cols, int rows) {
    Image map(cols, rows, 3);
    for (int gy = 0; gy < rows; ++gy) {
        for (int gx = 0; gx < cols; ++gx) {
            const auto& rgb = kLabelPalette[labels.label[gy * cols + gx] % kLabelPalette.size()];
            for (int c = 0; c < 3; ++c) map.at(c, gx, gy) = rgb[c];
        }
    }
    return map;
}

void write_pfm(const std::vector<float>& plane, int w, int h, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write field dump: " + path);
    out << "Pf\n" << w << " " << h << "\n-1.0\n";
    for (int y = h - 1; y >= 0; --y)
        out.write(reinterpret_cast<const char*>(plane.data() + static_cast<std::size_t>(y) * w),
                  static_cast<std::streamsize>(w) * sizeof(float));
}

// Signed plane as an image with 0 mapped to mid-gray.
Image signed_offset(const Image& plane) {
    Image out(plane.width(), plane.height(), 1);
    auto src = plane.plane(0);
    auto dst = out.plane(0);
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = std::clamp(src[i] + 0.5f, 0.0f, 1.0f);
    return out;
}

struct ExemplarPrep {
    CorrespondenceField field;
    Image warped_luma;
    PreparedExemplar prepared;
};

} // namespace

RunResult run_pipeline(const RunInputs& inputs, const PipelineConfig& config) {
    config.validate();
    if (!inputs.matte_path.empty() && inputs.background_path.empty())
        throw std::runtime_error("[background] matte given without a background image");
    if (inputs.matte_path.empty() && !inputs.background_path.empty())
        throw std::runtime_error("[background] background image given without a matte");

    RunResult result;
    std::vector<std::pair<std::string, double>> timings;
    auto timed = [&](const std::string& stage, auto&& fn) {
        double ms = 0.0;
        if constexpr (std::is_void_v<decltype(fn())>) {
            StageScope::run(stage, ms, fn);
            timings.emplace_back(stage, ms);
        } else {
            auto value = StageScope::run(stage, ms, fn);
            timings.emplace_back(stage, ms);
            return value;
        }
    };

    const double scale = config.working_scale;

    // Resolution-dependent parameters follow the working scale; the blur
    // schedule and stack depth are fixed by the decomposition definition.
    const int eff_patch = std::max(2, static_cast<int>(std::lround(config.patch_size * scale)));
    const int eff_stride = std::clamp(static_cast<int>(std::lround(config.stride * scale)), 1, eff_patch);
    const int eff_gf_radius = std::max(1, static_cast<int>(std::lround(config.gf_radius * scale)));

    // --- load input photo and landmarks ---
    int source_w = 0, source_h = 0;
    Image input = timed("load", [&] {
        Image raw = load_image(inputs.input_path);
        source_w = raw.width();
        source_h = raw.height();
        if (scale != 1.0)
            raw = resize_image(raw, scaled_dim(raw.width(), scale), scaled_dim(raw.height(), scale));
        return raw;
    });

    const LandmarkSet input_lm = timed("landmarks", [&] {
        // Validated against the source resolution, then moved to the
        // working frame.
        LandmarkSet lm = load_landmarks(inputs.landmarks_path, source_w, source_h);
        if (scale != 1.0)
            lm = scale_landmarks(lm, scale, input.width(), input.height());
        return lm;
    });

    // --- load the style collection ---
    struct ExemplarSource {
        Image image;
        LandmarkSet landmarks;
    };
    CollectionManifest manifest;
    std::vector<ExemplarSource> sources = timed("manifest", [&] {
        manifest = load_manifest(inputs.manifest_path);
        std::vector<ExemplarSource> out;
        int ref_w = -1, ref_h = -1;
        for (const auto& entry : manifest.exemplars) {
            Image img = load_image(entry.image_path);
            if (ref_w < 0) {
                ref_w = img.width();
                ref_h = img.height();
            } else if (img.width() != ref_w || img.height() != ref_h) {
                throw std::runtime_error("exemplar resolution mismatch: " + entry.image_path);
            }
            if (img.channels() != input.channels())
                throw std::runtime_error("exemplar channel count differs from input: " +
                                         entry.image_path);
            LandmarkSet lm = load_landmarks(entry.landmark_path, img.width(), img.height());
            if (scale != 1.0) {
                img = resize_image(img, scaled_dim(img.width(), scale),
                                   scaled_dim(img.height(), scale));
                lm = scale_landmarks(lm, scale, img.width(), img.height());
            }
            out.push_back({std::move(img), std::move(lm)});
        }
        return out;
    });
    const int k = static_cast<int>(sources.size());

    // --- align each exemplar and decompose it in its own frame ---
    const Image input_luma = to_luma(input);
    std::vector<ExemplarPrep> preps(k);
    timed("align", [&] {
        const TriangleMesh mesh = triangulate(input_lm, input.width(), input.height());
        auto prepare_one = [&](int i) {
            const ExemplarSource& src = sources[i];
            ExemplarPrep prep;
            prep.field = local_affine_field(input_lm, src.landmarks, mesh);
            if (config.refine == RefineMode::blockmatch) {
                const Image warped = warp(src.image, prep.field);
                RefineParams rp;
                rp.mode = RefineMode::blockmatch;
                const CorrespondenceField residual = refine_dense(warped, input, rp);
                prep.field = compose(prep.field, residual);
            }
            prep.warped_luma = to_luma(warp(src.image, prep.field));
            prep.prepared = prepare_exemplar(src.image, prep.field, config.stack_depth);
            return prep;
        };
        const int workers = std::max(1, std::min<int>(
            static_cast<int>(std::thread::hardware_concurrency()), k));
        for (int base = 0; base < k; base += workers) {
            std::vector<std::future<ExemplarPrep>> futures;
            const int end = std::min(base + workers, k);
            for (int i = base; i < end; ++i)
                futures.push_back(std::async(std::launch::async, prepare_one, i));
            for (int i = base; i < end; ++i)
                preps[i] = futures[i - base].get();
        }
    });

    // --- patch selection on luminance ---
    const PatchGrid grid(input.width(), input.height(), eff_patch, eff_stride);
    LabelBeliefs beliefs = timed("mrf", [&] {
        std::vector<Image> lumas;
        lumas.reserve(k);
        for (auto& p : preps) lumas.push_back(p.warped_luma);
        MatchParams mp;
        mp.alpha = config.alpha;
        mp.sigma_d = config.sigma_d;
        mp.sigma_c = config.sigma_c;
        const MrfProblem problem = build_patch_problem(input_luma, lumas, grid, mp);
        return run_bp(problem, {config.bp_iters, config.bp_tol});
    });
    result.labels = select_labels(beliefs, config.selection_mode);
    result.grid_cols = grid.cols();
    result.grid_rows = grid.rows();
    result.bp_iterations = beliefs.iterations;
    result.bp_converged = beliefs.converged;
    result.floor_warnings = beliefs.floor_warnings;

    // --- band-energy remap ---
    Image remapped = timed("transfer", [&] {
        std::vector<PreparedExemplar> prepared;
        prepared.reserve(k);
        for (auto& p : preps) prepared.push_back(std::move(p.prepared));
        const PixelWeights w = pixel_weights(result.labels, grid, input.width(), input.height());
        TransferParams tp;
        tp.stack_depth = config.stack_depth;
        tp.eps_remap = config.eps_remap;
        tp.gain_max = config.gain_max;
        return transfer(input, prepared, w, tp);
    });

    // --- artifact removal ---
    Image output = timed("cleanup", [&] {
        return remove_artifacts(remapped, input, eff_gf_radius, config.gf_eps);
    });

    // --- optional background substitution ---
    if (!inputs.matte_path.empty()) {
        output = timed("background", [&] {
            Image matte = to_luma(load_image(inputs.matte_path));
            Image bg = load_image(inputs.background_path);
            if (matte.width() != output.width() || matte.height() != output.height())
                matte = resize_image(matte, output.width(), output.height());
            if (bg.width() != output.width() || bg.height() != output.height())
                bg = resize_image(bg, output.width(), output.height());
            if (bg.channels() != output.channels())
                throw std::runtime_error("background channel count differs from output");
            return substitute_background(output, matte, bg);
        });
    }

    // --- save output, label map, optional dumps ---
    timed("save", [&] {
        save_image(output, inputs.output_path);
        save_image(render_label_map(result.labels, grid.cols(), grid.rows()),
                   inputs.output_path + ".labels.png");
        if (!inputs.dump_dir.empty()) {
            namespace fs = std::filesystem;
            fs::create_directories(inputs.dump_dir);
            const fs::path dir(inputs.dump_dir);
            save_image(remapped, (dir / "remapped.png").string());
            for (int i = 0; i < k; ++i) {
                const auto tag = std::to_string(i);
                save_image(preps[i].warped_luma, (dir / ("warped_luma_" + tag + ".png")).string());
                write_pfm(preps[i].field.dx, input.width(), input.height(),
                          (dir / ("field_" + tag + ".dx.pfm")).string());
                write_pfm(preps[i].field.dy, input.width(), input.height(),
                          (dir / ("field_" + tag + ".dy.pfm")).string());
            }
            if (config.dump_intermediate) {
                const LaplacianStack stack = build_stack(input_luma, config.stack_depth);
                for (int l = 0; l < static_cast<int>(stack.layers.size()); ++l) {
                    save_image(signed_offset(stack.layers[l]),
                               (dir / ("input_layer_" + std::to_string(l) + ".png")).string());
                    save_image(energy_map(stack.layers[l], l),
                               (dir / ("input_energy_" + std::to_string(l) + ".png")).string());
                }
                save_image(stack.residual, (dir / "input_residual.png").string());
            }
        }
    });

    result.psnr_vs_input = psnr(output, input);
    result.output = std::move(output);
    result.working_input = std::move(input);

    // --- report ---
    auto& report = result.report;
    report.emplace_back("input", inputs.input_path);
    report.emplace_back("collection", inputs.manifest_path);
    report.emplace_back("style_name", manifest.style_name);
    report.emplace_back("exemplars", std::to_string(k));
    report.emplace_back("working_scale", std::to_string(scale));
    report.emplace_back("working_size", std::to_string(result.working_input.width()) + "x" +
                                            std::to_string(result.working_input.height()));
    report.emplace_back("patch_size_effective", std::to_string(eff_patch));
    report.emplace_back("stride_effective", std::to_string(eff_stride));
    report.emplace_back("gf_radius_effective", std::to_string(eff_gf_radius));
    report.emplace_back("grid", std::to_string(result.grid_cols) + "x" +
                                    std::to_string(result.grid_rows));
    report.emplace_back("selection_mode",
                        config.selection_mode == SelectionMode::argmax ? "argmax" : "mmse");
    report.emplace_back("bp_iterations", std::to_string(result.bp_iterations));
    report.emplace_back("bp_converged", result.bp_converged ? "1" : "0");
    report.emplace_back("unary_floor_warnings", std::to_string(result.floor_warnings));
    {
        std::ostringstream hist;
        std::vector<int> counts(k, 0);
        for (int label : result.labels.label) ++counts[label];
        for (int i = 0; i < k; ++i) {
            if (i) hist << ",";
            hist << i << ":" << counts[i];
        }
        report.emplace_back("label_histogram", hist.str());
    }
    {
        std::ostringstream p;
        p.precision(4);
        p << std::fixed << result.psnr_vs_input;
        report.emplace_back("psnr_vs_input_db", p.str());
    }
    for (const auto& [stage, ms] : timings) {
        std::ostringstream v;
        v.precision(1);
        v << std::fixed << ms;
        report.emplace_back("stage_ms_" + stage, v.str());
    }

    timed("report", [&] {
        const std::string path = inputs.output_path + ".report.txt";
        std::ofstream out(path);
        if (!out)
            throw std::runtime_error("cannot write report: " + path);
        for (const auto& [key, value] : result.report)
            out << key << "=" << value << "\n";
    });

    return result;
}

} // namespace stylize
