#include "stylize/cleanup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace stylize {

namespace {

// Clipped-window box mean over a double plane, normalized by the in-bounds
// sample count. The filter statistics are kept in double end to end so the
// identity cases (guide == src, eps = 0) hold to well below 1e-6.
std::vector<double> box_mean_d(const std::vector<double>& src, int w, int h, int radius) {
    std::vector<double> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    auto S = [&](int x, int y) -> double& {
        return sat[static_cast<std::size_t>(y) * (w + 1) + x];
    };
    for (int y = 0; y < h; ++y) {
        double row = 0.0;
        for (int x = 0; x < w; ++x) {
            row += src[static_cast<std::size_t>(y) * w + x];
            S(x + 1, y + 1) = S(x + 1, y) + row;
        }
    }
    std::vector<double> out(src.size());
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - radius);
        const int y1 = std::min(h - 1, y + radius);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - radius);
            const int x1 = std::min(w - 1, x + radius);
            const double sum =
                S(x1 + 1, y1 + 1) - S(x0, y1 + 1) - S(x1 + 1, y0) + S(x0, y0);
            out[static_cast<std::size_t>(y) * w + x] =
                sum / ((x1 - x0 + 1) * (y1 - y0 + 1));
        }
    }
    return out;
}

std::vector<double> to_double(std::span<const float> p) {
    return {p.begin(), p.end()};
}

} // namespace

Image guided_filter(const Image& src, const Image& guide, int radius, double eps) {
    if (guide.channels() != 1)
        throw std::invalid_argument("guided_filter: guide must be single-channel");
    if (src.width() != guide.width() || src.height() != guide.height())
        throw std::invalid_argument("guided_filter: src/guide dimensions differ");
    if (radius < 1)
        throw std::invalid_argument("guided_filter: radius must be >= 1");
    if (eps < 0.0)
        throw std::invalid_argument("guided_filter: eps must be >= 0");

    const int w = src.width(), h = src.height();
    const std::size_t n = static_cast<std::size_t>(w) * h;

    const std::vector<double> guide_d = to_double(guide.plane(0));
    std::vector<double> guide_sq(n);
    for (std::size_t i = 0; i < n; ++i) guide_sq[i] = guide_d[i] * guide_d[i];
    const std::vector<double> mean_guide = box_mean_d(guide_d, w, h, radius);
    const std::vector<double> corr_guide = box_mean_d(guide_sq, w, h, radius);

    Image out(w, h, src.channels());
    std::vector<double> src_d(n), prod(n), a(n), b(n);
    for (int c = 0; c < src.channels(); ++c) {
        auto sp = src.plane(c);
        for (std::size_t i = 0; i < n; ++i) {
            src_d[i] = sp[i];
            prod[i] = guide_d[i] * src_d[i];
        }
        const std::vector<double> mean_src = box_mean_d(src_d, w, h, radius);
        const std::vector<double> corr = box_mean_d(prod, w, h, radius);
        for (std::size_t i = 0; i < n; ++i) {
            const double var = corr_guide[i] - mean_guide[i] * mean_guide[i];
            const double cov = corr[i] - mean_guide[i] * mean_src[i];
            const double denom = var + eps;
            if (denom < 1e-12) { // flat window: reproduce its mean
                a[i] = 0.0;
                b[i] = mean_src[i];
            } else {
                a[i] = cov / denom;
                b[i] = mean_src[i] - a[i] * mean_guide[i];
            }
        }
        const std::vector<double> mean_a = box_mean_d(a, w, h, radius);
        const std::vector<double> mean_b = box_mean_d(b, w, h, radius);
        auto dst = out.plane(c);
        for (std::size_t i = 0; i < n; ++i)
            dst[i] = static_cast<float>(mean_a[i] * guide_d[i] + mean_b[i]);
    }
    return out;
}

Image remove_artifacts(const Image& remapped, const Image& input,
                       int radius, double eps) {
    if (!remapped.same_shape(input))
        throw std::invalid_argument("remove_artifacts: image dimensions differ");
    const Image guide = to_luma(input);
    const Image filtered_remapped = guided_filter(remapped, guide, radius, eps);
    const Image filtered_input = guided_filter(input, guide, radius, eps);

    Image out(input.width(), input.height(), input.channels());
    auto r = filtered_remapped.samples();
    auto t = input.samples();
    auto tt = filtered_input.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const double v = static_cast<double>(r[i]) + t[i] - tt[i];
        dst[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return out;
}

Image substitute_background(const Image& img, const Image& matte, const Image& background) {
    if (matte.channels() != 1)
        throw std::invalid_argument("substitute_background: matte must be single-channel");
    if (matte.width() != img.width() || matte.height() != img.height() ||
        !img.same_shape(background))
        throw std::invalid_argument("substitute_background: dimensions differ");

    Image out(img.width(), img.height(), img.channels());
    auto m = matte.plane(0);
    for (int c = 0; c < img.channels(); ++c) {
        auto fg = img.plane(c);
        auto bg = background.plane(c);
        auto dst = out.plane(c);
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] = static_cast<float>(m[i] * fg[i] + (1.0 - m[i]) * bg[i]);
    }
    return out;
}

} // namespace stylize
