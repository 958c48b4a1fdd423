#pragma once

#include "stylize/image.hpp"

namespace stylize {

/// Edge-preserving smoothing of `src` steered by a single-channel guide:
/// per window, fit src ~ a*guide + b with ridge term eps, then average the
/// coefficients over all covering windows. Windows whose guide variance
/// vanishes fall back to a = 0, b = window mean. Applied per src channel.
Image guided_filter(const Image& src, const Image& guide, int radius, double eps);

/// Seam removal with detail restoration: filter both the remapped image and
/// the input against the input's luma, then return
/// clamp(filtered_remapped + input - filtered_input, 0, 1).
Image remove_artifacts(const Image& remapped, const Image& input,
                       int radius = 60, double eps = 0.02);

/// out = matte * img + (1 - matte) * background, per channel.
Image substitute_background(const Image& img, const Image& matte, const Image& background);

} // namespace stylize
