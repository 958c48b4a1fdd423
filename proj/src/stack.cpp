#include "stylize/stack.hpp"

#include <cmath>
#include <stdexcept>

namespace stylize {

LaplacianStack build_stack(const Image& img, int depth) {
    if (depth < 2)
        throw std::invalid_argument("build_stack: depth must be >= 2");
    if (img.channels() != 1)
        throw std::invalid_argument("build_stack: expected a single-channel image");

    LaplacianStack stack;
    for (int l = 1; l <= depth - 1; ++l)
        stack.sigmas.push_back(std::pow(2.0, l));

    // Each blur is computed once and shared by the two layers that reference
    // it, which keeps the telescoping identity exact to rounding.
    Image prev = img;
    for (int l = 0; l <= depth - 2; ++l) {
        Image blurred = gaussian_blur(img, stack.sigmas[l]);
        Image band(img.width(), img.height(), 1);
        auto a = prev.plane(0);
        auto b = blurred.plane(0);
        auto out = band.plane(0);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
        stack.layers.push_back(std::move(band));
        prev = std::move(blurred);
    }
    stack.residual = std::move(prev);
    return stack;
}

double energy_sigma(int level) {
    if (level < 0)
        throw std::invalid_argument("energy_sigma: level must be >= 0");
    return level == 0 ? 2.0 : std::pow(2.0, level);
}

Image energy_map(const Image& layer, int level) {
    if (layer.channels() != 1)
        throw std::invalid_argument("energy_map: expected a single-channel layer");
    Image squared(layer.width(), layer.height(), 1);
    auto src = layer.plane(0);
    auto dst = squared.plane(0);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] * src[i];
    return gaussian_blur(squared, energy_sigma(level));
}

EnergyStack build_energy(const LaplacianStack& stack) {
    EnergyStack energy;
    for (int l = 0; l < static_cast<int>(stack.layers.size()); ++l)
        energy.maps.push_back(energy_map(stack.layers[l], l));
    return energy;
}

Image reconstruct(const LaplacianStack& stack) {
    if (stack.residual.empty())
        throw std::invalid_argument("reconstruct: stack has no residual");
    Image out(stack.residual.width(), stack.residual.height(), 1);
    for (const Image& layer : stack.layers)
        if (!layer.same_shape(stack.residual))
            throw std::invalid_argument("reconstruct: mismatched plane dimensions");

    std::vector<std::span<const float>> planes;
    for (const Image& layer : stack.layers) planes.push_back(layer.plane(0));
    planes.push_back(stack.residual.plane(0));

    auto dst = out.plane(0);
    for (std::size_t i = 0; i < dst.size(); ++i) {
        double acc = 0.0;
        for (const auto& p : planes) acc += p[i];
        dst[i] = static_cast<float>(acc);
    }
    return out;
}

} // namespace stylize
