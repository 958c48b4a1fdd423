#pragma once

#include <vector>

#include "stylize/image.hpp"

namespace stylize {

/// Full-resolution band decomposition: layers[l] are signed difference-of-
/// Gaussian planes, residual is the most blurred copy. All planes share the
/// source dimensions and sum back to the source (telescoping construction).
struct LaplacianStack {
    std::vector<Image> layers; // band layers L^0 .. L^{depth-2}, 1 channel each
    Image residual;
    std::vector<double> sigmas; // blur scales used: 2, 4, 8, ...

    int depth() const { return static_cast<int>(layers.size()) + 1; }
};

/// One non-negative local-energy plane per band layer (residual excluded).
struct EnergyStack {
    std::vector<Image> maps;
};

/// Octave blur schedule: sigma_l = 2^l for l = 1..depth-1.
/// L^0 = img - G_2(img); L^l = G_{2^l}(img) - G_{2^(l+1)}(img);
/// residual = G_{2^(depth-1)}(img). Requires a single-channel image, depth >= 2.
LaplacianStack build_stack(const Image& img, int depth);

/// Averaging scale for a band's energy map: the band's own blur sigma
/// (2 for the first band).
double energy_sigma(int level);

/// Local energy of a band layer: Gaussian-weighted mean of squared values,
/// window tied to the band scale. Output is non-negative.
Image energy_map(const Image& layer, int level);

/// Energy maps for every band layer of a stack.
EnergyStack build_energy(const LaplacianStack& stack);

/// Pixel-wise sum of all band layers and the residual. No range clamp.
Image reconstruct(const LaplacianStack& stack);

} // namespace stylize
