#pragma once

#include <vector>

#include "stylize/align.hpp"
#include "stylize/image.hpp"
#include "stylize/mrf.hpp"
#include "stylize/stack.hpp"

namespace stylize {

/// Per-pixel convex weights over the K exemplars, stored as K planes.
/// Rows sum to 1; in argmax mode at most 4 entries per pixel are nonzero
/// (the covering patches).
struct PixelWeights {
    int width = 0;
    int height = 0;
    int labels = 0;
    std::vector<float> weights; // labels planes of width*height

    float at(int k, int x, int y) const {
        return weights[(static_cast<std::size_t>(k) * height + y) * width + x];
    }
    float& at(int k, int x, int y) {
        return weights[(static_cast<std::size_t>(k) * height + y) * width + x];
    }
};

/// Rasterize per-patch labels into per-pixel weights. Every covering patch
/// contributes a separable tent (peak 1 at its center, 0 at +-patch/2) to
/// its label — or, in mmse mode, its belief row scaled by the tent — and
/// the per-pixel rows are renormalized. Pixels whose tent weights all
/// vanish (the topmost/leftmost image lines) take the nearest patch node.
PixelWeights pixel_weights(const LabelField& labels, const PatchGrid& grid,
                           int width, int height);

/// Weighted per-pixel combination of the K warped energy maps at `level`.
Image blend_energy(const std::vector<EnergyStack>& exemplar_energy,
                   const PixelWeights& w, int level);

/// Weighted per-pixel combination of the K warped residual planes.
Image blend_residual(const std::vector<Image>& exemplar_residuals,
                     const PixelWeights& w);

/// Band gain remap: L_R = L_T * min(sqrt(S_E / (S_T + eps)), gain_max).
Image remap_layer(const Image& input_layer, const Image& input_energy,
                  const Image& target_energy, double eps = 1e-4,
                  double gain_max = 10.0);

struct TransferParams {
    int stack_depth = 5;
    double eps_remap = 1e-4;
    double gain_max = 10.0;
};

/// Per-exemplar style data already registered to the input frame:
/// per-channel warped energy maps and warped residual planes.
struct PreparedExemplar {
    std::vector<EnergyStack> energy; // one per channel
    std::vector<Image> residual;     // one per channel
};

/// Decompose an exemplar in its own frame, then warp each energy map and
/// the residual into the input frame along `field`.
PreparedExemplar prepare_exemplar(const Image& exemplar,
                                  const CorrespondenceField& field, int depth);

/// Style data for an exemplar that is already aligned to the input frame.
PreparedExemplar prepare_aligned_exemplar(const Image& warped_exemplar, int depth);

/// Remap every band layer of the input toward the blended exemplar energy
/// and substitute the blended exemplar residual, per channel.
Image transfer(const Image& input, const std::vector<PreparedExemplar>& exemplars,
               const PixelWeights& w, const TransferParams& params = {});

/// Convenience route for pre-aligned exemplars: derives the pixel weights
/// from `labels` and decomposes the exemplars in the input frame.
Image transfer(const Image& input, const std::vector<Image>& warped_exemplars,
               const LabelField& labels, const PatchGrid& grid,
               const TransferParams& params = {});

} // namespace stylize
