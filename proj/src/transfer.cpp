#include "stylize/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stylize {

PixelWeights pixel_weights(const LabelField& labels, const PatchGrid& grid,
                           int width, int height) {
    if (static_cast<int>(labels.label.size()) != grid.nodes())
        throw std::invalid_argument("pixel_weights: labels not defined on this grid");
    if (labels.mode == SelectionMode::mmse && labels.beliefs.empty())
        throw std::invalid_argument("pixel_weights: mmse mode needs belief rows");

    PixelWeights w;
    w.width = width;
    w.height = height;
    w.labels = labels.labels;
    w.weights.assign(static_cast<std::size_t>(labels.labels) * width * height, 0.0f);

    const double half = grid.patch_size() / 2.0;
    for (int node = 0; node < grid.nodes(); ++node) {
        const PatchRect r = grid.rect(node);
        const auto [cx, cy] = grid.center(node);
        for (int y = r.y; y < r.y + r.h; ++y) {
            const double ty = std::max(0.0, 1.0 - std::abs(y - cy) / half);
            if (ty == 0.0) continue;
            for (int x = r.x; x < r.x + r.w; ++x) {
                const double tx = std::max(0.0, 1.0 - std::abs(x - cx) / half);
                const double tent = tx * ty;
                if (tent == 0.0) continue;
                if (labels.mode == SelectionMode::argmax) {
                    w.at(labels.label[node], x, y) += static_cast<float>(tent);
                } else {
                    for (int k = 0; k < labels.labels; ++k)
                        w.at(k, x, y) += static_cast<float>(tent * labels.belief_at(node, k));
                }
            }
        }
    }

    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double total = 0.0;
            for (int k = 0; k < w.labels; ++k) total += w.at(k, x, y);
            if (total > 1e-12) {
                for (int k = 0; k < w.labels; ++k)
                    w.at(k, x, y) = static_cast<float>(w.at(k, x, y) / total);
                continue;
            }
            // Degenerate tents (image border lines): take the nearest node.
            const auto covering = grid.covering_nodes(x, y);
            if (covering.empty())
                throw std::invalid_argument("pixel_weights: pixel outside every patch");
            int nearest = covering.front();
            double best = std::numeric_limits<double>::infinity();
            for (int node : covering) {
                const auto [cx, cy] = grid.center(node);
                const double d = static_cast<double>(cx - x) * (cx - x) +
                                 static_cast<double>(cy - y) * (cy - y);
                if (d < best) {
                    best = d;
                    nearest = node;
                }
            }
            if (labels.mode == SelectionMode::argmax) {
                w.at(labels.label[nearest], x, y) = 1.0f;
            } else {
                for (int k = 0; k < w.labels; ++k)
                    w.at(k, x, y) = static_cast<float>(labels.belief_at(nearest, k));
            }
        }
    }
    return w;
}

namespace {

Image blend_planes(const std::vector<const Image*>& planes, const PixelWeights& w) {
    if (planes.empty())
        throw std::invalid_argument("blend: no exemplar planes");
    if (static_cast<int>(planes.size()) != w.labels)
        throw std::invalid_argument("blend: plane count does not match weight labels");
    for (const Image* p : planes)
        if (p->width() != w.width || p->height() != w.height || p->channels() != 1)
            throw std::invalid_argument("blend: plane dimensions mismatch");

    Image out(w.width, w.height, 1);
    auto dst = out.plane(0);
    for (int y = 0; y < w.height; ++y) {
        for (int x = 0; x < w.width; ++x) {
            double acc = 0.0;
            for (int k = 0; k < w.labels; ++k) {
                const float wk = w.at(k, x, y);
                if (wk != 0.0f) acc += static_cast<double>(wk) * planes[k]->at(0, x, y);
            }
            dst[static_cast<std::size_t>(y) * w.width + x] = static_cast<float>(acc);
        }
    }
    return out;
}

} // namespace

Image blend_energy(const std::vector<EnergyStack>& exemplar_energy,
                   const PixelWeights& w, int level) {
    std::vector<const Image*> planes;
    for (const auto& e : exemplar_energy) {
        if (level < 0 || level >= static_cast<int>(e.maps.size()))
            throw std::invalid_argument("blend_energy: level out of range");
        planes.push_back(&e.maps[level]);
    }
    return blend_planes(planes, w);
}

Image blend_residual(const std::vector<Image>& exemplar_residuals,
                     const PixelWeights& w) {
    std::vector<const Image*> planes;
    planes.reserve(exemplar_residuals.size());
    for (const auto& r : exemplar_residuals) planes.push_back(&r);
    return blend_planes(planes, w);
}

Image remap_layer(const Image& input_layer, const Image& input_energy,
                  const Image& target_energy, double eps, double gain_max) {
    if (!input_layer.same_shape(input_energy) || !input_layer.same_shape(target_energy))
        throw std::invalid_argument("remap_layer: plane dimensions mismatch");
    Image out(input_layer.width(), input_layer.height(), 1);
    auto l = input_layer.plane(0);
    auto st = input_energy.plane(0);
    auto se = target_energy.plane(0);
    auto dst = out.plane(0);
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const double gain =
            std::min(std::sqrt(se[i] / (static_cast<double>(st[i]) + eps)), gain_max);
        dst[i] = static_cast<float>(l[i] * gain);
    }
    return out;
}

PreparedExemplar prepare_exemplar(const Image& exemplar,
                                  const CorrespondenceField& field, int depth) {
    PreparedExemplar prepared;
    for (int c = 0; c < exemplar.channels(); ++c) {
        const LaplacianStack stack = build_stack(exemplar.extract_plane(c), depth);
        EnergyStack energy = build_energy(stack);
        EnergyStack warped_energy;
        for (const Image& map : energy.maps) warped_energy.maps.push_back(warp(map, field));
        prepared.energy.push_back(std::move(warped_energy));
        prepared.residual.push_back(warp(stack.residual, field));
    }
    return prepared;
}

PreparedExemplar prepare_aligned_exemplar(const Image& warped_exemplar, int depth) {
    PreparedExemplar prepared;
    for (int c = 0; c < warped_exemplar.channels(); ++c) {
        const LaplacianStack stack = build_stack(warped_exemplar.extract_plane(c), depth);
        prepared.energy.push_back(build_energy(stack));
        prepared.residual.push_back(stack.residual);
    }
    return prepared;
}

Image transfer(const Image& input, const std::vector<PreparedExemplar>& exemplars,
               const PixelWeights& w, const TransferParams& params) {
    if (exemplars.empty())
        throw std::invalid_argument("transfer: no exemplars");
    for (const auto& e : exemplars)
        if (static_cast<int>(e.energy.size()) != input.channels())
            throw std::invalid_argument("transfer: exemplar channel count mismatch");

    Image out(input.width(), input.height(), input.channels());
    for (int c = 0; c < input.channels(); ++c) {
        const LaplacianStack input_stack = build_stack(input.extract_plane(c), params.stack_depth);

        LaplacianStack remapped;
        remapped.sigmas = input_stack.sigmas;
        for (int l = 0; l < static_cast<int>(input_stack.layers.size()); ++l) {
            const Image s_t = energy_map(input_stack.layers[l], l);
            std::vector<const Image*> maps;
            for (const auto& e : exemplars) {
                if (l >= static_cast<int>(e.energy[c].maps.size()))
                    throw std::invalid_argument("transfer: exemplar stack depth mismatch");
                maps.push_back(&e.energy[c].maps[l]);
            }
            const Image s_e = blend_planes(maps, w);
            remapped.layers.push_back(
                remap_layer(input_stack.layers[l], s_t, s_e, params.eps_remap, params.gain_max));
        }

        std::vector<const Image*> residuals;
        for (const auto& e : exemplars) residuals.push_back(&e.residual[c]);
        remapped.residual = blend_planes(residuals, w);

        const Image channel = reconstruct(remapped);
        std::copy(channel.plane(0).begin(), channel.plane(0).end(), out.plane(c).begin());
    }
    return out;
}

Image transfer(const Image& input, const std::vector<Image>& warped_exemplars,
               const LabelField& labels, const PatchGrid& grid,
               const TransferParams& params) {
    std::vector<PreparedExemplar> prepared;
    prepared.reserve(warped_exemplars.size());
    for (const Image& e : warped_exemplars)
        prepared.push_back(prepare_aligned_exemplar(e, params.stack_depth));
    const PixelWeights w = pixel_weights(labels, grid, input.width(), input.height());
    return transfer(input, prepared, w, params);
}

} // namespace stylize
