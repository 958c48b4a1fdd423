#pragma once

#include <array>
#include <vector>

#include "stylize/image.hpp"
#include "stylize/landmarks.hpp"

namespace stylize {

/// Per-pixel displacement: input pixel (x,y) samples source location
/// (x + dx, y + dy). Dimensions always match the input photo.
struct CorrespondenceField {
    int width = 0;
    int height = 0;
    std::vector<float> dx;
    std::vector<float> dy;

    static CorrespondenceField zero(int w, int h) {
        CorrespondenceField f;
        f.width = w;
        f.height = h;
        f.dx.assign(static_cast<std::size_t>(w) * h, 0.0f);
        f.dy.assign(static_cast<std::size_t>(w) * h, 0.0f);
        return f;
    }
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * width + x;
    }
};

/// Delaunay triangulation of a landmark set plus a pixel->triangle locator
/// for a fixed raster size. Border landmarks guarantee the triangles cover
/// the whole frame; ties on co-circular configurations are resolved by
/// insertion order (ascending vertex index), so results are deterministic.
class TriangleMesh {
public:
    struct Triangle {
        std::array<int, 3> v;
    };

    const std::vector<Triangle>& triangles() const { return tris_; }
    int raster_width() const { return width_; }
    int raster_height() const { return height_; }

    /// Triangle index owning the pixel. Every pixel is assigned to exactly
    /// one triangle (first containing triangle in list order; leftover
    /// numeric slivers go to the nearest triangle).
    int locate(int x, int y) const { return tri_map_[static_cast<std::size_t>(y) * width_ + x]; }

    friend TriangleMesh triangulate(const LandmarkSet& landmarks, int width, int height);

private:
    std::vector<Triangle> tris_;
    std::vector<int> tri_map_;
    int width_ = 0;
    int height_ = 0;
};

/// Delaunay triangulation over the landmark points for a width x height
/// raster. Throws if the points are all collinear.
TriangleMesh triangulate(const LandmarkSet& landmarks, int width, int height);

/// Piecewise affine correspondence: for each pixel, the affine map of its
/// containing triangle (input vertices -> exemplar vertices) minus identity.
/// Near-degenerate triangles (area < 1e-6 px^2) fall back to the nearest
/// landmark's translation.
CorrespondenceField local_affine_field(const LandmarkSet& input_lm,
                                       const LandmarkSet& exemplar_lm,
                                       const TriangleMesh& mesh);

/// Inverse warp with bilinear sampling; source coordinates are clamped to
/// the exemplar bounds. A zero field reproduces the exemplar bit for bit.
Image warp(const Image& exemplar, const CorrespondenceField& field);

enum class RefineMode { off, blockmatch };

struct RefineParams {
    RefineMode mode = RefineMode::off;
    int levels = 3;        // pyramid levels
    int search_radius = 4; // +-px integer search per level
    int block = 8;         // matching block edge
    double smooth_sigma = 2.0;
};

/// Residual alignment of `warped` toward `target` (both already in the input
/// frame). Default mode is off and returns the zero field; blockmatch runs a
/// coarse-to-fine integer search over gradient-magnitude descriptors.
CorrespondenceField refine_dense(const Image& warped, const Image& target,
                                 const RefineParams& params);

/// result(x) = a(x + b(x)) + b(x), with bilinear sampling of a.
CorrespondenceField compose(const CorrespondenceField& a,
                            const CorrespondenceField& b);

} // namespace stylize
