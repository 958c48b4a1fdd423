#include "stylize/align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stylize {

namespace {

struct Vec2 {
    double x, y;
};

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * std::abs(cross(a, b, c));
}

// Positive when p is strictly inside the circumcircle of (a,b,c) given in
// counter-clockwise order. Values within eps of zero (co-circular) count as
// outside, so the triangulation already present wins the tie.
bool in_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
    const double ax = a.x - p.x, ay = a.y - p.y;
    const double bx = b.x - p.x, by = b.y - p.y;
    const double cx = c.x - p.x, cy = c.y - p.y;
    const double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                       (bx * bx + by * by) * (ax * cy - cx * ay) +
                       (cx * cx + cy * cy) * (ax * by - bx * ay);
    return det > 1e-9;
}

struct WorkTriangle {
    std::array<int, 3> v;
    bool alive = true;
};

} // namespace

TriangleMesh triangulate(const LandmarkSet& landmarks, int width, int height) {
    const int n = landmarks.size();
    if (n < 3)
        throw std::invalid_argument("triangulate: need at least 3 points");
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("triangulate: raster size must be positive");

    std::vector<Vec2> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = {landmarks[i].x, landmarks[i].y};

    bool collinear = true;
    for (int i = 2; i < n && collinear; ++i)
        if (std::abs(cross(pts[0], pts[1], pts[i])) > 1e-9) collinear = false;
    if (collinear)
        throw std::invalid_argument("triangulate: all points are collinear");

    // Bowyer-Watson with a super-triangle well outside the raster.
    double minx = pts[0].x, maxx = pts[0].x, miny = pts[0].y, maxy = pts[0].y;
    for (const auto& p : pts) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const double span = std::max({maxx - minx, maxy - miny, 1.0});
    const double cx = (minx + maxx) / 2.0, cy = (miny + maxy) / 2.0;
    pts.push_back({cx - 20.0 * span, cy - 10.0 * span});
    pts.push_back({cx + 20.0 * span, cy - 10.0 * span});
    pts.push_back({cx, cy + 20.0 * span});
    const int s0 = n, s1 = n + 1, s2 = n + 2;

    auto ccw = [&](std::array<int, 3> t) {
        if (cross(pts[t[0]], pts[t[1]], pts[t[2]]) < 0.0) std::swap(t[1], t[2]);
        return t;
    };

    std::vector<WorkTriangle> tris;
    tris.push_back({ccw({s0, s1, s2}), true});

    for (int i = 0; i < n; ++i) {
        // Cavity: triangles whose circumcircle contains the new point.
        std::vector<std::array<int, 2>> boundary;
        std::vector<int> bad;
        for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
            if (!tris[t].alive) continue;
            const auto& v = tris[t].v;
            if (in_circumcircle(pts[v[0]], pts[v[1]], pts[v[2]], pts[i]))
                bad.push_back(t);
        }
        // Boundary edges appear in exactly one cavity triangle.
        auto edge_in_bad = [&](int a, int b) {
            for (int t : bad) {
                const auto& v = tris[t].v;
                for (int e = 0; e < 3; ++e) {
                    int ea = v[e], eb = v[(e + 1) % 3];
                    if (ea == b && eb == a) return true;
                }
            }
            return false;
        };
        for (int t : bad) {
            const auto& v = tris[t].v;
            for (int e = 0; e < 3; ++e) {
                int a = v[e], b = v[(e + 1) % 3];
                if (!edge_in_bad(a, b)) boundary.push_back({a, b});
            }
            tris[t].alive = false;
        }
        for (const auto& e : boundary)
            tris.push_back({ccw({e[0], e[1], i}), true});
    }

    TriangleMesh mesh;
    mesh.width_ = width;
    mesh.height_ = height;
    for (const auto& t : tris) {
        if (!t.alive) continue;
        if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
        if (triangle_area(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]]) < 1e-12) continue;
        mesh.tris_.push_back({t.v});
    }
    if (mesh.tris_.empty())
        throw std::invalid_argument("triangulate: degenerate configuration");

    // Pixel locator: first containing triangle in list order wins; pixels in
    // numeric slivers between triangles go to the least-violating triangle.
    mesh.tri_map_.assign(static_cast<std::size_t>(width) * height, -1);
    auto& tri_map = mesh.tri_map_;
    for (int t = 0; t < static_cast<int>(mesh.tris_.size()); ++t) {
        const auto& v = mesh.tris_[t].v;
        const Vec2 a = pts[v[0]], b = pts[v[1]], c = pts[v[2]];
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}))));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}))));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}))));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}))));
        const double denom = cross(a, b, c);
        if (std::abs(denom) < 1e-12) continue;
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                auto& slot = tri_map[static_cast<std::size_t>(y) * width + x];
                if (slot >= 0) continue;
                const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
                const double w0 = cross(b, c, p) / denom;
                const double w1 = cross(c, a, p) / denom;
                const double w2 = cross(a, b, p) / denom;
                if (w0 >= -1e-9 && w1 >= -1e-9 && w2 >= -1e-9) slot = t;
            }
        }
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            auto& slot = tri_map[static_cast<std::size_t>(y) * width + x];
            if (slot >= 0) continue;
            const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
            double best = -std::numeric_limits<double>::infinity();
            int best_t = 0;
            for (int t = 0; t < static_cast<int>(mesh.tris_.size()); ++t) {
                const auto& v = mesh.tris_[t].v;
                const Vec2 a = pts[v[0]], b = pts[v[1]], c = pts[v[2]];
                const double denom = cross(a, b, c);
                if (std::abs(denom) < 1e-12) continue;
                const double w = std::min({cross(b, c, p), cross(c, a, p),
                                           cross(a, b, p)}) /
                                 std::abs(denom);
                if (w > best) {
                    best = w;
                    best_t = t;
                }
            }
            slot = best_t;
        }
    }
    return mesh;
}

CorrespondenceField local_affine_field(const LandmarkSet& input_lm,
                                       const LandmarkSet& exemplar_lm,
                                       const TriangleMesh& mesh) {
    if (input_lm.size() != exemplar_lm.size())
        throw std::invalid_argument("local_affine_field: landmark counts differ");

    const int w = mesh.raster_width();
    const int h = mesh.raster_height();
    const auto& tris = mesh.triangles();

    // Per-triangle affine maps (input -> exemplar), solved in double.
    struct Affine {
        double a, b, tx, c, d, ty;
        bool degenerate;
        int fallback_vertex;
    };
    std::vector<Affine> maps(tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const auto& v = tris[t].v;
        const Point2 p0 = input_lm[v[0]], p1 = input_lm[v[1]], p2 = input_lm[v[2]];
        const Point2 q0 = exemplar_lm[v[0]], q1 = exemplar_lm[v[1]], q2 = exemplar_lm[v[2]];
        const double ux1 = p1.x - p0.x, uy1 = p1.y - p0.y;
        const double ux2 = p2.x - p0.x, uy2 = p2.y - p0.y;
        const double det = ux1 * uy2 - ux2 * uy1;
        Affine m{};
        if (std::abs(det) * 0.5 < 1e-6) {
            m.degenerate = true;
            m.fallback_vertex = std::min({v[0], v[1], v[2]});
        } else {
            const double vx1 = q1.x - q0.x, vy1 = q1.y - q0.y;
            const double vx2 = q2.x - q0.x, vy2 = q2.y - q0.y;
            m.a = (vx1 * uy2 - vx2 * uy1) / det;
            m.b = (vx2 * ux1 - vx1 * ux2) / det;
            m.c = (vy1 * uy2 - vy2 * uy1) / det;
            m.d = (vy2 * ux1 - vy1 * ux2) / det;
            m.tx = q0.x - m.a * p0.x - m.b * p0.y;
            m.ty = q0.y - m.c * p0.x - m.d * p0.y;
            m.degenerate = false;
        }
        maps[t] = m;
    }

    auto nearest_landmark = [&](double x, double y) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < input_lm.size(); ++i) {
            const double dx = input_lm[i].x - x, dy = input_lm[i].y - y;
            const double d = dx * dx + dy * dy;
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    };

    CorrespondenceField f = CorrespondenceField::zero(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto& m = maps[mesh.locate(x, y)];
            const std::size_t i = f.index(x, y);
            if (m.degenerate) {
                const int j = nearest_landmark(x, y);
                f.dx[i] = static_cast<float>(exemplar_lm[j].x - input_lm[j].x);
                f.dy[i] = static_cast<float>(exemplar_lm[j].y - input_lm[j].y);
            } else {
                const double u = m.a * x + m.b * y + m.tx;
                const double v = m.c * x + m.d * y + m.ty;
                f.dx[i] = static_cast<float>(u - x);
                f.dy[i] = static_cast<float>(v - y);
            }
        }
    }
    return f;
}

namespace {

float bilinear(std::span<const float> plane, int w, int h, double sx, double sy) {
    sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
    sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
    const int x0 = std::min(static_cast<int>(sx), w - 1);
    const int y0 = std::min(static_cast<int>(sy), h - 1);
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = sx - x0;
    const double fy = sy - y0;
    const double v00 = plane[static_cast<std::size_t>(y0) * w + x0];
    const double v10 = plane[static_cast<std::size_t>(y0) * w + x1];
    const double v01 = plane[static_cast<std::size_t>(y1) * w + x0];
    const double v11 = plane[static_cast<std::size_t>(y1) * w + x1];
    return static_cast<float>((1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) +
                              fy * ((1.0 - fx) * v01 + fx * v11));
}

} // namespace

Image warp(const Image& exemplar, const CorrespondenceField& field) {
    Image out(field.width, field.height, exemplar.channels());
    for (int c = 0; c < exemplar.channels(); ++c) {
        auto src = exemplar.plane(c);
        auto dst = out.plane(c);
        for (int y = 0; y < field.height; ++y) {
            for (int x = 0; x < field.width; ++x) {
                const std::size_t i = field.index(x, y);
                dst[i] = bilinear(src, exemplar.width(), exemplar.height(),
                                  x + static_cast<double>(field.dx[i]),
                                  y + static_cast<double>(field.dy[i]));
            }
        }
    }
    return out;
}

namespace {

// Gradient-magnitude descriptor (central differences, replicated borders).
Image gradient_magnitude(const Image& img) {
    const Image luma = to_luma(img);
    const int w = luma.width(), h = luma.height();
    Image out(w, h, 1);
    auto src = luma.plane(0);
    auto dst = out.plane(0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int xl = std::max(0, x - 1), xr = std::min(w - 1, x + 1);
            const int yu = std::max(0, y - 1), yd = std::min(h - 1, y + 1);
            const double gx = 0.5 * (src[static_cast<std::size_t>(y) * w + xr] -
                                     src[static_cast<std::size_t>(y) * w + xl]);
            const double gy = 0.5 * (src[static_cast<std::size_t>(yd) * w + x] -
                                     src[static_cast<std::size_t>(yu) * w + x]);
            dst[static_cast<std::size_t>(y) * w + x] =
                static_cast<float>(std::sqrt(gx * gx + gy * gy));
        }
    }
    return out;
}

double block_sad(const Image& a, const Image& b, int bx, int by, int block,
                 int dx, int dy) {
    const int w = a.width(), h = a.height();
    auto pa = a.plane(0);
    auto pb = b.plane(0);
    double sad = 0.0;
    for (int y = by; y < by + block; ++y) {
        for (int x = bx; x < bx + block; ++x) {
            const int sx = std::clamp(x + dx, 0, w - 1);
            const int sy = std::clamp(y + dy, 0, h - 1);
            sad += std::abs(pa[static_cast<std::size_t>(sy) * w + sx] -
                            pb[static_cast<std::size_t>(y) * w + x]);
        }
    }
    return sad;
}

} // namespace

CorrespondenceField refine_dense(const Image& warped, const Image& target,
                                 const RefineParams& params) {
    if (warped.width() != target.width() || warped.height() != target.height())
        throw std::invalid_argument("refine_dense: image dimensions differ");
    if (params.mode == RefineMode::off)
        return CorrespondenceField::zero(target.width(), target.height());

    // Pyramids of gradient-magnitude descriptors, coarse last.
    std::vector<Image> pyr_w{gradient_magnitude(warped)};
    std::vector<Image> pyr_t{gradient_magnitude(target)};
    for (int l = 1; l < params.levels; ++l) {
        const Image& prev = pyr_w.back();
        const int nw = std::max(1, (prev.width() + 1) / 2);
        const int nh = std::max(1, (prev.height() + 1) / 2);
        if (nw < params.block || nh < params.block) break;
        pyr_w.push_back(resize_image(pyr_w.back(), nw, nh));
        pyr_t.push_back(resize_image(pyr_t.back(), nw, nh));
    }

    CorrespondenceField field; // field at the previous (coarser) level
    for (int l = static_cast<int>(pyr_w.size()) - 1; l >= 0; --l) {
        const Image& wl = pyr_w[l];
        const Image& tl = pyr_t[l];
        const int w = wl.width(), h = tl.height();
        const int block = params.block;

        // Block nodes on a stride = block grid, last row/column clamped in.
        std::vector<int> bxs, bys;
        for (int x = 0; x + block <= w; x += block) bxs.push_back(x);
        if (bxs.empty() || bxs.back() + block < w) bxs.push_back(std::max(0, w - block));
        for (int y = 0; y + block <= h; y += block) bys.push_back(y);
        if (bys.empty() || bys.back() + block < h) bys.push_back(std::max(0, h - block));

        const int nx = static_cast<int>(bxs.size());
        const int ny = static_cast<int>(bys.size());
        std::vector<float> node_dx(static_cast<std::size_t>(nx) * ny);
        std::vector<float> node_dy(static_cast<std::size_t>(nx) * ny);

        for (int byi = 0; byi < ny; ++byi) {
            for (int bxi = 0; bxi < nx; ++bxi) {
                const int bx = bxs[bxi], by = bys[byi];
                int init_dx = 0, init_dy = 0;
                if (field.width > 0) {
                    const double cx = (bx + block / 2.0) / 2.0;
                    const double cy = (by + block / 2.0) / 2.0;
                    init_dx = static_cast<int>(std::lround(
                        2.0 * bilinear(field.dx, field.width, field.height, cx, cy)));
                    init_dy = static_cast<int>(std::lround(
                        2.0 * bilinear(field.dy, field.width, field.height, cx, cy)));
                }
                double best = std::numeric_limits<double>::infinity();
                int best_dx = init_dx, best_dy = init_dy;
                for (int dy = -params.search_radius; dy <= params.search_radius; ++dy) {
                    for (int dx = -params.search_radius; dx <= params.search_radius; ++dx) {
                        const int cand_dx = init_dx + dx, cand_dy = init_dy + dy;
                        const double sad = block_sad(wl, tl, bx, by, block, cand_dx, cand_dy);
                        const double tie = cand_dx * cand_dx + cand_dy * cand_dy;
                        const double best_tie = best_dx * best_dx + best_dy * best_dy;
                        if (sad < best - 1e-12 ||
                            (sad < best + 1e-12 && tie < best_tie)) {
                            best = sad;
                            best_dx = cand_dx;
                            best_dy = cand_dy;
                        }
                    }
                }
                node_dx[static_cast<std::size_t>(byi) * nx + bxi] = static_cast<float>(best_dx);
                node_dy[static_cast<std::size_t>(byi) * nx + bxi] = static_cast<float>(best_dy);
            }
        }

        // Dense field for this level: bilinear between block centers.
        CorrespondenceField dense = CorrespondenceField::zero(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                // Node-grid coordinates of this pixel.
                auto grid_pos = [&](const std::vector<int>& bs, int p) {
                    const double c0 = bs.front() + block / 2.0;
                    const double c1 = bs.back() + block / 2.0;
                    if (bs.size() == 1 || c1 <= c0) return 0.0;
                    const double t = (p - c0) / (c1 - c0) * (bs.size() - 1);
                    return std::clamp(t, 0.0, static_cast<double>(bs.size() - 1));
                };
                const double gx = grid_pos(bxs, x);
                const double gy = grid_pos(bys, y);
                dense.dx[dense.index(x, y)] = bilinear(node_dx, nx, ny, gx, gy);
                dense.dy[dense.index(x, y)] = bilinear(node_dy, nx, ny, gx, gy);
            }
        }
        field = std::move(dense);
    }

    // Smooth the recovered field.
    if (params.smooth_sigma > 0.0) {
        Image dxi(field.width, field.height, 1), dyi(field.width, field.height, 1);
        std::copy(field.dx.begin(), field.dx.end(), dxi.plane(0).begin());
        std::copy(field.dy.begin(), field.dy.end(), dyi.plane(0).begin());
        dxi = gaussian_blur(dxi, params.smooth_sigma);
        dyi = gaussian_blur(dyi, params.smooth_sigma);
        std::copy(dxi.plane(0).begin(), dxi.plane(0).end(), field.dx.begin());
        std::copy(dyi.plane(0).begin(), dyi.plane(0).end(), field.dy.begin());
    }
    return field;
}

CorrespondenceField compose(const CorrespondenceField& a,
                            const CorrespondenceField& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("compose: field dimensions differ");
    CorrespondenceField out = CorrespondenceField::zero(a.width, a.height);
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            const std::size_t i = out.index(x, y);
            const double bx = b.dx[i], by = b.dy[i];
            const double ax = bilinear(a.dx, a.width, a.height, x + bx, y + by);
            const double ay = bilinear(a.dy, a.width, a.height, x + bx, y + by);
            out.dx[i] = static_cast<float>(ax + bx);
            out.dy[i] = static_cast<float>(ay + by);
        }
    }
    return out;
}

} // namespace stylize
