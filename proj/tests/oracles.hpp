#pragma once

// Independent reference implementations used only by tests. These stay
// deliberately naive (direct loops, no integral images, no message passing)
// so they cannot share a failure mode with the library code they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "stylize/image.hpp"
#include "stylize/mrf.hpp"

namespace oracle {

using stylize::Image;

/// O(r^2)-per-pixel windowed mean with the same clipped-window convention.
inline Image naive_box_mean(const Image& img, int radius) {
    Image out(img.width(), img.height(), img.channels());
    for (int c = 0; c < img.channels(); ++c) {
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                double acc = 0.0;
                int count = 0;
                for (int dy = -radius; dy <= radius; ++dy) {
                    for (int dx = -radius; dx <= radius; ++dx) {
                        const int sx = x + dx, sy = y + dy;
                        if (sx < 0 || sy < 0 || sx >= img.width() || sy >= img.height())
                            continue;
                        acc += img.at(c, sx, sy);
                        ++count;
                    }
                }
                out.at(c, x, y) = static_cast<float>(acc / count);
            }
        }
    }
    return out;
}

/// Normalized truncated 1D Gaussian, radius ceil(3*sigma).
inline std::vector<double> gaussian_taps(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Direct 2D Gaussian-weighted sum with clamp-to-edge taps.
inline Image naive_gaussian_blur(const Image& img, double sigma) {
    if (sigma == 0.0) return img;
    const auto k = gaussian_taps(sigma);
    const int radius = static_cast<int>(k.size() / 2);
    Image out(img.width(), img.height(), img.channels());
    for (int c = 0; c < img.channels(); ++c) {
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                double acc = 0.0;
                for (int dy = -radius; dy <= radius; ++dy) {
                    const int sy = std::clamp(y + dy, 0, img.height() - 1);
                    for (int dx = -radius; dx <= radius; ++dx) {
                        const int sx = std::clamp(x + dx, 0, img.width() - 1);
                        acc += k[dy + radius] * k[dx + radius] * img.at(c, sx, sy);
                    }
                }
                out.at(c, x, y) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

/// Per-window linear regression guided filter, straight from the
/// definition: every window computes its own a,b; every pixel averages the
/// coefficients of the windows covering it.
inline Image naive_guided_filter(const Image& src, const Image& guide,
                                 int radius, double eps) {
    const int w = src.width(), h = src.height();
    Image out(w, h, src.channels());
    const auto g = guide.plane(0);

    auto window_stats = [&](int cx, int cy, auto&& fn) {
        const int x0 = std::max(0, cx - radius), x1 = std::min(w - 1, cx + radius);
        const int y0 = std::max(0, cy - radius), y1 = std::min(h - 1, cy + radius);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) fn(x, y);
    };

    for (int c = 0; c < src.channels(); ++c) {
        std::vector<double> a(static_cast<std::size_t>(w) * h);
        std::vector<double> b(static_cast<std::size_t>(w) * h);
        for (int cy = 0; cy < h; ++cy) {
            for (int cx = 0; cx < w; ++cx) {
                double sum_g = 0, sum_gg = 0, sum_p = 0, sum_gp = 0;
                int count = 0;
                window_stats(cx, cy, [&](int x, int y) {
                    const double gv = g[static_cast<std::size_t>(y) * w + x];
                    const double pv = src.at(c, x, y);
                    sum_g += gv;
                    sum_gg += gv * gv;
                    sum_p += pv;
                    sum_gp += gv * pv;
                    ++count;
                });
                const double mean_g = sum_g / count;
                const double mean_p = sum_p / count;
                const double var = sum_gg / count - mean_g * mean_g;
                const double cov = sum_gp / count - mean_g * mean_p;
                const double denom = var + eps;
                const std::size_t i = static_cast<std::size_t>(cy) * w + cx;
                if (denom < 1e-12) {
                    a[i] = 0.0;
                    b[i] = mean_p;
                } else {
                    a[i] = cov / denom;
                    b[i] = mean_p - a[i] * mean_g;
                }
            }
        }
        for (int cy = 0; cy < h; ++cy) {
            for (int cx = 0; cx < w; ++cx) {
                double sum_a = 0, sum_b = 0;
                int count = 0;
                window_stats(cx, cy, [&](int x, int y) {
                    sum_a += a[static_cast<std::size_t>(y) * w + x];
                    sum_b += b[static_cast<std::size_t>(y) * w + x];
                    ++count;
                });
                out.at(c, cx, cy) = static_cast<float>(
                    (sum_a / count) * g[static_cast<std::size_t>(cy) * w + cx] +
                    sum_b / count);
            }
        }
    }
    return out;
}

/// Convex hull vertex count (monotone chain), for the Euler triangle-count
/// identity. Collinear hull points are not counted as vertices.
inline int hull_vertex_count(std::vector<std::pair<double, double>> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const int n = static_cast<int>(pts.size());
    if (n < 3) return n;
    auto cross = [](auto& o, auto& a, auto& b) {
        return (a.first - o.first) * (b.second - o.second) -
               (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<double, double>> hull(2 * n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-12) --k;
        hull[k++] = pts[i];
    }
    for (int i = n - 2, t = k + 1; i >= 0; --i) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-12) --k;
        hull[k++] = pts[i];
    }
    return k - 1;
}

/// Exhaustive single-scale block matcher over gradient magnitudes; returns
/// the median x-displacement. The independent check for refine_dense.
inline double blockmatch_median_dx(const Image& moving, const Image& fixed,
                                   int block, int radius) {
    auto grad = [](const Image& img) {
        const Image luma = stylize::to_luma(img);
        Image out(img.width(), img.height(), 1);
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x) {
                const int xl = std::max(0, x - 1), xr = std::min(img.width() - 1, x + 1);
                const int yu = std::max(0, y - 1), yd = std::min(img.height() - 1, y + 1);
                const double gx = 0.5 * (luma.at(0, xr, y) - luma.at(0, xl, y));
                const double gy = 0.5 * (luma.at(0, x, yd) - luma.at(0, x, yu));
                out.at(0, x, y) = static_cast<float>(std::sqrt(gx * gx + gy * gy));
            }
        return out;
    };
    const Image gm = grad(moving);
    const Image gf = grad(fixed);
    std::vector<double> dxs;
    for (int by = 0; by + block <= gf.height(); by += block) {
        for (int bx = 0; bx + block <= gf.width(); bx += block) {
            double best = 1e300;
            int best_dx = 0, best_dy = 0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    double sad = 0.0;
                    for (int y = by; y < by + block; ++y)
                        for (int x = bx; x < bx + block; ++x) {
                            const int sx = std::clamp(x + dx, 0, gm.width() - 1);
                            const int sy = std::clamp(y + dy, 0, gm.height() - 1);
                            sad += std::abs(gm.at(0, sx, sy) - gf.at(0, x, y));
                        }
                    const int tie = dx * dx + dy * dy;
                    const int best_tie = best_dx * best_dx + best_dy * best_dy;
                    if (sad < best - 1e-12 || (sad < best + 1e-12 && tie < best_tie)) {
                        best = sad;
                        best_dx = dx;
                        best_dy = dy;
                    }
                }
            }
            dxs.push_back(best_dx);
        }
    }
    std::sort(dxs.begin(), dxs.end());
    return dxs[dxs.size() / 2];
}

/// Random tree/chain/grid MRF instances for the inference oracle tests.
struct RandomProblem {
    static stylize::MrfProblem chain(int n, int k, unsigned seed);
    static stylize::MrfProblem tree(int n, int k, unsigned seed);
    static stylize::MrfProblem grid3x3(int k, double psi_min, unsigned seed);
};

inline stylize::MrfProblem RandomProblem::chain(int n, int k, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    stylize::MrfProblem p;
    p.nodes = n;
    p.labels = k;
    p.unary.resize(static_cast<std::size_t>(n) * k);
    for (auto& v : p.unary) v = u(gen);
    for (int i = 0; i + 1 < n; ++i) {
        stylize::MrfProblem::Edge e;
        e.a = i;
        e.b = i + 1;
        e.psi.resize(static_cast<std::size_t>(k) * k);
        for (auto& v : e.psi) v = u(gen);
        p.edges.push_back(std::move(e));
    }
    return p;
}

inline stylize::MrfProblem RandomProblem::tree(int n, int k, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    stylize::MrfProblem p;
    p.nodes = n;
    p.labels = k;
    p.unary.resize(static_cast<std::size_t>(n) * k);
    for (auto& v : p.unary) v = u(gen);
    for (int i = 1; i < n; ++i) {
        std::uniform_int_distribution<int> parent(0, i - 1);
        stylize::MrfProblem::Edge e;
        e.a = parent(gen);
        e.b = i;
        e.psi.resize(static_cast<std::size_t>(k) * k);
        for (auto& v : e.psi) v = u(gen);
        p.edges.push_back(std::move(e));
    }
    return p;
}

inline stylize::MrfProblem RandomProblem::grid3x3(int k, double psi_min, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::uniform_real_distribution<double> psi(psi_min, 1.0);
    stylize::MrfProblem p;
    p.nodes = 9;
    p.labels = k;
    p.unary.resize(static_cast<std::size_t>(9) * k);
    for (auto& v : p.unary) v = u(gen);
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 3; ++x) {
            const int node = y * 3 + x;
            for (int d = 0; d < 2; ++d) {
                const int nb = d == 0 ? node + 1 : node + 3;
                if ((d == 0 && x == 2) || (d == 1 && y == 2)) continue;
                stylize::MrfProblem::Edge e;
                e.a = node;
                e.b = nb;
                e.psi.resize(static_cast<std::size_t>(k) * k);
                for (auto& v : e.psi) v = psi(gen);
                p.edges.push_back(std::move(e));
            }
        }
    }
    return p;
}

} // namespace oracle
