#include "stylize/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace stylize {

Image::Image(int width, int height, int channels, float fill) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("image dimensions must be positive");
    if (channels != 1 && channels != 3)
        throw std::invalid_argument("image must have 1 or 3 channels");
    width_ = width;
    height_ = height;
    channels_ = channels;
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image Image::extract_plane(int c) const {
    Image out(width_, height_, 1);
    auto src = plane(c);
    std::copy(src.begin(), src.end(), out.plane(0).begin());
    return out;
}

Image load_image(const std::string& path) {
    cv::Mat raw = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (raw.empty())
        throw std::runtime_error("cannot read image file: " + path);
    if (raw.cols <= 0 || raw.rows <= 0)
        throw std::runtime_error("zero-dimension image: " + path);

    double max_value;
    switch (raw.depth()) {
        case CV_8U: max_value = 255.0; break;
        case CV_16U: max_value = 65535.0; break;
        default:
            throw std::runtime_error("unsupported sample depth in " + path);
    }

    const int src_channels = raw.channels();
    if (src_channels != 1 && src_channels != 3 && src_channels != 4)
        throw std::runtime_error("unsupported channel count in " + path);
    const int out_channels = src_channels == 1 ? 1 : 3;

    Image img(raw.cols, raw.rows, out_channels);
    const double scale = 1.0 / max_value;
    // OpenCV stores interleaved BGR(A); planes are kept in RGB order.
    for (int y = 0; y < raw.rows; ++y) {
        for (int x = 0; x < raw.cols; ++x) {
            double px[4] = {0, 0, 0, 0};
            if (raw.depth() == CV_8U) {
                const std::uint8_t* p = raw.ptr<std::uint8_t>(y) + x * src_channels;
                for (int c = 0; c < src_channels; ++c) px[c] = p[c];
            } else {
                const std::uint16_t* p = raw.ptr<std::uint16_t>(y) + x * src_channels;
                for (int c = 0; c < src_channels; ++c) px[c] = p[c];
            }
            if (out_channels == 1) {
                img.at(0, x, y) = static_cast<float>(px[0] * scale);
            } else {
                img.at(0, x, y) = static_cast<float>(px[2] * scale);
                img.at(1, x, y) = static_cast<float>(px[1] * scale);
                img.at(2, x, y) = static_cast<float>(px[0] * scale);
            }
        }
    }
    return img;
}

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    std::string tail = s.substr(s.size() - suffix.size());
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return tail == suffix;
}

} // namespace

void save_image(const Image& img, const std::string& path, int bits) {
    if (img.empty())
        throw std::invalid_argument("cannot save empty image");
    if (bits != 8 && bits != 16)
        throw std::invalid_argument("bit depth must be 8 or 16");
    if (bits == 16 && (has_suffix(path, ".jpg") || has_suffix(path, ".jpeg")))
        bits = 8;

    const double max_value = bits == 8 ? 255.0 : 65535.0;
    const int cv_type = bits == 8 ? CV_MAKETYPE(CV_8U, img.channels())
                                  : CV_MAKETYPE(CV_16U, img.channels());
    cv::Mat out(img.height(), img.width(), cv_type);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            auto quantize = [&](float v) {
                double q = std::lround(std::clamp(v, 0.0f, 1.0f) * max_value);
                return q;
            };
            if (img.channels() == 1) {
                if (bits == 8)
                    out.at<std::uint8_t>(y, x) =
                        static_cast<std::uint8_t>(quantize(img.at(0, x, y)));
                else
                    out.at<std::uint16_t>(y, x) =
                        static_cast<std::uint16_t>(quantize(img.at(0, x, y)));
            } else {
                double b = quantize(img.at(2, x, y));
                double g = quantize(img.at(1, x, y));
                double r = quantize(img.at(0, x, y));
                if (bits == 8)
                    out.at<cv::Vec3b>(y, x) = cv::Vec3b(
                        static_cast<std::uint8_t>(b), static_cast<std::uint8_t>(g),
                        static_cast<std::uint8_t>(r));
                else
                    out.at<cv::Vec3w>(y, x) = cv::Vec3w(
                        static_cast<std::uint16_t>(b), static_cast<std::uint16_t>(g),
                        static_cast<std::uint16_t>(r));
            }
        }
    }
    if (!cv::imwrite(path, out))
        throw std::runtime_error("cannot write image file: " + path);
}

Image to_luma(const Image& img) {
    if (img.channels() == 1) return img;
    Image out(img.width(), img.height(), 1);
    auto r = img.plane(0);
    auto g = img.plane(1);
    auto b = img.plane(2);
    auto y = out.plane(0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        double v = 0.2126 * r[i] + 0.7152 * g[i] + 0.0722 * b[i];
        y[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return out;
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double w = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k[i + radius] = w;
        sum += w;
    }
    for (double& w : k) w /= sum;
    return k;
}

void blur_pass_rows(const float* src, float* dst, int w, int h,
                    const std::vector<double>& k) {
    const int radius = static_cast<int>(k.size() / 2);
    for (int y = 0; y < h; ++y) {
        const float* row = src + static_cast<std::size_t>(y) * w;
        float* out = dst + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int xi = std::clamp(x + i, 0, w - 1);
                acc += k[i + radius] * row[xi];
            }
            out[x] = static_cast<float>(acc);
        }
    }
}

void blur_pass_cols(const float* src, float* dst, int w, int h,
                    const std::vector<double>& k) {
    const int radius = static_cast<int>(k.size() / 2);
    for (int y = 0; y < h; ++y) {
        float* out = dst + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int yi = std::clamp(y + i, 0, h - 1);
                acc += k[i + radius] * src[static_cast<std::size_t>(yi) * w + x];
            }
            out[x] = static_cast<float>(acc);
        }
    }
}

} // namespace

Image gaussian_blur(const Image& img, double sigma) {
    if (sigma < 0.0)
        throw std::invalid_argument("gaussian_blur: sigma must be >= 0");
    if (sigma == 0.0 || img.empty()) return img;

    const auto k = gaussian_kernel(sigma);
    Image out(img.width(), img.height(), img.channels());
    std::vector<float> tmp(static_cast<std::size_t>(img.width()) * img.height());
    for (int c = 0; c < img.channels(); ++c) {
        blur_pass_rows(img.plane(c).data(), tmp.data(), img.width(), img.height(), k);
        blur_pass_cols(tmp.data(), out.plane(c).data(), img.width(), img.height(), k);
    }
    return out;
}

namespace detail {

// Summed-area table over one plane; sums are exact enough in double for the
// 1e-6 contract against the brute-force window mean.
void box_mean_plane(const float* src, float* dst, int w, int h, int radius) {
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
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - radius);
        const int y1 = std::min(h - 1, y + radius);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - radius);
            const int x1 = std::min(w - 1, x + radius);
            double sum = S(x1 + 1, y1 + 1) - S(x0, y1 + 1) - S(x1 + 1, y0) + S(x0, y0);
            int count = (x1 - x0 + 1) * (y1 - y0 + 1);
            dst[static_cast<std::size_t>(y) * w + x] = static_cast<float>(sum / count);
        }
    }
}

} // namespace detail

Image box_mean(const Image& img, int radius) {
    if (radius < 0)
        throw std::invalid_argument("box_mean: radius must be >= 0");
    if (radius == 0 || img.empty()) return img;
    Image out(img.width(), img.height(), img.channels());
    for (int c = 0; c < img.channels(); ++c)
        detail::box_mean_plane(img.plane(c).data(), out.plane(c).data(),
                               img.width(), img.height(), radius);
    return out;
}

namespace {

// Separable area resampling: each destination cell averages the source
// interval it covers, with fractional end weights.
void resample_axis(const float* src, float* dst, int n_src, int n_dst,
                   int stride_src, int stride_dst, int lines, int line_stride_src,
                   int line_stride_dst) {
    const double scale = static_cast<double>(n_src) / n_dst;
    for (int line = 0; line < lines; ++line) {
        const float* s = src + static_cast<std::size_t>(line) * line_stride_src;
        float* d = dst + static_cast<std::size_t>(line) * line_stride_dst;
        for (int i = 0; i < n_dst; ++i) {
            if (scale >= 1.0) {
                const double a = i * scale;
                const double b = (i + 1) * scale;
                double acc = 0.0;
                int j0 = static_cast<int>(std::floor(a));
                int j1 = std::min(n_src - 1, static_cast<int>(std::ceil(b)) - 1);
                for (int j = j0; j <= j1; ++j) {
                    double lo = std::max(a, static_cast<double>(j));
                    double hi = std::min(b, static_cast<double>(j + 1));
                    if (hi > lo) acc += (hi - lo) * s[j * stride_src];
                }
                d[i * stride_dst] = static_cast<float>(acc / (b - a));
            } else {
                // Magnification: bilinear between source sample centers.
                double pos = (i + 0.5) * scale - 0.5;
                pos = std::clamp(pos, 0.0, static_cast<double>(n_src - 1));
                int j0 = std::min(static_cast<int>(pos), n_src - 1);
                int j1 = std::min(j0 + 1, n_src - 1);
                double f = pos - j0;
                d[i * stride_dst] = static_cast<float>(
                    (1.0 - f) * s[j0 * stride_src] + f * s[j1 * stride_src]);
            }
        }
    }
}

} // namespace

Image resize_image(const Image& img, int new_width, int new_height) {
    if (new_width <= 0 || new_height <= 0)
        throw std::invalid_argument("resize_image: target size must be positive");
    if (new_width == img.width() && new_height == img.height()) return img;

    Image out(new_width, new_height, img.channels());
    std::vector<float> tmp(static_cast<std::size_t>(new_width) * img.height());
    for (int c = 0; c < img.channels(); ++c) {
        // Horizontal pass, then vertical.
        resample_axis(img.plane(c).data(), tmp.data(), img.width(), new_width,
                      1, 1, img.height(), img.width(), new_width);
        resample_axis(tmp.data(), out.plane(c).data(), img.height(), new_height,
                      new_width, new_width, new_width, 1, 1);
    }
    return out;
}

} // namespace stylize
