#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace stylize {

/// Planar float raster. Channel planes are stored back to back, each plane
/// row-major. Loaded images are normalized to [0,1]; intermediate results
/// (band-pass layers, displacement fields) may hold any finite value.
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, float fill = 0.0f);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }
    std::size_t sample_count() const { return data_.size(); }

    float& at(int c, int x, int y) {
        return data_[plane_offset(c) + static_cast<std::size_t>(y) * width_ + x];
    }
    float at(int c, int x, int y) const {
        return data_[plane_offset(c) + static_cast<std::size_t>(y) * width_ + x];
    }

    std::span<float> plane(int c) {
        return {data_.data() + plane_offset(c), plane_size()};
    }
    std::span<const float> plane(int c) const {
        return {data_.data() + plane_offset(c), plane_size()};
    }

    std::span<float> samples() { return data_; }
    std::span<const float> samples() const { return data_; }

    /// Single-channel image viewing one plane (copies the plane).
    Image extract_plane(int c) const;

    bool same_shape(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_ &&
               channels_ == other.channels_;
    }

private:
    std::size_t plane_size() const {
        return static_cast<std::size_t>(width_) * height_;
    }
    std::size_t plane_offset(int c) const { return plane_size() * c; }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

/// Decode an 8- or 16-bit PNG/JPEG file. Samples are divided by the source
/// bit-depth maximum; color files yield 3 channels, grayscale 1.
Image load_image(const std::string& path);

/// Encode to PNG or JPEG by file extension. Samples are clamped to [0,1]
/// and quantized to `bits` (8 or 16; JPEG is always 8).
void save_image(const Image& img, const std::string& path, int bits = 8);

/// Rec. 709 luma. Single-channel input passes through unchanged.
Image to_luma(const Image& img);

/// Separable Gaussian convolution, kernel radius ceil(3*sigma),
/// clamp-to-edge borders. sigma == 0 returns the input unchanged.
Image gaussian_blur(const Image& img, double sigma);

/// Windowed mean over (2r+1)^2 windows clipped to the image, each output
/// divided by the in-bounds sample count. O(1) per pixel via integral image.
Image box_mean(const Image& img, int radius);

/// Area-average downscale / bilinear upscale to the given size.
Image resize_image(const Image& img, int new_width, int new_height);

} // namespace stylize
