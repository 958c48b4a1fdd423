#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "stylize/image.hpp"

namespace testutil {

using stylize::Image;

inline std::mt19937& rng(unsigned seed = 0) {
    static std::mt19937 gen(1234);
    if (seed) gen.seed(seed);
    return gen;
}

inline Image random_image(int w, int h, int channels, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    Image img(w, h, channels);
    for (float& v : img.samples()) v = dist(gen);
    return img;
}

/// Smooth test image: mixed ramps and sinusoids, values well inside [0,1].
inline Image smooth_image(int w, int h, int channels, unsigned seed = 7) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> phase(0.0, 6.28);
    Image img(w, h, channels);
    for (int c = 0; c < channels; ++c) {
        const double p1 = phase(gen), p2 = phase(gen);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double v = 0.5 + 0.15 * (static_cast<double>(x) / w - 0.5) +
                                 0.1 * std::sin(2.0 * 3.14159265 * x / 24.0 + p1) +
                                 0.1 * std::sin(2.0 * 3.14159265 * y / 17.0 + p2);
                img.at(c, x, y) = static_cast<float>(v);
            }
    }
    return img;
}

inline double max_abs_diff(const Image& a, const Image& b) {
    double worst = 0.0;
    auto pa = a.samples();
    auto pb = b.samples();
    for (std::size_t i = 0; i < pa.size(); ++i)
        worst = std::max(worst, std::abs(static_cast<double>(pa[i]) - pb[i]));
    return worst;
}

/// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("stylize_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace testutil
