#include <doctest.h>

#include <cmath>
#include <fstream>

#include "stylize/image.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

using namespace stylize;
using testutil::TempDir;
using testutil::max_abs_diff;

TEST_CASE("load_image normalizes 8-bit samples") {
    TempDir dir("load8");
    Image src(2, 2, 1);
    src.at(0, 0, 0) = 0.0f;
    src.at(0, 1, 0) = 1.0f;
    src.at(0, 0, 1) = 128.0f / 255.0f;
    src.at(0, 1, 1) = 64.0f / 255.0f;
    save_image(src, dir.file("px.png"));

    const Image img = load_image(dir.file("px.png"));
    REQUIRE(img.width() == 2);
    REQUIRE(img.height() == 2);
    REQUIRE(img.channels() == 1);
    CHECK(img.at(0, 0, 0) == doctest::Approx(0.0));
    CHECK(img.at(0, 1, 0) == doctest::Approx(1.0));
    CHECK(img.at(0, 0, 1) == doctest::Approx(128.0 / 255.0));
    CHECK(img.at(0, 1, 1) == doctest::Approx(64.0 / 255.0));
}

TEST_CASE("save/load round-trip stays within one quantization step") {
    TempDir dir("roundtrip");
    const Image img = testutil::random_image(37, 23, 3, 42);
    save_image(img, dir.file("rt.png"));
    const Image back = load_image(dir.file("rt.png"));
    CHECK(max_abs_diff(img, back) <= 1.0 / 255.0 + 1e-7);

    save_image(back, dir.file("rt2.png"));
    const Image again = load_image(dir.file("rt2.png"));
    CHECK(max_abs_diff(back, again) == 0.0); // already quantized
}

TEST_CASE("full-resolution color photo sample count") {
    TempDir dir("bigphoto");
    save_image(Image(1320, 1000, 3, 0.5f), dir.file("big.png"));
    const Image img = load_image(dir.file("big.png"));
    CHECK(img.sample_count() == 3960000);
}

TEST_CASE("load_image failure paths") {
    TempDir dir("badload");
    CHECK_THROWS_WITH_AS(load_image(dir.file("missing.png")),
                         doctest::Contains("missing.png"), std::runtime_error);
    // Not an image file at all.
    {
        std::ofstream junk(dir.file("junk.png"));
        junk << "not a png";
    }
    CHECK_THROWS_AS(load_image(dir.file("junk.png")), std::runtime_error);
}

TEST_CASE("16-bit round-trip") {
    TempDir dir("sixteen");
    const Image img = testutil::random_image(19, 11, 1, 9);
    save_image(img, dir.file("deep.png"), 16);
    const Image back = load_image(dir.file("deep.png"));
    CHECK(max_abs_diff(img, back) <= 1.0 / 65535.0 + 1e-9);
}

TEST_CASE("to_luma uses Rec. 709 weights") {
    Image img(3, 1, 3);
    // white, green, mid-gray
    img.at(0, 0, 0) = img.at(1, 0, 0) = img.at(2, 0, 0) = 1.0f;
    img.at(1, 1, 0) = 1.0f;
    img.at(0, 2, 0) = img.at(1, 2, 0) = img.at(2, 2, 0) = 0.5f;

    const Image y = to_luma(img);
    REQUIRE(y.channels() == 1);
    CHECK(y.at(0, 0, 0) == doctest::Approx(1.0));
    CHECK(y.at(0, 1, 0) == doctest::Approx(0.7152));
    CHECK(y.at(0, 2, 0) == doctest::Approx(0.5));

    // Single-channel input passes through unchanged.
    const Image already = testutil::random_image(8, 8, 1, 3);
    CHECK(max_abs_diff(to_luma(already), already) == 0.0);
}

TEST_CASE("to_luma stays in [0,1] for in-range input") {
    const Image img = testutil::random_image(32, 32, 3, 17);
    const Image y = to_luma(img);
    for (float v : y.samples()) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("gaussian_blur preserves constants and handles sigma 0") {
    const Image flat(16, 12, 1, 0.37f);
    CHECK(max_abs_diff(gaussian_blur(flat, 3.0), flat) < 1e-6);

    const Image img = testutil::random_image(16, 12, 3, 5);
    const Image same = gaussian_blur(img, 0.0);
    CHECK(max_abs_diff(same, img) == 0.0); // bit-identical

    CHECK_THROWS_AS(gaussian_blur(img, -1.0), std::invalid_argument);
}

TEST_CASE("gaussian_blur of a unit impulse matches the analytic kernel") {
    const double sigma = 2.0;
    Image impulse(31, 31, 1, 0.0f);
    impulse.at(0, 15, 15) = 1.0f;
    const Image blurred = gaussian_blur(impulse, sigma);

    double sum = 0.0;
    double worst = 0.0;
    for (int y = 0; y < 31; ++y) {
        for (int x = 0; x < 31; ++x) {
            const double r2 = static_cast<double>(x - 15) * (x - 15) +
                              static_cast<double>(y - 15) * (y - 15);
            const double analytic =
                std::exp(-r2 / (2.0 * sigma * sigma)) / (2.0 * 3.14159265358979 * sigma * sigma);
            worst = std::max(worst, std::abs(blurred.at(0, x, y) - analytic));
            sum += blurred.at(0, x, y);
        }
    }
    CHECK(worst < 1e-4);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("gaussian_blur agrees with the direct 2D reference") {
    const Image img = testutil::random_image(24, 17, 1, 77);
    const Image fast = gaussian_blur(img, 1.5);
    const Image slow = oracle::naive_gaussian_blur(img, 1.5);
    CHECK(max_abs_diff(fast, slow) < 1e-6);
}

TEST_CASE("gaussian_blur preserves the global mean on constant-border images") {
    // Clamp-to-edge is bias-free when the rows near the border are constant.
    Image img = testutil::random_image(64, 64, 1, 11);
    const int margin = 7; // > 3*sigma
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            if (x < margin || y < margin || x >= 64 - margin || y >= 64 - margin)
                img.at(0, x, y) = 0.42f;

    const Image blurred = gaussian_blur(img, 2.0);
    double mean_in = 0.0, mean_out = 0.0;
    for (float v : img.samples()) mean_in += v;
    for (float v : blurred.samples()) mean_out += v;
    mean_in /= img.sample_count();
    mean_out /= blurred.sample_count();
    CHECK(std::abs(mean_in - mean_out) < 1e-4);
}

TEST_CASE("box_mean identity and constants") {
    const Image img = testutil::random_image(9, 7, 1, 2);
    CHECK(max_abs_diff(box_mean(img, 0), img) == 0.0);

    const Image flat(20, 20, 1, 0.61f);
    CHECK(max_abs_diff(box_mean(flat, 4), flat) < 1e-6);

    CHECK_THROWS_AS(box_mean(img, -2), std::invalid_argument);
}

TEST_CASE("box_mean matches the brute-force windowed mean everywhere") {
    const Image img = testutil::random_image(16, 16, 1, 29);
    const Image fast = box_mean(img, 3);
    const Image slow = oracle::naive_box_mean(img, 3);
    CHECK(max_abs_diff(fast, slow) < 1e-6);

    // Border behavior specifically, with a radius larger than the image.
    const Image tiny = testutil::random_image(5, 4, 1, 31);
    CHECK(max_abs_diff(box_mean(tiny, 6), oracle::naive_box_mean(tiny, 6)) < 1e-6);
}

TEST_CASE("resize_image: area average down, bilinear up") {
    const Image flat(16, 16, 3, 0.25f);
    CHECK(max_abs_diff(resize_image(flat, 4, 4), Image(4, 4, 3, 0.25f)) < 1e-6);

    // 2x2 checkerboard cells collapse to their average.
    Image checker(4, 4, 1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) checker.at(0, x, y) = ((x + y) % 2) ? 1.0f : 0.0f;
    const Image half = resize_image(checker, 2, 2);
    for (float v : half.samples()) CHECK(v == doctest::Approx(0.5));

    // Upscaling a constant stays constant.
    CHECK(max_abs_diff(resize_image(flat, 31, 33), Image(31, 33, 3, 0.25f)) < 1e-6);
}
