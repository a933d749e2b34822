#include "fer/image.hpp"

#include "fer/common.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fer {

Image::Image(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c),
      pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill) {
    validate(*this);
}

void validate(const Image& img) {
    if (img.width < 1 || img.height < 1) {
        throw InputError("image dimensions must be positive, got " + std::to_string(img.width) + "x" +
                         std::to_string(img.height));
    }
    if (img.channels != 1 && img.channels != 3) {
        throw InputError("image must have 1 or 3 channels, got " + std::to_string(img.channels));
    }
    const auto expected = static_cast<std::size_t>(img.width) * img.height * img.channels;
    if (img.pixels.size() != expected) {
        throw InputError("image buffer has " + std::to_string(img.pixels.size()) + " bytes, expected " +
                         std::to_string(expected));
    }
}

std::uint8_t round_to_u8(double v) {
    if (!(v > 0.0)) return 0;
    if (v >= 255.0) return 255;
    return static_cast<std::uint8_t>(std::lround(v));
}

Image to_gray(const Image& img) {
    validate(img);
    if (img.is_gray()) return img;
    Image out(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double v = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
            out.at(x, y) = round_to_u8(v);
        }
    }
    return out;
}

Image flip_horizontal(const Image& img) {
    Image out(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(img.width - 1 - x, y, c);
        }
    }
    return out;
}

Image crop_window(const Image& img, int x0, int y0, int w, int h) {
    if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > img.width || y0 + h > img.height) {
        throw InputError("crop window outside image");
    }
    Image out(w, h, img.channels);
    for (int y = 0; y < h; ++y) {
        const auto* src = &img.pixels[(static_cast<std::size_t>(y0 + y) * img.width + x0) * img.channels];
        std::copy(src, src + static_cast<std::size_t>(w) * img.channels,
                  &out.pixels[static_cast<std::size_t>(y) * w * img.channels]);
    }
    return out;
}

namespace {

double bilerp(const Image& img, double x, double y, int c) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double a = img.at(x0, y0, c);
    const double b = img.at(x1, y0, c);
    const double d = img.at(x0, y1, c);
    const double e = img.at(x1, y1, c);
    // lerp form keeps constant regions exact
    const double top = a + fx * (b - a);
    const double bottom = d + fx * (e - d);
    return top + fy * (bottom - top);
}

}  // namespace

double sample_bilinear_zero(const Image& img, double x, double y, int c) {
    constexpr double eps = 1e-9;
    if (x < -eps || y < -eps || x > img.width - 1 + eps || y > img.height - 1 + eps) return 0.0;
    x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    return bilerp(img, x, y, c);
}

double sample_bilinear_clamp(const Image& img, double x, double y, int c) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    return bilerp(img, x, y, c);
}

}  // namespace fer
