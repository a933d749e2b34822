#pragma once

#include <cstdint>
#include <vector>

namespace fer {

/// 8-bit image, 1 (gray) or 3 (RGB) interleaved channels, row-major.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, int c, std::uint8_t fill = 0);

    [[nodiscard]] bool is_gray() const { return channels == 1; }
    [[nodiscard]] std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t& at(int x, int y, int c = 0) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    friend bool operator==(const Image&, const Image&) = default;
};

/// Throws InputError unless dimensions and buffer length agree.
void validate(const Image& img);

/// ITU-R BT.601 luma, rounded to nearest. Gray input is returned unchanged.
Image to_gray(const Image& img);

Image flip_horizontal(const Image& img);

/// Copies the integer window [x0, x0+w) x [y0, y0+h); must lie inside the image.
Image crop_window(const Image& img, int x0, int y0, int w, int h);

/// Bilinear sample at real coordinates with pixel centers on integers.
/// Zero outside [0, w-1] x [0, h-1].
double sample_bilinear_zero(const Image& img, double x, double y, int c);

/// Bilinear sample, coordinates clamped to the image edge.
double sample_bilinear_clamp(const Image& img, double x, double y, int c);

std::uint8_t round_to_u8(double v);

}  // namespace fer
