#ifndef URLTRACE_IMAGE_HPP
#define URLTRACE_IMAGE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "urltrace/error.hpp"

namespace urltrace {

/// 8-bit interleaved RGB raster, row-major from the top-left corner.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // width * height * 3

    RgbImage() = default;
    RgbImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {
        if (w < 1 || h < 1)
            raise(ErrorCode::BadInput, "RgbImage dimensions must be >= 1");
    }

    std::uint8_t* at(int x, int y) {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
};

/// 8-bit single-channel raster, row-major from the top-left corner.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // width * height

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
        if (w < 1 || h < 1)
            raise(ErrorCode::BadInput, "GrayImage dimensions must be >= 1");
    }

    std::uint8_t& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }

    /// Read with coordinates clamped to the image bounds (edge replication).
    std::uint8_t at_clamped(int x, int y) const {
        x = std::clamp(x, 0, width - 1);
        y = std::clamp(y, 0, height - 1);
        return at(x, y);
    }

    bool operator==(const GrayImage& other) const = default;
};

/// Axis-aligned pixel rectangle, half-open in neither direction: covers
/// x in [x, x + width), y in [y, y + height).
struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool operator==(const Rect& other) const = default;
};

inline std::uint8_t quantize_intensity(double v) {
    double r = std::floor(v + 0.5); // round half up
    if (r < 0.0) r = 0.0;
    if (r > 255.0) r = 255.0;
    return static_cast<std::uint8_t>(r);
}

inline GrayImage crop(const GrayImage& img, const Rect& r) {
    if (r.width < 1 || r.height < 1 || r.x < 0 || r.y < 0 ||
        r.x + r.width > img.width || r.y + r.height > img.height)
        raise(ErrorCode::BadInput, "crop rectangle out of bounds");
    GrayImage out(r.width, r.height);
    for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x)
            out.at(x, y) = img.at(r.x + x, r.y + y);
    return out;
}

} // namespace urltrace

#endif // URLTRACE_IMAGE_HPP
