#ifndef URLTRACE_PNG_IO_HPP
#define URLTRACE_PNG_IO_HPP

#include <cstdio>
#include <csetjmp>
#include <string>
#include <vector>

#include <png.h>

#include "urltrace/error.hpp"
#include "urltrace/image.hpp"

namespace urltrace {

namespace detail {

struct FileCloser {
    std::FILE* f = nullptr;
    ~FileCloser() {
        if (f) std::fclose(f);
    }
};

} // namespace detail

/// Decode a PNG file to RGB. Gray and palette images are expanded, 16-bit
/// channels are reduced to 8, and alpha is composited over white (screen
/// captures are opaque; stray alpha comes from capture tools).
inline RgbImage load_png_rgb(const std::string& path) {
    detail::FileCloser file{std::fopen(path.c_str(), "rb")};
    if (!file.f)
        raise(ErrorCode::DecodeFailure, "cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(ErrorCode::DecodeFailure, "libpng init failed for " + path);
    }

    std::vector<std::uint8_t> raw;
    std::vector<png_bytep> rows;
    png_uint_32 w = 0, h = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(ErrorCode::DecodeFailure, "not a decodable PNG: " + path);
    }

    png_init_io(png, file.f);
    png_read_info(png, info);

    int bit_depth = 0, color_type = 0;
    png_get_IHDR(png, info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);

    if (color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);
    if (bit_depth == 16)
        png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    // RGBA -> RGB over a white background.
    png_color_16 white{0, 0xff, 0xff, 0xff, 0xff};
    png_set_background(png, &white, PNG_BACKGROUND_GAMMA_SCREEN, 0, 1.0);
    png_read_update_info(png, info);

    if (w < 1 || h < 1) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(ErrorCode::DecodeFailure, "degenerate PNG dimensions in " + path);
    }

    raw.resize(static_cast<std::size_t>(w) * h * 3);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = raw.data() + static_cast<std::size_t>(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    RgbImage img(static_cast<int>(w), static_cast<int>(h));
    img.pixels = std::move(raw);
    return img;
}

namespace detail {

inline void save_png(const std::string& path, int width, int height, int color_type,
                     const std::uint8_t* data, std::size_t stride) {
    FileCloser file{std::fopen(path.c_str(), "wb")};
    if (!file.f)
        raise(ErrorCode::IoFailure, "cannot write " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        raise(ErrorCode::IoFailure, "libpng init failed for " + path);
    }

    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = const_cast<png_bytep>(data + static_cast<std::size_t>(y) * stride);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        raise(ErrorCode::IoFailure, "PNG write failed for " + path);
    }

    png_init_io(png, file.f);
    png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace detail

inline void save_png(const std::string& path, const RgbImage& img) {
    detail::save_png(path, img.width, img.height, PNG_COLOR_TYPE_RGB, img.pixels.data(),
                     static_cast<std::size_t>(img.width) * 3);
}

inline void save_png(const std::string& path, const GrayImage& img) {
    detail::save_png(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, img.pixels.data(),
                     static_cast<std::size_t>(img.width));
}

} // namespace urltrace

#endif // URLTRACE_PNG_IO_HPP
