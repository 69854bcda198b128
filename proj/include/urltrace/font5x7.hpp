#ifndef URLTRACE_FONT5X7_HPP
#define URLTRACE_FONT5X7_HPP

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "urltrace/error.hpp"
#include "urltrace/image.hpp"

namespace urltrace {

/// Fixed-pitch 5x7 bitmap font covering the characters that occur in
/// hosts: a-z, 0-9, '.', '-', '/', ':'. One byte per row, bit 4 is the
/// leftmost column. Glyphs sit on a 6-column pitch (one blank column).
inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
inline constexpr int kGlyphPitch = 6;

inline constexpr std::string_view kFontCharset = "abcdefghijklmnopqrstuvwxyz0123456789.-/:";

struct Glyph {
    char ch;
    std::array<std::uint8_t, 7> rows;
};

inline constexpr std::array<Glyph, 40> kFont5x7 = {{
    {'a', {0b00000, 0b00000, 0b01110, 0b00001, 0b01111, 0b10001, 0b01111}},
    {'b', {0b10000, 0b10000, 0b11110, 0b10001, 0b10001, 0b10001, 0b11110}},
    {'c', {0b00000, 0b00000, 0b01110, 0b10000, 0b10000, 0b10000, 0b01110}},
    {'d', {0b00001, 0b00001, 0b01111, 0b10001, 0b10001, 0b10001, 0b01111}},
    {'e', {0b00000, 0b00000, 0b01110, 0b10001, 0b11111, 0b10000, 0b01110}},
    {'f', {0b00110, 0b01001, 0b01000, 0b11100, 0b01000, 0b01000, 0b01000}},
    {'g', {0b00000, 0b01111, 0b10001, 0b10001, 0b01111, 0b00001, 0b01110}},
    {'h', {0b10000, 0b10000, 0b11110, 0b10001, 0b10001, 0b10001, 0b10001}},
    {'i', {0b00100, 0b00000, 0b01100, 0b00100, 0b00100, 0b00100, 0b01110}},
    {'j', {0b00010, 0b00000, 0b00110, 0b00010, 0b00010, 0b10010, 0b01100}},
    {'k', {0b10000, 0b10000, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010}},
    {'l', {0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}},
    {'m', {0b00000, 0b00000, 0b11010, 0b10101, 0b10101, 0b10101, 0b10101}},
    {'n', {0b00000, 0b00000, 0b11110, 0b10001, 0b10001, 0b10001, 0b10001}},
    {'o', {0b00000, 0b00000, 0b01110, 0b10001, 0b10001, 0b10001, 0b01110}},
    {'p', {0b00000, 0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000}},
    {'q', {0b00000, 0b01111, 0b10001, 0b10001, 0b01111, 0b00001, 0b00001}},
    {'r', {0b00000, 0b00000, 0b10110, 0b11001, 0b10000, 0b10000, 0b10000}},
    {'s', {0b00000, 0b00000, 0b01111, 0b10000, 0b01110, 0b00001, 0b11110}},
    {'t', {0b01000, 0b01000, 0b11100, 0b01000, 0b01000, 0b01001, 0b00110}},
    {'u', {0b00000, 0b00000, 0b10001, 0b10001, 0b10001, 0b10011, 0b01101}},
    {'v', {0b00000, 0b00000, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100}},
    {'w', {0b00000, 0b00000, 0b10001, 0b10001, 0b10101, 0b10101, 0b01010}},
    {'x', {0b00000, 0b00000, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001}},
    {'y', {0b00000, 0b10001, 0b10001, 0b10001, 0b01111, 0b00001, 0b01110}},
    {'z', {0b00000, 0b00000, 0b11111, 0b00010, 0b00100, 0b01000, 0b11111}},
    {'0', {0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110}},
    {'1', {0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}},
    {'2', {0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111}},
    {'3', {0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110}},
    {'4', {0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010}},
    {'5', {0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110}},
    {'6', {0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110}},
    {'7', {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000}},
    {'8', {0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110}},
    {'9', {0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100}},
    {'.', {0b00000, 0b00000, 0b00000, 0b00000, 0b00000, 0b01100, 0b01100}},
    {'-', {0b00000, 0b00000, 0b00000, 0b11111, 0b00000, 0b00000, 0b00000}},
    {'/', {0b00001, 0b00001, 0b00010, 0b00100, 0b01000, 0b10000, 0b10000}},
    {':', {0b00000, 0b01100, 0b01100, 0b00000, 0b00000, 0b01100, 0b01100}},
}};

inline constexpr int glyph_index(char c) {
    for (std::size_t i = 0; i < kFont5x7.size(); ++i)
        if (kFont5x7[i].ch == c)
            return static_cast<int>(i);
    return -1;
}

inline constexpr bool glyph_pixel(const Glyph& g, int x, int y) {
    return (g.rows[static_cast<std::size_t>(y)] >> (kGlyphWidth - 1 - x)) & 1;
}

inline bool in_font_charset(std::string_view text) {
    for (char c : text)
        if (glyph_index(c) < 0)
            return false;
    return true;
}

/// Pixel width of rendered text at a scale: n glyph cells on a 6-column
/// pitch, without the trailing blank column.
inline int text_width_px(std::string_view text, int scale = 1) {
    if (text.empty())
        return 0;
    return (static_cast<int>(text.size()) * kGlyphPitch - 1) * scale;
}

inline int text_height_px(int scale = 1) { return kGlyphHeight * scale; }

/// Stamp ink pixels for `text` into a gray image with the glyph grid's
/// top-left at (x0, y0). Background pixels are left untouched.
inline void draw_text(GrayImage& img, int x0, int y0, std::string_view text, int scale = 1,
                      std::uint8_t ink = 0) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        const int gi = glyph_index(text[i]);
        if (gi < 0)
            raise(ErrorCode::BadInput, std::string("character not in font: '") + text[i] + "'");
        const Glyph& g = kFont5x7[static_cast<std::size_t>(gi)];
        const int cx = x0 + static_cast<int>(i) * kGlyphPitch * scale;
        for (int gy = 0; gy < kGlyphHeight; ++gy)
            for (int gx = 0; gx < kGlyphWidth; ++gx) {
                if (!glyph_pixel(g, gx, gy))
                    continue;
                for (int sy = 0; sy < scale; ++sy)
                    for (int sx = 0; sx < scale; ++sx) {
                        const int px = cx + gx * scale + sx;
                        const int py = y0 + gy * scale + sy;
                        if (px >= 0 && px < img.width && py >= 0 && py < img.height)
                            img.at(px, py) = ink;
                    }
            }
    }
}

} // namespace urltrace

#endif // URLTRACE_FONT5X7_HPP
