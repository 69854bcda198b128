#ifndef URLTRACE_IMGPROC_HPP
#define URLTRACE_IMGPROC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "urltrace/error.hpp"
#include "urltrace/image.hpp"

namespace urltrace {

/// Luminosity grayscale: Y = 0.299 R + 0.587 G + 0.114 B, rounded half up.
inline GrayImage to_grayscale(const RgbImage& img) {
    GrayImage out(img.width, img.height);
    const std::uint8_t* p = img.pixels.data();
    for (std::size_t i = 0; i < out.pixels.size(); ++i, p += 3)
        out.pixels[i] = quantize_intensity(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]);
    return out;
}

/// Upscale by an integer factor with bilinear interpolation. Factor 1 is
/// the identity; constant regions stay constant.
inline GrayImage rescale(const GrayImage& img, int factor = 3) {
    if (factor < 1)
        raise(ErrorCode::BadInput, "rescale factor must be >= 1");
    if (factor == 1)
        return img;
    GrayImage out(img.width * factor, img.height * factor);
    const double inv = 1.0 / factor;
    for (int y = 0; y < out.height; ++y) {
        double sy = (y + 0.5) * inv - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double fy = sy - y0;
        for (int x = 0; x < out.width; ++x) {
            double sx = (x + 0.5) * inv - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double fx = sx - x0;
            const double top = (1.0 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
            const double bot = (1.0 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
            out.at(x, y) = quantize_intensity((1.0 - fy) * top + fy * bot);
        }
    }
    return out;
}

enum class PatchWeighting { Uniform, Gaussian };

/// Non-local means parameters. patch_size is the side of the compared
/// neighborhood, search_window the side of the averaging window, and
/// strength_h divides the squared patch distance in the exponent.
struct DenoiseParams {
    int patch_size = 7;
    int search_window = 21;
    double strength_h = 10.0;
    PatchWeighting patch_weighting = PatchWeighting::Uniform;
    double gaussian_sigma = 1.0; // used when patch_weighting == Gaussian

    void validate() const {
        if (patch_size < 3 || patch_size % 2 == 0)
            raise(ErrorCode::BadInput, "patch_size must be odd and >= 3");
        if (search_window <= patch_size || search_window % 2 == 0)
            raise(ErrorCode::BadInput, "search_window must be odd and > patch_size");
        if (strength_h <= 0.0)
            raise(ErrorCode::BadInput, "strength_h must be > 0");
        if (patch_weighting == PatchWeighting::Gaussian && gaussian_sigma <= 0.0)
            raise(ErrorCode::BadInput, "gaussian_sigma must be > 0");
    }
};

namespace detail {

/// Per-pixel kernel over patch offsets, normalized to sum 1. Uniform is
/// 1/|patch|; Gaussian weights offsets by exp(-(dx^2+dy^2)/(2 sigma^2)).
inline std::vector<double> patch_kernel(const DenoiseParams& params) {
    const int side = params.patch_size;
    std::vector<double> kernel(static_cast<std::size_t>(side) * side);
    const int r = side / 2;
    double sum = 0.0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            double w = 1.0;
            if (params.patch_weighting == PatchWeighting::Gaussian)
                w = std::exp(-(dx * dx + dy * dy) /
                             (2.0 * params.gaussian_sigma * params.gaussian_sigma));
            kernel[static_cast<std::size_t>(dy + r) * side + (dx + r)] = w;
            sum += w;
        }
    for (double& w : kernel) w /= sum;
    return kernel;
}

/// Direct evaluation: for every pixel, walk the search window, compare
/// patches (edge-replicated reads), and average with the exponential
/// weights. Used for Gaussian patch weighting; quadratic in window size.
inline GrayImage nlm_direct(const GrayImage& img, const DenoiseParams& params) {
    const int r = params.patch_size / 2;
    const int wr = params.search_window / 2;
    const double h2 = params.strength_h * params.strength_h;
    const std::vector<double> kernel = patch_kernel(params);

    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double num = 0.0, den = 0.0;
            for (int jy = std::max(0, y - wr); jy <= std::min(img.height - 1, y + wr); ++jy) {
                for (int jx = std::max(0, x - wr); jx <= std::min(img.width - 1, x + wr); ++jx) {
                    double dist = 0.0;
                    std::size_t k = 0;
                    for (int dy = -r; dy <= r; ++dy)
                        for (int dx = -r; dx <= r; ++dx, ++k) {
                            const double d = static_cast<double>(img.at_clamped(x + dx, y + dy)) -
                                             static_cast<double>(img.at_clamped(jx + dx, jy + dy));
                            dist += kernel[k] * d * d;
                        }
                    const double w = std::exp(-dist / h2);
                    num += w * img.at(jx, jy);
                    den += w;
                }
            }
            out.at(x, y) = quantize_intensity(num / den);
        }
    }
    return out;
}

/// Uniform-kernel evaluation via per-translation squared-difference
/// integral images: one pass per window offset instead of a patch scan
/// per pixel pair. Distances are integer-exact, so results agree with
/// nlm_direct up to floating-point summation order.
inline GrayImage nlm_uniform_fast(const GrayImage& img, const DenoiseParams& params) {
    const int r = params.patch_size / 2;
    const int wr = params.search_window / 2;
    const int W = img.width, H = img.height;
    const int pw = W + 2 * r, ph = H + 2 * r;
    const double patch_area = static_cast<double>(params.patch_size) * params.patch_size;
    const double scale = 1.0 / (patch_area * params.strength_h * params.strength_h);

    std::vector<double> diff2(static_cast<std::size_t>(pw) * ph);
    std::vector<double> integral(static_cast<std::size_t>(pw + 1) * (ph + 1), 0.0);
    std::vector<double> num(static_cast<std::size_t>(W) * H, 0.0);
    std::vector<double> den(static_cast<std::size_t>(W) * H, 0.0);

    for (int ty = -wr; ty <= wr; ++ty) {
        for (int tx = -wr; tx <= wr; ++tx) {
            for (int y = 0; y < ph; ++y) {
                const int sy = y - r;
                for (int x = 0; x < pw; ++x) {
                    const int sx = x - r;
                    const double d = static_cast<double>(img.at_clamped(sx, sy)) -
                                     static_cast<double>(img.at_clamped(sx + tx, sy + ty));
                    diff2[static_cast<std::size_t>(y) * pw + x] = d * d;
                }
            }
            for (int y = 0; y < ph; ++y) {
                const double* src = diff2.data() + static_cast<std::size_t>(y) * pw;
                const double* up = integral.data() + static_cast<std::size_t>(y) * (pw + 1);
                double* cur = integral.data() + static_cast<std::size_t>(y + 1) * (pw + 1);
                double row = 0.0;
                for (int x = 0; x < pw; ++x) {
                    row += src[x];
                    cur[x + 1] = up[x + 1] + row;
                }
            }
            const int y_lo = std::max(0, -ty), y_hi = std::min(H, H - ty);
            const int x_lo = std::max(0, -tx), x_hi = std::min(W, W - tx);
            for (int y = y_lo; y < y_hi; ++y) {
                // Patch box around (x, y) sits at [y, y+2r] x [x, x+2r] in
                // padded coordinates.
                const double* i0 = integral.data() + static_cast<std::size_t>(y) * (pw + 1);
                const double* i1 = integral.data() + static_cast<std::size_t>(y + 2 * r + 1) * (pw + 1);
                const std::uint8_t* vj = img.pixels.data() + static_cast<std::size_t>(y + ty) * W + tx;
                double* nrow = num.data() + static_cast<std::size_t>(y) * W;
                double* drow = den.data() + static_cast<std::size_t>(y) * W;
                for (int x = x_lo; x < x_hi; ++x) {
                    const double ssd = i1[x + 2 * r + 1] - i1[x] - i0[x + 2 * r + 1] + i0[x];
                    const double w = std::exp(-ssd * scale);
                    nrow[x] += w * vj[x];
                    drow[x] += w;
                }
            }
        }
    }

    GrayImage out(W, H);
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        out.pixels[i] = quantize_intensity(num[i] / den[i]);
    return out;
}

} // namespace detail

/// Non-local means: each pixel becomes the similarity-weighted average of
/// the pixels in its search window, with patch distances divided by h^2
/// inside the exponential and weights normalized to sum 1. Patch reads
/// past the border replicate the edge; the window itself is clipped to
/// the image.
inline GrayImage nlm_denoise(const GrayImage& img, const DenoiseParams& params = {}) {
    params.validate();
    if (img.width < params.patch_size || img.height < params.patch_size)
        raise(ErrorCode::ImageTooSmall, "image smaller than NLM patch");
    if (params.patch_weighting == PatchWeighting::Uniform)
        return detail::nlm_uniform_fast(img, params);
    return detail::nlm_direct(img, params);
}

/// Unsharp filter: convolve with 2*delta - G5 where G5 is a normalized
/// 5x5 Gaussian (sigma 1.0). Entries sum to 1, so flat regions pass
/// through; edges gain contrast. Borders replicate.
inline GrayImage sharpen(const GrayImage& img) {
    double g[5];
    double gsum = 0.0;
    for (int i = 0; i < 5; ++i) {
        g[i] = std::exp(-((i - 2) * (i - 2)) / 2.0);
        gsum += g[i];
    }
    double kernel[5][5];
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            kernel[i][j] = -(g[i] * g[j]) / (gsum * gsum);
    kernel[2][2] += 2.0;

    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx)
                    acc += kernel[dy + 2][dx + 2] * img.at_clamped(x + dx, y + dy);
            out.at(x, y) = quantize_intensity(acc);
        }
    return out;
}

} // namespace urltrace

#endif // URLTRACE_IMGPROC_HPP
