#ifndef URLTRACE_MATCH_HPP
#define URLTRACE_MATCH_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "urltrace/error.hpp"
#include "urltrace/image.hpp"
#include "urltrace/imgproc.hpp"
#include "urltrace/png_io.hpp"

namespace urltrace {

/// URL-field rectangle relative to a template's match point. Width may be
/// a fixed pixel count or extend to the image's right edge.
struct UrlFieldOffset {
    int dx = 0;
    int dy = 0;
    bool to_right_edge = false;
    int width = 0; // ignored when to_right_edge
    int height = 0;
};

struct BrowserTemplate {
    std::string browser_id;
    GrayImage image;
    UrlFieldOffset field;
};

struct TemplateManifest {
    std::vector<BrowserTemplate> templates;
    double threshold = 0.8;
};

struct MatchResult {
    std::string browser_id;
    double score = 0.0;
    int x = 0;
    int y = 0;
};

/// Dense correlation response, one value per valid template placement.
struct ResponseSurface {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    double at(int x, int y) const {
        return values[static_cast<std::size_t>(y) * width + x];
    }
};

struct TemplateMatch {
    ResponseSurface response;
    double score = 0.0;
    int x = 0;
    int y = 0;
};

/// Zero-normalized cross-correlation over every placement of the template
/// inside the image. Template and window are mean-centered and divided by
/// the product of their norms, so scores live in [-1, 1] and are
/// invariant to affine intensity changes. Zero-variance windows (or a
/// constant template) score 0.
inline TemplateMatch match_template(const GrayImage& image, const GrayImage& tmpl) {
    const int tw = tmpl.width, th = tmpl.height;
    if (tw > image.width || th > image.height)
        raise(ErrorCode::TemplateLargerThanImage, "template exceeds image bounds");

    const int rw = image.width - tw + 1;
    const int rh = image.height - th + 1;
    const double n = static_cast<double>(tw) * th;

    double t_sum = 0.0;
    for (std::uint8_t v : tmpl.pixels) t_sum += v;
    const double t_mean = t_sum / n;
    std::vector<double> t_centered(tmpl.pixels.size());
    double t_centered_sum = 0.0, t_var = 0.0;
    for (std::size_t i = 0; i < tmpl.pixels.size(); ++i) {
        t_centered[i] = tmpl.pixels[i] - t_mean;
        t_centered_sum += t_centered[i];
        t_var += t_centered[i] * t_centered[i];
    }

    TemplateMatch result;
    result.response = ResponseSurface{rw, rh, std::vector<double>(static_cast<std::size_t>(rw) * rh, 0.0)};

    // Window sums and sums of squares via integral images (exact for
    // 8-bit inputs); the correlation term needs a direct pass.
    const int iw = image.width, ih = image.height;
    std::vector<double> integ(static_cast<std::size_t>(iw + 1) * (ih + 1), 0.0);
    std::vector<double> integ2(static_cast<std::size_t>(iw + 1) * (ih + 1), 0.0);
    for (int y = 0; y < ih; ++y) {
        const std::uint8_t* src = image.pixels.data() + static_cast<std::size_t>(y) * iw;
        double row = 0.0, row2 = 0.0;
        for (int x = 0; x < iw; ++x) {
            row += src[x];
            row2 += static_cast<double>(src[x]) * src[x];
            integ[static_cast<std::size_t>(y + 1) * (iw + 1) + x + 1] =
                integ[static_cast<std::size_t>(y) * (iw + 1) + x + 1] + row;
            integ2[static_cast<std::size_t>(y + 1) * (iw + 1) + x + 1] =
                integ2[static_cast<std::size_t>(y) * (iw + 1) + x + 1] + row2;
        }
    }

    std::vector<double> corr(static_cast<std::size_t>(rw) * rh, 0.0);
    for (int y = 0; y < rh; ++y) {
        double* acc = corr.data() + static_cast<std::size_t>(y) * rw;
        for (int ty = 0; ty < th; ++ty) {
            const std::uint8_t* irow = image.pixels.data() + static_cast<std::size_t>(y + ty) * iw;
            const double* trow = t_centered.data() + static_cast<std::size_t>(ty) * tw;
            for (int tx = 0; tx < tw; ++tx) {
                const double w = trow[tx];
                const std::uint8_t* src = irow + tx;
                for (int x = 0; x < rw; ++x)
                    acc[x] += w * src[x];
            }
        }
    }

    double best = -2.0;
    int best_x = 0, best_y = 0;
    for (int y = 0; y < rh; ++y) {
        for (int x = 0; x < rw; ++x) {
            const auto box = [&](const std::vector<double>& s) {
                return s[static_cast<std::size_t>(y + th) * (iw + 1) + x + tw] -
                       s[static_cast<std::size_t>(y + th) * (iw + 1) + x] -
                       s[static_cast<std::size_t>(y) * (iw + 1) + x + tw] +
                       s[static_cast<std::size_t>(y) * (iw + 1) + x];
            };
            const double i_sum = box(integ);
            const double i_var = std::max(0.0, box(integ2) - i_sum * i_sum / n);
            double score = 0.0;
            if (t_var > 0.0 && i_var > 0.0) {
                const double numer = corr[static_cast<std::size_t>(y) * rw + x] -
                                     (i_sum / n) * t_centered_sum;
                score = numer / std::sqrt(t_var * i_var);
                score = std::clamp(score, -1.0, 1.0);
            }
            result.response.values[static_cast<std::size_t>(y) * rw + x] = score;
            if (score > best) { // strict: ties keep the smallest (y, x)
                best = score;
                best_x = x;
                best_y = y;
            }
        }
    }
    result.score = best;
    result.x = best_x;
    result.y = best_y;
    return result;
}

/// Try every template in manifest order and keep the best score at or
/// above the threshold. Absence of a browser is a value, not an error;
/// templates that do not fit the image simply cannot match.
inline std::optional<MatchResult> best_browser_match(const GrayImage& image,
                                                     const TemplateManifest& manifest) {
    std::optional<MatchResult> best;
    for (const auto& bt : manifest.templates) {
        if (bt.image.width > image.width || bt.image.height > image.height)
            continue;
        const TemplateMatch m = match_template(image, bt.image);
        if (m.score >= manifest.threshold && (!best || m.score > best->score))
            best = MatchResult{bt.browser_id, m.score, m.x, m.y};
    }
    return best;
}

/// Crop the URL text field relative to a match point using the matched
/// template's field offset, clipped to the image.
inline GrayImage crop_url_field(const GrayImage& image, const MatchResult& match,
                                const TemplateManifest& manifest) {
    const BrowserTemplate* tmpl = nullptr;
    for (const auto& bt : manifest.templates)
        if (bt.browser_id == match.browser_id) {
            tmpl = &bt;
            break;
        }
    if (!tmpl)
        raise(ErrorCode::BadManifest, "no template for browser '" + match.browser_id + "'");

    const UrlFieldOffset& f = tmpl->field;
    const int x0 = match.x + f.dx;
    const int y0 = match.y + f.dy;
    const int w = f.to_right_edge ? image.width - x0 : f.width;
    const int h = f.height;

    const int cx0 = std::max(0, x0);
    const int cy0 = std::max(0, y0);
    const int cx1 = std::min(image.width, x0 + w);
    const int cy1 = std::min(image.height, y0 + h);
    if (cx1 <= cx0 || cy1 <= cy0)
        raise(ErrorCode::DegenerateField,
              "URL field for '" + match.browser_id + "' lies outside the image");
    return crop(image, Rect{cx0, cy0, cx1 - cx0, cy1 - cy0});
}

/// Expected rectangle for a field anchored at (x, y), before clipping.
/// Exposed so generators and tests can reason about geometry.
inline Rect field_rect_at(const UrlFieldOffset& f, int x, int y, int image_width) {
    const int x0 = x + f.dx;
    return Rect{x0, y + f.dy, f.to_right_edge ? image_width - x0 : f.width, f.height};
}

inline void validate_manifest(const TemplateManifest& manifest) {
    if (!(manifest.threshold > 0.0 && manifest.threshold <= 1.0))
        raise(ErrorCode::BadManifest, "threshold must be in (0, 1]");
    if (manifest.templates.empty())
        raise(ErrorCode::BadManifest, "manifest lists no templates");
    for (std::size_t i = 0; i < manifest.templates.size(); ++i) {
        const auto& bt = manifest.templates[i];
        if (bt.browser_id.empty())
            raise(ErrorCode::BadManifest, "empty browser_id");
        for (std::size_t j = i + 1; j < manifest.templates.size(); ++j)
            if (manifest.templates[j].browser_id == bt.browser_id)
                raise(ErrorCode::BadManifest, "duplicate browser_id '" + bt.browser_id + "'");
        const auto mn = *std::min_element(bt.image.pixels.begin(), bt.image.pixels.end());
        const auto mx = *std::max_element(bt.image.pixels.begin(), bt.image.pixels.end());
        if (mn == mx)
            raise(ErrorCode::BadManifest, "constant template for '" + bt.browser_id + "'");
        if (bt.field.height < 1 || (!bt.field.to_right_edge && bt.field.width < 1))
            raise(ErrorCode::BadManifest, "degenerate field geometry for '" + bt.browser_id + "'");
    }
}

/// Manifest file: {"threshold": .., "templates": [{"browser_id", "template_path",
/// "url_field_offset": {"dx","dy","width"|"to-right-edge","height"}}]}.
/// Template paths resolve relative to the manifest's directory.
inline TemplateManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        raise(ErrorCode::IoFailure, "cannot open manifest " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::BadManifest, path + ": " + e.what());
    }

    TemplateManifest manifest;
    try {
        manifest.threshold = doc.value("threshold", 0.8);
        const auto base = std::filesystem::path(path).parent_path();
        for (const auto& entry : doc.at("templates")) {
            BrowserTemplate bt;
            bt.browser_id = entry.at("browser_id").get<std::string>();
            const std::string rel = entry.at("template_path").get<std::string>();
            const auto tpath = std::filesystem::path(rel).is_absolute()
                                   ? std::filesystem::path(rel)
                                   : base / rel;
            bt.image = to_grayscale(load_png_rgb(tpath.string()));
            const auto& off = entry.at("url_field_offset");
            bt.field.dx = off.at("dx").get<int>();
            bt.field.dy = off.at("dy").get<int>();
            bt.field.height = off.at("height").get<int>();
            const auto& w = off.at("width");
            if (w.is_string()) {
                if (w.get<std::string>() != "to-right-edge")
                    raise(ErrorCode::BadManifest, "width must be a number or \"to-right-edge\"");
                bt.field.to_right_edge = true;
            } else {
                bt.field.width = w.get<int>();
            }
            manifest.templates.push_back(std::move(bt));
        }
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::BadManifest, path + ": " + e.what());
    }
    validate_manifest(manifest);
    return manifest;
}

} // namespace urltrace

#endif // URLTRACE_MATCH_HPP
