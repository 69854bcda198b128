#ifndef URLTRACE_SYNTH_HPP
#define URLTRACE_SYNTH_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "urltrace/error.hpp"
#include "urltrace/font5x7.hpp"
#include "urltrace/image.hpp"
#include "urltrace/match.hpp"
#include "urltrace/png_io.hpp"

namespace urltrace {

/// One scripted visit: stay on `domain` in `browser_id` for duration_s.
/// browser_id "none" renders desktop-only frames with no address bar.
struct SessionEvent {
    std::string domain;
    double duration_s = 0.0;
    std::string browser_id;
};

struct SessionSpec {
    double fps = 1.0;
    int frame_width = 1280;
    int frame_height = 720;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    int text_scale = 2;
    std::vector<SessionEvent> events;
};

struct GroundTruth {
    std::string domain;
    Rect field_rect;
};

namespace detail {

/// Deterministic Gaussian source: splitmix-style seed scramble feeding a
/// Box-Muller transform, so frames are reproducible across platforms.
class GaussianNoise {
public:
    GaussianNoise(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        rng_.seed(z ^ (z >> 31));
    }

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline void add_luma_noise(RgbImage& img, double sigma, GaussianNoise& noise) {
    if (sigma <= 0.0)
        return;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double n = sigma * noise.next();
            std::uint8_t* px = img.at(x, y);
            for (int c = 0; c < 3; ++c)
                px[c] = quantize_intensity(px[c] + n);
        }
}

inline void fill_rect(RgbImage& img, const Rect& r, std::uint8_t value) {
    for (int y = std::max(0, r.y); y < std::min(img.height, r.y + r.height); ++y)
        for (int x = std::max(0, r.x); x < std::min(img.width, r.x + r.width); ++x) {
            std::uint8_t* px = img.at(x, y);
            px[0] = px[1] = px[2] = value;
        }
}

} // namespace detail

/// Where the synthetic browser chrome sits inside a frame. The anchor is
/// well inside the top third so the standard 1/3 crop keeps it.
struct RenderLayout {
    int anchor_x = 36;
    int anchor_y = 36;
    std::uint8_t frame_background = 200;
    std::uint8_t field_background = 255;
    std::uint8_t text_ink = 20;
    int text_margin_x = 6;
};

/// Synthetic anchor icons. The stripes/rings split keeps the two
/// templates far apart under normalized correlation.
inline GrayImage builtin_template_image(const std::string& browser_id) {
    GrayImage img(24, 24);
    if (browser_id == "chrome") {
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 24; ++x)
                img.at(x, y) = ((x + y) / 4) % 2 == 0 ? 60 : 220;
    } else if (browser_id == "tor") {
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 24; ++x) {
                const double r = std::hypot(x - 11.5, y - 11.5);
                std::uint8_t v = 230;
                if (r <= 2.5) v = 40;
                else if (r <= 5.0) v = 190;
                else if (r <= 7.5) v = 70;
                else if (r <= 10.0) v = 200;
                else if (r <= 12.0) v = 50;
                img.at(x, y) = v;
            }
    } else {
        raise(ErrorCode::BadInput, "no builtin template for '" + browser_id + "'");
    }
    return img;
}

/// Manifest matching the synthetic renderer: two browsers, URL field to
/// the right of the anchor at the anchor's own height.
inline TemplateManifest builtin_manifest() {
    TemplateManifest manifest;
    manifest.threshold = 0.8;
    for (const char* id : {"chrome", "tor"}) {
        BrowserTemplate bt;
        bt.browser_id = id;
        bt.image = builtin_template_image(id);
        bt.field = UrlFieldOffset{32, 0, false, 480, 24};
        manifest.templates.push_back(std::move(bt));
    }
    return manifest;
}

/// Render one browser frame: anchor icon at the layout position, the
/// domain drawn in the 5x7 font inside a white URL field, seeded Gaussian
/// luma noise on top. Returns the frame plus where the field really is.
inline std::pair<RgbImage, GroundTruth> render_frame(const std::string& domain,
                                                     const BrowserTemplate& browser,
                                                     double noise_sigma, std::uint64_t seed,
                                                     int frame_width = 1280, int frame_height = 720,
                                                     int text_scale = 2,
                                                     const RenderLayout& layout = {}) {
    if (!in_font_charset(domain))
        raise(ErrorCode::BadInput, "domain '" + domain + "' uses characters outside the font");

    RgbImage frame(frame_width, frame_height, layout.frame_background);

    for (int y = 0; y < browser.image.height; ++y)
        for (int x = 0; x < browser.image.width; ++x) {
            std::uint8_t* px = frame.at(layout.anchor_x + x, layout.anchor_y + y);
            px[0] = px[1] = px[2] = browser.image.at(x, y);
        }

    Rect field = field_rect_at(browser.field, layout.anchor_x, layout.anchor_y, frame_width);
    field.x = std::max(0, field.x);
    field.y = std::max(0, field.y);
    field.width = std::min(field.width, frame_width - field.x);
    field.height = std::min(field.height, frame_height - field.y);
    if (field.width < 1 || field.height < 1)
        raise(ErrorCode::BadInput, "URL field falls outside the frame");
    detail::fill_rect(frame, field, layout.field_background);

    const int text_w = text_width_px(domain, text_scale);
    const int text_h = text_height_px(text_scale);
    if (text_w > field.width - 2 * layout.text_margin_x || text_h > field.height)
        raise(ErrorCode::TextOverflow,
              "domain '" + domain + "' does not fit a " + std::to_string(field.width) + "px field");

    GrayImage text_layer(field.width, field.height, layout.field_background);
    draw_text(text_layer, layout.text_margin_x, (field.height - text_h) / 2, domain, text_scale,
              layout.text_ink);
    for (int y = 0; y < field.height; ++y)
        for (int x = 0; x < field.width; ++x)
            if (text_layer.at(x, y) != layout.field_background) {
                std::uint8_t* px = frame.at(field.x + x, field.y + y);
                px[0] = px[1] = px[2] = text_layer.at(x, y);
            }

    detail::GaussianNoise noise(seed, 0);
    detail::add_luma_noise(frame, noise_sigma, noise);
    return {std::move(frame), GroundTruth{domain, field}};
}

/// Desktop-only frame: a few window-like rectangles, no browser chrome.
inline RgbImage render_desktop_frame(double noise_sigma, std::uint64_t seed, int frame_width = 1280,
                                     int frame_height = 720, const RenderLayout& layout = {}) {
    RgbImage frame(frame_width, frame_height, layout.frame_background);
    detail::fill_rect(frame, Rect{frame_width / 8, frame_height / 10, frame_width / 3,
                                  frame_height / 3}, 150);
    detail::fill_rect(frame, Rect{frame_width / 2, frame_height / 5, frame_width / 4,
                                  frame_height / 2}, 120);
    detail::fill_rect(frame, Rect{frame_width / 6, frame_height / 2, frame_width / 5,
                                  frame_height / 4}, 170);
    detail::GaussianNoise noise(seed, 0);
    detail::add_luma_noise(frame, noise_sigma, noise);
    return frame;
}

struct TruthFrame {
    int index = 0;
    std::string domain;
    std::string browser_id;
};

struct SessionTruth {
    double fps = 1.0;
    std::vector<TruthFrame> frames;
};

inline SessionSpec load_session_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        raise(ErrorCode::IoFailure, "cannot open session spec " + path);
    nlohmann::json doc;
    try {
        in >> doc;
        SessionSpec spec;
        spec.fps = doc.value("fps", 1.0);
        spec.frame_width = doc.value("frame_width", 1280);
        spec.frame_height = doc.value("frame_height", 720);
        spec.noise_sigma = doc.value("noise_sigma", 0.0);
        spec.seed = doc.value("seed", std::uint64_t{0});
        spec.text_scale = doc.value("text_scale", 2);
        for (const auto& e : doc.at("events"))
            spec.events.push_back({e.at("domain").get<std::string>(),
                                   e.at("duration_s").get<double>(),
                                   e.value("browser", std::string("chrome"))});
        return spec;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::BadInput, path + ": " + e.what());
    }
}

inline SessionTruth load_session_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        raise(ErrorCode::IoFailure, "cannot open truth file " + path);
    nlohmann::json doc;
    try {
        in >> doc;
        SessionTruth truth;
        truth.fps = doc.at("fps").get<double>();
        for (const auto& f : doc.at("frames"))
            truth.frames.push_back({f.at("index").get<int>(), f.at("domain").get<std::string>(),
                                    f.at("browser").get<std::string>()});
        return truth;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::BadInput, path + ": " + e.what());
    }
}

/// Write ceil(duration * fps) frames per event as numbered PNGs plus
/// truth.json; returns the truth.json path. Frame k gets a seed derived
/// from (spec.seed, k) so any frame can be re-rendered independently.
inline std::string generate_session(const SessionSpec& spec, const std::string& out_dir,
                                    const TemplateManifest& manifest = builtin_manifest()) {
    namespace fs = std::filesystem;
    if (spec.fps <= 0.0)
        raise(ErrorCode::BadInput, "fps must be > 0");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        raise(ErrorCode::IoFailure, "cannot create " + out_dir + ": " + ec.message());

    SessionTruth truth;
    truth.fps = spec.fps;
    int index = 0;
    for (const SessionEvent& event : spec.events) {
        if (event.duration_s <= 0.0)
            raise(ErrorCode::BadInput, "event durations must be positive");
        const int frames = static_cast<int>(std::ceil(event.duration_s * spec.fps));
        const BrowserTemplate* browser = nullptr;
        if (event.browser_id != "none") {
            for (const auto& bt : manifest.templates)
                if (bt.browser_id == event.browser_id)
                    browser = &bt;
            if (!browser)
                raise(ErrorCode::BadInput, "event browser '" + event.browser_id +
                                               "' is not in the manifest");
        }
        for (int k = 0; k < frames; ++k, ++index) {
            char name[32];
            std::snprintf(name, sizeof(name), "f_%06d.png", index);
            const std::string path = (fs::path(out_dir) / name).string();
            const std::uint64_t frame_seed = spec.seed + 0x100000001ULL * index;
            if (browser) {
                auto [frame, gt] = render_frame(event.domain, *browser, spec.noise_sigma,
                                                frame_seed, spec.frame_width, spec.frame_height,
                                                spec.text_scale);
                save_png(path, frame);
                truth.frames.push_back({index, gt.domain, event.browser_id});
            } else {
                save_png(path, render_desktop_frame(spec.noise_sigma, frame_seed, spec.frame_width,
                                                    spec.frame_height));
                truth.frames.push_back({index, "", "none"});
            }
        }
    }

    nlohmann::json doc;
    doc["fps"] = truth.fps;
    doc["frames"] = nlohmann::json::array();
    for (const TruthFrame& f : truth.frames)
        doc["frames"].push_back({{"index", f.index}, {"domain", f.domain}, {"browser", f.browser_id}});

    const std::string truth_path = (fs::path(out_dir) / "truth.json").string();
    std::ofstream out(truth_path);
    if (!out || !(out << doc.dump(2) << "\n"))
        raise(ErrorCode::IoFailure, "cannot write " + truth_path);
    return truth_path;
}

/// Drop the builtin template PNGs and a manifest.json next to a session
/// so the extract command can run on it directly. Returns the manifest
/// path.
inline std::string write_builtin_manifest(const std::string& out_dir) {
    namespace fs = std::filesystem;
    const TemplateManifest manifest = builtin_manifest();
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "templates", ec);
    if (ec)
        raise(ErrorCode::IoFailure, "cannot create " + out_dir + ": " + ec.message());

    nlohmann::json doc;
    doc["threshold"] = manifest.threshold;
    doc["templates"] = nlohmann::json::array();
    for (const auto& bt : manifest.templates) {
        const std::string rel = "templates/" + bt.browser_id + ".png";
        save_png((fs::path(out_dir) / rel).string(), bt.image);
        nlohmann::json off{{"dx", bt.field.dx},
                           {"dy", bt.field.dy},
                           {"height", bt.field.height}};
        if (bt.field.to_right_edge)
            off["width"] = "to-right-edge";
        else
            off["width"] = bt.field.width;
        doc["templates"].push_back(
            {{"browser_id", bt.browser_id}, {"template_path", rel}, {"url_field_offset", off}});
    }
    const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
    std::ofstream out(manifest_path);
    if (!out || !(out << doc.dump(2) << "\n"))
        raise(ErrorCode::IoFailure, "cannot write " + manifest_path);
    return manifest_path;
}

} // namespace urltrace

#endif // URLTRACE_SYNTH_HPP
