#ifndef URLTRACE_OCR_HPP
#define URLTRACE_OCR_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "urltrace/error.hpp"
#include "urltrace/font5x7.hpp"
#include "urltrace/image.hpp"
#include "urltrace/png_io.hpp"

namespace urltrace {

struct OcrResult {
    std::string text;
    std::string engine_id;
    bool ok = false;
};

enum class EngineKind { Stub, External };

/// OCR engine selection. The external engine is invoked per image as
/// `<executable> <image-path> <output-base> [extra_args...]` and must
/// write `<output-base>.txt`; cmd_template rearranges the positional
/// part when an engine needs a different shape.
struct EngineConfig {
    EngineKind kind = EngineKind::Stub;
    std::string executable;
    std::vector<std::string> extra_args = {"--psm", "7"}; // single text line
    double timeout_s = 30.0;
    std::string cmd_template = "{exe} {image} {outbase}";
    unsigned max_concurrency = std::thread::hardware_concurrency();
};

namespace detail {

struct InkGrid {
    int width = 0;
    int height = 0;
    std::vector<std::int32_t> integral; // (w+1) x (h+1) ink counts

    /// Ink pixels inside [x0,x1) x [y0,y1), clipped; outside counts 0.
    int count(int x0, int y0, int x1, int y1) const {
        x0 = std::clamp(x0, 0, width);
        x1 = std::clamp(x1, 0, width);
        y0 = std::clamp(y0, 0, height);
        y1 = std::clamp(y1, 0, height);
        if (x1 <= x0 || y1 <= y0)
            return 0;
        const auto at = [&](int x, int y) {
            return integral[static_cast<std::size_t>(y) * (width + 1) + x];
        };
        return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
    }
};

inline InkGrid binarize_ink(const GrayImage& img) {
    InkGrid grid;
    grid.width = img.width;
    grid.height = img.height;
    grid.integral.assign(static_cast<std::size_t>(img.width + 1) * (img.height + 1), 0);
    for (int y = 0; y < img.height; ++y) {
        std::int32_t row = 0;
        for (int x = 0; x < img.width; ++x) {
            row += img.at(x, y) < 128 ? 1 : 0;
            grid.integral[static_cast<std::size_t>(y + 1) * (img.width + 1) + x + 1] =
                grid.integral[static_cast<std::size_t>(y) * (img.width + 1) + x + 1] + row;
        }
    }
    return grid;
}

struct CellDecode {
    char ch = '?';
    double dist = 1.0; // best normalized mismatch
};

/// Classify one glyph cell whose grid top-left is (cx, cy) at scale s.
/// The compared area is the 5-column glyph plus the blank pitch column;
/// mismatch is normalized by the full cell area.
inline CellDecode classify_cell(const InkGrid& ink, int cx, int cy, int s) {
    int counts[kGlyphHeight][kGlyphPitch];
    for (int gy = 0; gy < kGlyphHeight; ++gy)
        for (int gx = 0; gx < kGlyphPitch; ++gx)
            counts[gy][gx] = ink.count(cx + gx * s, cy + gy * s, cx + (gx + 1) * s, cy + (gy + 1) * s);

    const int block = s * s;
    const double cell_area = static_cast<double>(kGlyphHeight) * kGlyphPitch * block;
    CellDecode best;
    best.dist = std::numeric_limits<double>::infinity();
    for (const Glyph& g : kFont5x7) {
        int mismatch = 0;
        for (int gy = 0; gy < kGlyphHeight; ++gy) {
            for (int gx = 0; gx < kGlyphWidth; ++gx)
                mismatch += glyph_pixel(g, gx, gy) ? block - counts[gy][gx] : counts[gy][gx];
            mismatch += counts[gy][kGlyphWidth]; // pitch column expects background
        }
        const double d = mismatch / cell_area;
        if (d < best.dist) {
            best.dist = d;
            best.ch = g.ch;
        }
    }
    return best;
}

struct GridDecode {
    std::string text;
    double mean_cost = std::numeric_limits<double>::infinity();
};

inline GridDecode decode_grid(const InkGrid& ink, int x0, int y0, int s, int bbox_right) {
    GridDecode out;
    out.mean_cost = 0.0;
    int cells = 0;
    for (int cx = x0; cx <= bbox_right; cx += kGlyphPitch * s, ++cells) {
        const CellDecode cell = classify_cell(ink, cx, y0, s);
        // Rejected cells cost exactly the reject bound, so one garbled
        // cell cannot make a misaligned sparse grid look cheaper.
        if (cell.dist > 0.40) {
            out.text += '?';
            out.mean_cost += 0.40;
        } else {
            out.text += cell.ch;
            out.mean_cost += cell.dist;
        }
    }
    out.mean_cost = cells > 0 ? out.mean_cost / cells : std::numeric_limits<double>::infinity();
    return out;
}

} // namespace detail

/// Deterministic test-double recognizer for fields rendered in the
/// built-in 5x7 font. Binarizes at 128, locates the glyph grid (scale and
/// origin are recovered by searching the candidates consistent with the
/// ink bounding box), then classifies each fixed-pitch cell by minimum
/// Hamming distance; cells more than 40% of the cell area away from every
/// glyph come out as '?'.
inline std::string stub_recognize(const GrayImage& field) {
    const detail::InkGrid ink = detail::binarize_ink(field);

    int left = field.width, right = -1, top = field.height, bottom = -1;
    for (int y = 0; y < field.height; ++y)
        for (int x = 0; x < field.width; ++x)
            if (ink.count(x, y, x + 1, y + 1) > 0) {
                left = std::min(left, x);
                right = std::max(right, x);
                top = std::min(top, y);
                bottom = std::max(bottom, y);
            }
    if (right < 0)
        return ""; // no glyphs

    detail::GridDecode best;
    int best_scale = 0;
    const int max_scale = std::max(1, field.height / kGlyphHeight);
    for (int s = 1; s <= max_scale; ++s) {
        // Any glyph's topmost ink row lies in [0, 6] of its cell and its
        // leftmost ink column in [0, 4], which bounds the grid origin.
        for (int ky = 0; ky < kGlyphHeight; ++ky) {
            const int y0 = top - ky * s;
            if (y0 + kGlyphHeight * s <= bottom)
                continue; // the glyph row must contain all ink
            for (int kx = 0; kx < kGlyphWidth; ++kx) {
                const int x0 = left - kx * s;
                const detail::GridDecode candidate = detail::decode_grid(ink, x0, y0, s, right);
                const bool better =
                    candidate.mean_cost < best.mean_cost - 1e-12 ||
                    (candidate.mean_cost < best.mean_cost + 1e-12 && s > best_scale);
                if (better) {
                    best = candidate;
                    best_scale = s;
                }
            }
        }
    }
    return best.text;
}

namespace detail {

struct ProcessOutcome {
    bool spawn_failed = false;
    bool timed_out = false;
    int exit_code = -1;
};

inline ProcessOutcome run_process(const std::vector<std::string>& argv, double timeout_s) {
    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const auto& a : argv)
        cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    const pid_t pid = ::fork();
    ProcessOutcome out;
    if (pid < 0) {
        out.spawn_failed = true;
        return out;
    }
    if (pid == 0) {
        const int devnull = ::open("/dev/null", O_WRONLY);
        if (devnull >= 0) {
            ::dup2(devnull, STDOUT_FILENO);
            ::dup2(devnull, STDERR_FILENO);
            ::close(devnull);
        }
        ::execvp(cargv[0], cargv.data());
        ::_exit(127);
    }

    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(timeout_s));
    int status = 0;
    for (;;) {
        const pid_t done = ::waitpid(pid, &status, WNOHANG);
        if (done == pid)
            break;
        if (std::chrono::steady_clock::now() >= deadline) {
            ::kill(pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            out.timed_out = true;
            return out;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (WIFEXITED(status))
        out.exit_code = WEXITSTATUS(status);
    return out;
}

/// Expand "{exe} {image} {outbase}" style templates into argv tokens.
inline std::vector<std::string> expand_cmd_template(const std::string& cmd_template,
                                                    const std::string& exe,
                                                    const std::string& image,
                                                    const std::string& outbase) {
    std::vector<std::string> argv;
    std::string token;
    const auto flush = [&] {
        if (token.empty())
            return;
        std::string expanded;
        for (std::size_t i = 0; i < token.size();) {
            if (token.compare(i, 5, "{exe}") == 0) {
                expanded += exe;
                i += 5;
            } else if (token.compare(i, 7, "{image}") == 0) {
                expanded += image;
                i += 7;
            } else if (token.compare(i, 9, "{outbase}") == 0) {
                expanded += outbase;
                i += 9;
            } else {
                expanded += token[i++];
            }
        }
        argv.push_back(std::move(expanded));
        token.clear();
    };
    for (char c : cmd_template) {
        if (c == ' ')
            flush();
        else
            token += c;
    }
    flush();
    return argv;
}

struct TempOcrFiles {
    std::filesystem::path base;
    ~TempOcrFiles() {
        std::error_code ec;
        std::filesystem::remove(png(), ec);
        std::filesystem::remove(txt(), ec);
    }
    std::filesystem::path png() const { return base.string() + ".png"; }
    std::filesystem::path txt() const { return base.string() + ".txt"; }
};

inline std::filesystem::path make_temp_base() {
    static std::atomic<std::uint64_t> counter{0};
    return std::filesystem::temp_directory_path() /
           ("urltrace-ocr-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter.fetch_add(1)));
}

inline std::string trim_engine_text(std::string text) {
    for (char& c : text)
        if (c == '\n' || c == '\r' || c == '\t')
            c = ' ';
    while (!text.empty() && text.back() == ' ')
        text.pop_back();
    return text;
}

} // namespace detail

/// Run one field image through the configured engine. Engine trouble
/// (missing executable, timeout, nonzero exit) never escapes: it comes
/// back as ok = false with empty text.
class OcrEngine {
public:
    explicit OcrEngine(EngineConfig cfg)
        : cfg_(std::move(cfg)),
          sem_(std::max(1u, cfg_.max_concurrency == 0 ? 1u : cfg_.max_concurrency)) {}

    const EngineConfig& config() const { return cfg_; }

    OcrResult recognize(const GrayImage& field) {
        OcrResult result;
        result.engine_id = cfg_.kind == EngineKind::Stub
                               ? "stub"
                               : std::filesystem::path(cfg_.executable).stem().string();
        if (field.width < 8 || field.height < 8)
            return result; // too small for any engine

        if (cfg_.kind == EngineKind::Stub) {
            result.text = stub_recognize(field);
            result.ok = true;
            return result;
        }

        if (cfg_.executable.empty() || !std::filesystem::exists(cfg_.executable) ||
            ::access(cfg_.executable.c_str(), X_OK) != 0)
            return result; // EngineMissing

        sem_.acquire();
        struct Release {
            std::counting_semaphore<1024>& sem;
            ~Release() { sem.release(); }
        } release{sem_};

        detail::TempOcrFiles tmp{detail::make_temp_base()};
        try {
            save_png(tmp.png().string(), field);
        } catch (const Error&) {
            return result;
        }

        std::vector<std::string> argv = detail::expand_cmd_template(
            cfg_.cmd_template, cfg_.executable, tmp.png().string(), tmp.base.string());
        argv.insert(argv.end(), cfg_.extra_args.begin(), cfg_.extra_args.end());

        const detail::ProcessOutcome outcome = detail::run_process(argv, cfg_.timeout_s);
        if (outcome.spawn_failed || outcome.timed_out || outcome.exit_code != 0)
            return result; // EngineFailure / EngineTimeout

        std::ifstream in(tmp.txt());
        if (!in)
            return result;
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        result.text = detail::trim_engine_text(std::move(text));
        result.ok = true;
        return result;
    }

private:
    EngineConfig cfg_;
    std::counting_semaphore<1024> sem_;
};

inline OcrResult recognize(const GrayImage& field, const EngineConfig& cfg) {
    OcrEngine engine(cfg);
    return engine.recognize(field);
}

} // namespace urltrace

#endif // URLTRACE_OCR_HPP
