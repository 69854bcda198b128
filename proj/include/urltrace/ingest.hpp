#ifndef URLTRACE_INGEST_HPP
#define URLTRACE_INGEST_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "urltrace/error.hpp"
#include "urltrace/image.hpp"
#include "urltrace/png_io.hpp"

namespace urltrace {

/// One frame of a recorded session: the file on disk plus its position in
/// the sampled sequence. timestamp_s is always index / fps.
struct FrameRef {
    std::string path;
    int index = 0;
    double timestamp_s = 0.0;

    bool operator==(const FrameRef& other) const = default;
};

/// Natural filename order: digit runs compare as numbers, so f_2 < f_10.
inline bool natural_less(const std::string& a, const std::string& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const unsigned char ca = a[i], cb = b[j];
        if (std::isdigit(ca) && std::isdigit(cb)) {
            std::size_t ia = i, jb = j;
            while (ia < a.size() && std::isdigit(static_cast<unsigned char>(a[ia]))) ++ia;
            while (jb < b.size() && std::isdigit(static_cast<unsigned char>(b[jb]))) ++jb;
            std::size_t sa = i, sb = j;
            while (sa < ia - 1 && a[sa] == '0') ++sa; // skip leading zeros
            while (sb < jb - 1 && b[sb] == '0') ++sb;
            const std::size_t la = ia - sa, lb = jb - sb;
            if (la != lb) return la < lb;
            const int cmp = a.compare(sa, la, b, sb, lb);
            if (cmp != 0) return cmp < 0;
            // Same numeric value; fewer leading zeros sorts first.
            if (ia - i != jb - j) return ia - i < jb - j;
            i = ia;
            j = jb;
        } else {
            if (ca != cb) return ca < cb;
            ++i;
            ++j;
        }
    }
    return a.size() - i < b.size() - j;
}

/// Shell-style filename glob supporting '*' and '?'.
inline bool glob_match(const std::string& pattern, const std::string& name) {
    std::size_t p = 0, n = 0, star = std::string::npos, mark = 0;
    while (n < name.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
            ++p;
            ++n;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = n;
        } else if (star != std::string::npos) {
            p = star + 1;
            n = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

/// Enumerate a session's frames in natural filename order and assign
/// timestamps at index / fps.
inline std::vector<FrameRef> list_frames(const std::string& dir,
                                         const std::string& glob = "*.png",
                                         double fps = 1.0) {
    namespace fs = std::filesystem;
    if (fps <= 0.0)
        raise(ErrorCode::BadInput, "fps must be > 0");
    if (!fs::is_directory(dir))
        raise(ErrorCode::EmptySession, "not a directory: " + dir);

    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (!glob_match(glob, name))
            continue;
        if (!entry.is_regular_file())
            raise(ErrorCode::NonImageFile, entry.path().string());
        names.push_back(name);
    }
    if (names.empty())
        raise(ErrorCode::EmptySession, "no frames matching '" + glob + "' in " + dir);

    std::sort(names.begin(), names.end(), natural_less);

    std::vector<FrameRef> frames;
    frames.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i)
        frames.push_back({(fs::path(dir) / names[i]).string(), static_cast<int>(i),
                          static_cast<double>(i) / fps});
    return frames;
}

/// Keep the top `fraction` of an image's rows. Height uses floor with a
/// tiny epsilon so rational fractions like 1/3 hit exact row counts, and
/// never drops below one row.
inline RgbImage crop_top(const RgbImage& img, double fraction = 1.0 / 3.0) {
    if (fraction <= 0.0 || fraction > 1.0)
        raise(ErrorCode::BadInput, "crop fraction must be in (0, 1]");
    int out_h = static_cast<int>(std::floor(img.height * fraction + 1e-9));
    out_h = std::clamp(out_h, 1, img.height);
    RgbImage out(img.width, out_h);
    std::copy_n(img.pixels.begin(), static_cast<std::size_t>(img.width) * out_h * 3,
                out.pixels.begin());
    return out;
}

inline RgbImage load_and_crop_top(const FrameRef& frame, double fraction = 1.0 / 3.0) {
    return crop_top(load_png_rgb(frame.path), fraction);
}

} // namespace urltrace

#endif // URLTRACE_INGEST_HPP
