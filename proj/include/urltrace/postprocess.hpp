#ifndef URLTRACE_POSTPROCESS_HPP
#define URLTRACE_POSTPROCESS_HPP

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "urltrace/error.hpp"

namespace urltrace {

enum class RecordStatus { Ok, NoBrowser, OcrFailed, Unparseable, Smoothed };

inline const char* record_status_name(RecordStatus s) {
    switch (s) {
    case RecordStatus::Ok: return "ok";
    case RecordStatus::NoBrowser: return "no_browser";
    case RecordStatus::OcrFailed: return "ocr_failed";
    case RecordStatus::Unparseable: return "unparseable";
    case RecordStatus::Smoothed: return "smoothed";
    }
    return "unparseable";
}

inline std::optional<RecordStatus> record_status_from_name(std::string_view name) {
    if (name == "ok") return RecordStatus::Ok;
    if (name == "no_browser") return RecordStatus::NoBrowser;
    if (name == "ocr_failed") return RecordStatus::OcrFailed;
    if (name == "unparseable") return RecordStatus::Unparseable;
    if (name == "smoothed") return RecordStatus::Smoothed;
    return std::nullopt;
}

/// Per-frame extraction result. A record always exists for every frame;
/// status says how far the pipeline got.
struct UrlRecord {
    double timestamp_s = 0.0;
    std::string browser_id = "none";
    std::string raw_text;
    std::string cleaned_url;
    std::string domain;
    RecordStatus status = RecordStatus::Unparseable;

    bool has_domain() const {
        return status == RecordStatus::Ok || status == RecordStatus::Smoothed;
    }

    bool operator==(const UrlRecord& other) const = default;
};

namespace detail {

inline bool is_url_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           std::string_view(".-_~:/?#@%&=+").find(c) != std::string_view::npos;
}

inline bool is_host_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

} // namespace detail

/// Scrub raw OCR output: lowercase, drop everything outside the URL
/// alphabet (lock signs, desktop text, stray punctuation), collapse '.'
/// runs, and trim to the first/last alphanumeric.
inline std::string clean_ocr_text(std::string_view raw) {
    std::string kept;
    kept.reserve(raw.size());
    for (char c : raw) {
        const char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (!detail::is_url_char(lc))
            continue;
        if (lc == '.' && !kept.empty() && kept.back() == '.')
            continue;
        kept += lc;
    }
    const auto first = std::find_if(kept.begin(), kept.end(), detail::is_host_alnum);
    const auto last = std::find_if(kept.rbegin(), kept.rend(), detail::is_host_alnum);
    if (first == kept.end())
        return "";
    return std::string(first, last.base());
}

/// Host part of a cleaned URL before any validation: scheme stripped,
/// cut at the first path/query/fragment/port delimiter, one leading
/// "www." removed.
inline std::string host_candidate(std::string_view cleaned) {
    if (cleaned.starts_with("http://"))
        cleaned.remove_prefix(7);
    else if (cleaned.starts_with("https://"))
        cleaned.remove_prefix(8);
    const std::size_t cut = cleaned.find_first_of("/?#:");
    std::string_view host = cleaned.substr(0, cut);
    if (host.starts_with("www."))
        host.remove_prefix(4);
    return std::string(host);
}

/// Accept the host only if it is a dotted sequence of at least two
/// labels, each [a-z0-9-]+ without leading/trailing '-'.
inline std::optional<std::string> extract_domain(std::string_view cleaned) {
    const std::string host = host_candidate(cleaned);
    if (host.empty())
        return std::nullopt;
    int labels = 0;
    std::size_t start = 0;
    while (start <= host.size()) {
        std::size_t end = host.find('.', start);
        if (end == std::string::npos)
            end = host.size();
        const std::string_view label(host.data() + start, end - start);
        if (label.empty() || label.front() == '-' || label.back() == '-')
            return std::nullopt;
        for (char c : label)
            if (!detail::is_host_alnum(c) && c != '-')
                return std::nullopt;
        ++labels;
        start = end + 1;
        if (end == host.size())
            break;
    }
    if (labels < 2)
        return std::nullopt;
    return host;
}

inline int levenshtein(std::string_view a, std::string_view b) {
    if (a.size() < b.size())
        std::swap(a, b);
    std::vector<int> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j)
        row[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        int diag = row[0];
        row[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const int sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            diag = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
        }
    }
    return row[b.size()];
}

struct SmoothParams {
    int radius = 2;
    int max_edit = 2;
    int min_support = 2;
};

/// Repair per-frame glitches from neighboring frames: an unparseable
/// record, or an ok record disagreeing with both adjacent frames, takes
/// the majority domain of its +-radius window when that majority has
/// enough supporters and is within max_edit of what the frame read.
/// Decisions are made against the input snapshot, never against already
/// repaired records; no_browser frames are left alone.
inline std::vector<UrlRecord> consensus_smooth(const std::vector<UrlRecord>& records,
                                               const SmoothParams& params = {}) {
    std::vector<UrlRecord> out = records;
    const int n = static_cast<int>(records.size());

    const auto domain_at = [&](int idx) -> std::string_view {
        if (idx < 0 || idx >= n || !records[idx].has_domain())
            return {};
        return records[idx].domain;
    };

    for (int i = 0; i < n; ++i) {
        const UrlRecord& rec = records[i];
        const bool outlier_ok = rec.status == RecordStatus::Ok &&
                                domain_at(i - 1) != rec.domain &&
                                domain_at(i + 1) != rec.domain;
        if (rec.status != RecordStatus::Unparseable && !outlier_ok)
            continue;

        // Majority vote over the window, self excluded; ties go to the
        // lexicographically smallest domain for determinism.
        std::vector<std::pair<std::string_view, int>> votes;
        for (int j = std::max(0, i - params.radius); j <= std::min(n - 1, i + params.radius); ++j) {
            if (j == i)
                continue;
            const std::string_view d = domain_at(j);
            if (d.empty())
                continue;
            auto it = std::find_if(votes.begin(), votes.end(),
                                   [&](const auto& v) { return v.first == d; });
            if (it == votes.end())
                votes.emplace_back(d, 1);
            else
                ++it->second;
        }
        std::string_view majority;
        int support = 0;
        for (const auto& [d, count] : votes)
            if (count > support || (count == support && d < majority)) {
                majority = d;
                support = count;
            }
        if (support < params.min_support || majority.empty() || majority == rec.domain)
            continue;

        const std::string candidate =
            !rec.domain.empty() ? rec.domain : host_candidate(rec.cleaned_url);
        if (levenshtein(candidate, majority) > params.max_edit)
            continue;

        out[i].domain = std::string(majority);
        out[i].status = RecordStatus::Smoothed;
    }
    return out;
}

} // namespace urltrace

#endif // URLTRACE_POSTPROCESS_HPP
