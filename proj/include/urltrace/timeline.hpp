#ifndef URLTRACE_TIMELINE_HPP
#define URLTRACE_TIMELINE_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "urltrace/error.hpp"
#include "urltrace/postprocess.hpp"

namespace urltrace {

inline constexpr std::string_view kNoBrowserDomain = "(no-browser)";
inline constexpr std::string_view kUnreadableDomain = "(unreadable)";

struct DwellEntry {
    std::string domain;
    double seconds = 0.0;
    int frame_count = 0;

    bool operator==(const DwellEntry& other) const = default;
};

/// Dwell distribution: resolvable domains sorted by seconds descending
/// (ties alphabetical), with unresolvable frames tallied separately under
/// the reserved pseudo-domains.
struct DwellReport {
    std::vector<DwellEntry> domains;
    DwellEntry no_browser{std::string(kNoBrowserDomain), 0.0, 0};
    DwellEntry unreadable{std::string(kUnreadableDomain), 0.0, 0};
    double total_seconds = 0.0;

    /// Domain rows followed by whichever pseudo rows are non-empty.
    std::vector<DwellEntry> all_rows() const {
        std::vector<DwellEntry> rows = domains;
        if (no_browser.frame_count > 0)
            rows.push_back(no_browser);
        if (unreadable.frame_count > 0)
            rows.push_back(unreadable);
        return rows;
    }
};

struct PathSegment {
    std::string domain;
    double start_s = 0.0;
    double end_s = 0.0;

    bool operator==(const PathSegment& other) const = default;
};

inline DwellReport aggregate_dwell(const std::vector<UrlRecord>& records, double fps) {
    if (fps <= 0.0)
        raise(ErrorCode::BadInput, "fps must be > 0");
    DwellReport report;
    std::map<std::string, int> counts;
    for (const UrlRecord& rec : records) {
        if (rec.has_domain())
            ++counts[rec.domain];
        else if (rec.status == RecordStatus::NoBrowser)
            ++report.no_browser.frame_count;
        else
            ++report.unreadable.frame_count;
    }
    for (const auto& [domain, count] : counts)
        report.domains.push_back({domain, count / fps, count});
    std::sort(report.domains.begin(), report.domains.end(),
              [](const DwellEntry& a, const DwellEntry& b) {
                  if (a.frame_count != b.frame_count)
                      return a.frame_count > b.frame_count;
                  return a.domain < b.domain;
              });
    report.no_browser.seconds = report.no_browser.frame_count / fps;
    report.unreadable.seconds = report.unreadable.frame_count / fps;
    report.total_seconds = static_cast<double>(records.size()) / fps;
    return report;
}

/// Run-length encode the resolvable frames. Unresolvable frames sitting
/// inside a run of one domain are absorbed when the gap is short; longer
/// gaps split the run. A segment's end_s is its last resolvable frame.
inline std::vector<PathSegment> path_segments(const std::vector<UrlRecord>& records,
                                              int max_gap_frames = 2) {
    std::vector<PathSegment> segments;
    bool open = false;
    PathSegment current;
    int last_index = 0;
    for (int i = 0; i < static_cast<int>(records.size()); ++i) {
        const UrlRecord& rec = records[i];
        if (!rec.has_domain())
            continue;
        const int gap = i - last_index - 1;
        if (open && rec.domain == current.domain && gap <= max_gap_frames) {
            current.end_s = rec.timestamp_s;
        } else {
            if (open)
                segments.push_back(current);
            current = {rec.domain, rec.timestamp_s, rec.timestamp_s};
            open = true;
        }
        last_index = i;
    }
    if (open)
        segments.push_back(current);
    return segments;
}

namespace detail {

/// Shortest round-trip decimal form, "3" not "3.000000".
inline std::string fmt_num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline constexpr std::array<std::string_view, 8> kPalette = {
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759",
    "#b07aa1", "#76b7b2", "#edc948", "#9c755f",
};

inline double parse_num(std::string_view text, int line_no, const std::string& what) {
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        raise(ErrorCode::BadInput,
              "line " + std::to_string(line_no) + ": bad " + what + " '" + std::string(text) + "'");
    return value;
}

} // namespace detail

/// Horizontal bar chart of dwell seconds, one row per entry. Bar lengths
/// are 100 user units per second, so byte output is a pure function of
/// the entries.
inline std::string render_dwell_svg(const std::vector<DwellEntry>& entries) {
    std::ostringstream svg;
    const double label_w = 260.0, value_w = 140.0, row_h = 30.0, top = 40.0;
    double max_sec = 0.0;
    for (const DwellEntry& e : entries)
        max_sec = std::max(max_sec, e.seconds);
    const double vb_w = label_w + 100.0 * max_sec + value_w;
    const double vb_h = top + row_h * std::max<std::size_t>(entries.size(), 1) + 20.0;

    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" viewBox=\"0 0 "
        << detail::fmt_num(vb_w) << " " << detail::fmt_num(vb_h) << "\">\n";
    svg << "<text x=\"10\" y=\"24\" font-size=\"16\" font-family=\"sans-serif\">"
           "Dwell time by domain (seconds)</text>\n";
    if (entries.empty()) {
        svg << "<text x=\"10\" y=\"" << detail::fmt_num(top + 20.0)
            << "\" font-size=\"14\" font-family=\"sans-serif\">no data</text>\n";
    } else {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const DwellEntry& e = entries[i];
            const double y = top + row_h * static_cast<double>(i);
            const double bar_w = 100.0 * e.seconds;
            svg << "<text x=\"10\" y=\"" << detail::fmt_num(y + 19.0)
                << "\" font-size=\"13\" font-family=\"monospace\">" << e.domain << "</text>\n";
            svg << "<rect x=\"" << detail::fmt_num(label_w) << "\" y=\"" << detail::fmt_num(y + 6.0)
                << "\" width=\"" << detail::fmt_num(bar_w) << "\" height=\"18\" fill=\""
                << detail::kPalette[i % detail::kPalette.size()] << "\"/>\n";
            svg << "<text x=\"" << detail::fmt_num(label_w + bar_w + 8.0) << "\" y=\""
                << detail::fmt_num(y + 19.0) << "\" font-size=\"13\" font-family=\"monospace\">"
                << detail::fmt_num(e.seconds) << "s / " << e.frame_count << "f</text>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

/// Timeline of path segments, one lane per domain in first-visit order,
/// x extents at 100 user units per second.
inline std::string render_path_svg(const std::vector<PathSegment>& segments) {
    std::ostringstream svg;
    const double label_w = 260.0, lane_h = 30.0, top = 40.0;

    std::vector<std::string> lanes;
    double end_max = 0.0;
    for (const PathSegment& s : segments) {
        if (std::find(lanes.begin(), lanes.end(), s.domain) == lanes.end())
            lanes.push_back(s.domain);
        end_max = std::max(end_max, s.end_s);
    }
    const double vb_w = label_w + 100.0 * end_max + 120.0;
    const double vb_h = top + lane_h * std::max<std::size_t>(lanes.size(), 1) + 40.0;

    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" viewBox=\"0 0 "
        << detail::fmt_num(vb_w) << " " << detail::fmt_num(vb_h) << "\">\n";
    svg << "<text x=\"10\" y=\"24\" font-size=\"16\" font-family=\"sans-serif\">"
           "Browsing path (seconds since session start)</text>\n";
    if (segments.empty()) {
        svg << "<text x=\"10\" y=\"" << detail::fmt_num(top + 20.0)
            << "\" font-size=\"14\" font-family=\"sans-serif\">no data</text>\n";
    } else {
        for (std::size_t i = 0; i < lanes.size(); ++i) {
            const double y = top + lane_h * static_cast<double>(i);
            svg << "<text x=\"10\" y=\"" << detail::fmt_num(y + 19.0)
                << "\" font-size=\"13\" font-family=\"monospace\">" << lanes[i] << "</text>\n";
        }
        for (const PathSegment& s : segments) {
            const std::size_t lane =
                std::find(lanes.begin(), lanes.end(), s.domain) - lanes.begin();
            const double y = top + lane_h * static_cast<double>(lane);
            svg << "<rect x=\"" << detail::fmt_num(label_w + 100.0 * s.start_s) << "\" y=\""
                << detail::fmt_num(y + 6.0) << "\" width=\""
                << detail::fmt_num(100.0 * (s.end_s - s.start_s)) << "\" height=\"18\" fill=\""
                << detail::kPalette[lane % detail::kPalette.size()] << "\"/>\n";
        }
        const double axis_y = top + lane_h * static_cast<double>(lanes.size()) + 14.0;
        svg << "<line x1=\"" << detail::fmt_num(label_w) << "\" y1=\"" << detail::fmt_num(axis_y)
            << "\" x2=\"" << detail::fmt_num(label_w + 100.0 * end_max) << "\" y2=\""
            << detail::fmt_num(axis_y) << "\" stroke=\"#333333\"/>\n";
        svg << "<text x=\"" << detail::fmt_num(label_w) << "\" y=\""
            << detail::fmt_num(axis_y + 16.0)
            << "\" font-size=\"12\" font-family=\"monospace\">0</text>\n";
        svg << "<text x=\"" << detail::fmt_num(label_w + 100.0 * end_max) << "\" y=\""
            << detail::fmt_num(axis_y + 16.0) << "\" font-size=\"12\" font-family=\"monospace\">"
            << detail::fmt_num(end_max) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

// ---------------------------------------------------------------------------
// File formats: records JSONL, dwell CSV, path CSV.

inline nlohmann::json record_to_json(const UrlRecord& rec) {
    return nlohmann::json{{"t", rec.timestamp_s}, {"browser", rec.browser_id},
                          {"raw", rec.raw_text},  {"cleaned", rec.cleaned_url},
                          {"domain", rec.domain}, {"status", record_status_name(rec.status)}};
}

inline void write_records_jsonl(std::ostream& out, const std::vector<UrlRecord>& records) {
    for (const UrlRecord& rec : records)
        out << record_to_json(rec).dump() << "\n";
}

inline std::vector<UrlRecord> read_records_jsonl(std::istream& in) {
    std::vector<UrlRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
            UrlRecord rec;
            rec.timestamp_s = doc.at("t").get<double>();
            rec.browser_id = doc.at("browser").get<std::string>();
            rec.raw_text = doc.at("raw").get<std::string>();
            rec.cleaned_url = doc.at("cleaned").get<std::string>();
            rec.domain = doc.at("domain").get<std::string>();
            const auto status = record_status_from_name(doc.at("status").get<std::string>());
            if (!status)
                raise(ErrorCode::BadInput, "unknown status");
            rec.status = *status;
            records.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::BadInput,
                  "malformed record at line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error&) {
            raise(ErrorCode::BadInput, "malformed record at line " + std::to_string(line_no));
        }
    }
    return records;
}

inline std::string dwell_csv(const DwellReport& report) {
    std::ostringstream out;
    out << "domain,seconds,frames\n";
    for (const DwellEntry& e : report.all_rows())
        out << e.domain << "," << detail::fmt_num(e.seconds) << "," << e.frame_count << "\n";
    return out.str();
}

inline std::string path_csv(const std::vector<PathSegment>& segments) {
    std::ostringstream out;
    out << "domain,start_s,end_s\n";
    for (const PathSegment& s : segments)
        out << s.domain << "," << detail::fmt_num(s.start_s) << "," << detail::fmt_num(s.end_s)
            << "\n";
    return out.str();
}

inline std::vector<DwellEntry> read_dwell_csv(std::istream& in) {
    std::vector<DwellEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line != "domain,seconds,frames")
                raise(ErrorCode::BadInput, "line 1: expected dwell CSV header");
            continue;
        }
        if (line.empty())
            continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            raise(ErrorCode::BadInput, "line " + std::to_string(line_no) + ": expected 3 columns");
        DwellEntry e;
        e.domain = line.substr(0, c1);
        e.seconds = detail::parse_num(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), line_no,
                                      "seconds");
        e.frame_count = static_cast<int>(
            detail::parse_num(std::string_view(line).substr(c2 + 1), line_no, "frames"));
        entries.push_back(std::move(e));
    }
    return entries;
}

inline std::vector<PathSegment> read_path_csv(std::istream& in) {
    std::vector<PathSegment> segments;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line != "domain,start_s,end_s")
                raise(ErrorCode::BadInput, "line 1: expected path CSV header");
            continue;
        }
        if (line.empty())
            continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            raise(ErrorCode::BadInput, "line " + std::to_string(line_no) + ": expected 3 columns");
        PathSegment s;
        s.domain = line.substr(0, c1);
        s.start_s = detail::parse_num(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), line_no,
                                      "start_s");
        s.end_s = detail::parse_num(std::string_view(line).substr(c2 + 1), line_no, "end_s");
        segments.push_back(std::move(s));
    }
    return segments;
}

} // namespace urltrace

#endif // URLTRACE_TIMELINE_HPP
