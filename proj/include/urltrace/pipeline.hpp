#ifndef URLTRACE_PIPELINE_HPP
#define URLTRACE_PIPELINE_HPP

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "urltrace/imgproc.hpp"
#include "urltrace/ingest.hpp"
#include "urltrace/match.hpp"
#include "urltrace/ocr.hpp"
#include "urltrace/parallel.hpp"
#include "urltrace/postprocess.hpp"

namespace urltrace {

/// Everything one extract run needs. Defaults mirror the reference
/// parameters: match threshold 0.8, 3x rescale, NLM 7/21/10, top-1/3
/// crop.
struct RunConfig {
    std::string frames_dir;
    std::string manifest_path;
    std::string frame_glob = "*.png";
    double fps = 1.0;
    double crop_fraction = 1.0 / 3.0;
    int rescale_factor = 3;
    DenoiseParams denoise{};
    std::optional<double> threshold_override; // set -> replaces the manifest's
    EngineConfig ocr{};
    bool smooth = true;
    SmoothParams smooth_params{};
    unsigned jobs = std::thread::hardware_concurrency();
    std::string debug_dir; // non-empty -> dump per-stage field PNGs
};

/// One frame through the §-by-§ chain: crop, grayscale, anchor match,
/// field crop, enhancement, recognition, text cleanup. Any per-frame
/// failure is folded into the record's status; this function never
/// throws for image-level trouble.
inline UrlRecord extract_frame_record(const FrameRef& frame, const TemplateManifest& manifest,
                                      const RunConfig& cfg, OcrEngine& engine) {
    UrlRecord rec;
    rec.timestamp_s = frame.timestamp_s;
    const auto debug_dump = [&](const char* stage, const GrayImage& img) {
        if (cfg.debug_dir.empty())
            return;
        char name[64];
        std::snprintf(name, sizeof(name), "f_%06d_%s.png", frame.index, stage);
        save_png((std::filesystem::path(cfg.debug_dir) / name).string(), img);
    };
    try {
        const GrayImage top = to_grayscale(load_and_crop_top(frame, cfg.crop_fraction));
        const std::optional<MatchResult> match = best_browser_match(top, manifest);
        if (!match) {
            rec.status = RecordStatus::NoBrowser;
            return rec;
        }
        rec.browser_id = match->browser_id;

        GrayImage field = crop_url_field(top, *match, manifest);
        debug_dump("1-field", field);
        field = rescale(field, cfg.rescale_factor);
        debug_dump("2-rescaled", field);
        field = nlm_denoise(field, cfg.denoise);
        debug_dump("3-denoised", field);
        field = sharpen(field);
        debug_dump("4-sharpened", field);

        const OcrResult ocr = engine.recognize(field);
        if (!ocr.ok) {
            rec.status = RecordStatus::OcrFailed;
            return rec;
        }
        rec.raw_text = ocr.text;
        rec.cleaned_url = clean_ocr_text(ocr.text);
        if (auto domain = extract_domain(rec.cleaned_url)) {
            rec.domain = *domain;
            rec.status = RecordStatus::Ok;
        } else {
            rec.status = RecordStatus::Unparseable;
        }
    } catch (const Error&) {
        rec.raw_text.clear();
        rec.cleaned_url.clear();
        rec.domain.clear();
        rec.status = RecordStatus::OcrFailed;
    }
    return rec;
}

/// Full extract stage: every frame yields exactly one record, in
/// timestamp order, with consensus smoothing applied at the end unless
/// disabled.
inline std::vector<UrlRecord> extract_records(const RunConfig& cfg) {
    TemplateManifest manifest = load_manifest(cfg.manifest_path);
    if (cfg.threshold_override)
        manifest.threshold = *cfg.threshold_override;
    validate_manifest(manifest);

    const std::vector<FrameRef> frames = list_frames(cfg.frames_dir, cfg.frame_glob, cfg.fps);
    if (!cfg.debug_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.debug_dir, ec);
        if (ec)
            raise(ErrorCode::IoFailure, "cannot create " + cfg.debug_dir + ": " + ec.message());
    }
    OcrEngine engine(cfg.ocr);

    std::vector<UrlRecord> records(frames.size());
    ordered_parallel_map<UrlRecord>(
        frames.size(), cfg.jobs,
        [&](std::size_t i) { return extract_frame_record(frames[i], manifest, cfg, engine); },
        [&](std::size_t i, UrlRecord&& rec) { records[i] = std::move(rec); });

    if (cfg.smooth)
        records = consensus_smooth(records, cfg.smooth_params);
    return records;
}

} // namespace urltrace

#endif // URLTRACE_PIPELINE_HPP
