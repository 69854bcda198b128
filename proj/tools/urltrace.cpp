// urltrace: turn a directory of screen-capture frames into a per-second
// domain timeline. Subcommands cover the four stages: synth (generate a
// ground-truth session), extract (frames -> records JSONL), aggregate
// (records -> dwell/path CSV), render (CSV -> SVG charts).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "urltrace/pipeline.hpp"
#include "urltrace/synth.hpp"
#include "urltrace/timeline.hpp"

namespace {

using namespace urltrace;

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content))
        raise(ErrorCode::IoFailure, "cannot write " + path);
}

std::string svg_default_name(const std::string& csv_path) {
    const auto dot = csv_path.find_last_of('.');
    const auto slash = csv_path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return csv_path + ".svg";
    return csv_path.substr(0, dot) + ".svg";
}

struct ExtractArgs {
    RunConfig cfg;
    double threshold = 0.8;
    bool threshold_given = false;
    std::string ocr_kind = "stub";
    std::vector<std::string> ocr_args;
    bool ocr_args_given = false;
    bool no_smooth = false;
    bool dump_config = false;
    std::string out = "records.jsonl";
};

nlohmann::json effective_config(const ExtractArgs& args) {
    const RunConfig& cfg = args.cfg;
    return nlohmann::json{
        {"fps", cfg.fps},
        {"crop_fraction", cfg.crop_fraction},
        {"threshold", args.threshold},
        {"rescale", cfg.rescale_factor},
        {"nlm_patch", cfg.denoise.patch_size},
        {"nlm_window", cfg.denoise.search_window},
        {"nlm_h", cfg.denoise.strength_h},
        {"smooth", !args.no_smooth},
        {"smooth_radius", cfg.smooth_params.radius},
        {"smooth_edit", cfg.smooth_params.max_edit},
        {"ocr",
         {{"kind", args.ocr_kind},
          {"executable", cfg.ocr.executable},
          {"timeout_s", cfg.ocr.timeout_s},
          {"cmd_template", cfg.ocr.cmd_template},
          {"extra_args", args.ocr_args_given ? args.ocr_args : cfg.ocr.extra_args}}},
        {"jobs", cfg.jobs},
    };
}

int run_extract(ExtractArgs& args) {
    if (args.dump_config) {
        std::cout << effective_config(args).dump(2) << "\n";
        return 0;
    }
    if (args.cfg.frames_dir.empty() || args.cfg.manifest_path.empty()) {
        std::cerr << "error: extract requires --frames and --manifest\n";
        return 1;
    }
    if (args.threshold_given)
        args.cfg.threshold_override = args.threshold;
    args.cfg.ocr.kind = args.ocr_kind == "external" ? EngineKind::External : EngineKind::Stub;
    if (args.ocr_args_given)
        args.cfg.ocr.extra_args = args.ocr_args;
    args.cfg.smooth = !args.no_smooth;

    const std::vector<UrlRecord> records = extract_records(args.cfg);

    std::ofstream out(args.out, std::ios::binary);
    if (!out)
        raise(ErrorCode::IoFailure, "cannot write " + args.out);
    write_records_jsonl(out, records);
    out.flush();
    if (!out)
        raise(ErrorCode::IoFailure, "cannot write " + args.out);
    std::cout << "wrote " << args.out << " (" << records.size() << " records)\n";
    return 0;
}

struct AggregateArgs {
    std::string records_path;
    double fps = 1.0;
    int path_gap = 2;
    std::string dwell_out = "dwell.csv";
    std::string path_out = "path.csv";
};

int run_aggregate(const AggregateArgs& args) {
    std::ifstream in(args.records_path);
    if (!in)
        raise(ErrorCode::IoFailure, "cannot open " + args.records_path);
    const std::vector<UrlRecord> records = read_records_jsonl(in);
    write_text_file(args.dwell_out, dwell_csv(aggregate_dwell(records, args.fps)));
    write_text_file(args.path_out, path_csv(path_segments(records, args.path_gap)));
    std::cout << "wrote " << args.dwell_out << " and " << args.path_out << " ("
              << records.size() << " records)\n";
    return 0;
}

struct RenderArgs {
    std::string dwell_csv_path;
    std::string path_csv_path;
    std::string dwell_svg_path;
    std::string path_svg_path;
};

int run_render(const RenderArgs& args) {
    if (args.dwell_csv_path.empty() && args.path_csv_path.empty()) {
        std::cerr << "error: render needs --dwell-csv and/or --path-csv\n";
        return 1;
    }
    if (!args.dwell_csv_path.empty()) {
        std::ifstream in(args.dwell_csv_path);
        if (!in)
            raise(ErrorCode::IoFailure, "cannot open " + args.dwell_csv_path);
        const std::string out_path = args.dwell_svg_path.empty()
                                         ? svg_default_name(args.dwell_csv_path)
                                         : args.dwell_svg_path;
        write_text_file(out_path, render_dwell_svg(read_dwell_csv(in)));
        std::cout << "wrote " << out_path << "\n";
    }
    if (!args.path_csv_path.empty()) {
        std::ifstream in(args.path_csv_path);
        if (!in)
            raise(ErrorCode::IoFailure, "cannot open " + args.path_csv_path);
        const std::string out_path = args.path_svg_path.empty()
                                         ? svg_default_name(args.path_csv_path)
                                         : args.path_svg_path;
        write_text_file(out_path, render_path_svg(read_path_csv(in)));
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

struct SynthArgs {
    std::string spec_path;
    std::string out_dir;
    bool no_manifest = false;
};

int run_synth(const SynthArgs& args) {
    const SessionSpec spec = load_session_spec(args.spec_path);
    const std::string truth = generate_session(spec, args.out_dir);
    std::cout << "wrote " << truth << " (" << spec.events.size() << " events)\n";
    if (!args.no_manifest)
        std::cout << "wrote " << write_builtin_manifest(args.out_dir) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Screen-recording URL/domain timeline extractor"};
    app.require_subcommand(1);

    ExtractArgs ex;
    CLI::App* extract = app.add_subcommand(
        "extract", "Read frames, locate the address bar, OCR it, emit records JSONL");
    extract->add_option("--frames", ex.cfg.frames_dir, "Directory of PNG frames");
    extract->add_option("--manifest", ex.cfg.manifest_path, "Browser template manifest JSON");
    extract->add_option("--glob", ex.cfg.frame_glob, "Frame filename pattern")
        ->capture_default_str();
    extract->add_option("--fps", ex.cfg.fps, "Capture rate of the frame sequence")
        ->capture_default_str();
    extract->add_option("--crop-fraction", ex.cfg.crop_fraction, "Top fraction holding the bar")
        ->capture_default_str();
    extract->add_option("--threshold", ex.threshold, "Match acceptance threshold")
        ->capture_default_str();
    extract->add_option("--rescale", ex.cfg.rescale_factor, "Integer upscale factor")
        ->capture_default_str();
    extract->add_option("--nlm-patch", ex.cfg.denoise.patch_size, "NLM patch size")
        ->capture_default_str();
    extract->add_option("--nlm-window", ex.cfg.denoise.search_window, "NLM search window")
        ->capture_default_str();
    extract->add_option("--nlm-h", ex.cfg.denoise.strength_h, "NLM filter strength")
        ->capture_default_str();
    extract->add_option("--ocr", ex.ocr_kind, "OCR engine kind")
        ->check(CLI::IsMember({"stub", "external"}))
        ->capture_default_str();
    extract->add_option("--ocr-exe", ex.cfg.ocr.executable, "External OCR executable")
        ->envname("URLTRACE_OCR_EXE");
    extract->add_option("--ocr-cmd-template", ex.cfg.ocr.cmd_template,
                        "Argument shape, placeholders {exe} {image} {outbase}")
        ->capture_default_str();
    extract->add_option("--ocr-arg", ex.ocr_args,
                        "Extra engine argument (repeatable; replaces the default \"--psm 7\")");
    extract->add_option("--ocr-timeout", ex.cfg.ocr.timeout_s, "External engine timeout, seconds")
        ->capture_default_str();
    extract->add_flag("--no-smooth", ex.no_smooth, "Skip cross-frame consensus smoothing");
    extract->add_option("--smooth-radius", ex.cfg.smooth_params.radius, "Consensus window radius")
        ->capture_default_str();
    extract->add_option("--smooth-edit", ex.cfg.smooth_params.max_edit,
                        "Max edit distance to the window majority")
        ->capture_default_str();
    extract->add_option("--jobs", ex.cfg.jobs, "Worker threads over frames");
    extract->add_option("--debug-dir", ex.cfg.debug_dir,
                        "Dump per-stage URL-field PNGs into this directory");
    extract->add_option("--out", ex.out, "Records JSONL output path")->capture_default_str();
    extract->add_flag("--dump-config", ex.dump_config,
                      "Print the effective configuration as JSON and exit");

    AggregateArgs ag;
    CLI::App* aggregate =
        app.add_subcommand("aggregate", "Records JSONL -> dwell CSV + path CSV");
    aggregate->add_option("--records", ag.records_path, "Records JSONL path")->required();
    aggregate->add_option("--fps", ag.fps, "Capture rate used for seconds")
        ->capture_default_str();
    aggregate->add_option("--path-gap", ag.path_gap, "Max unreadable gap absorbed into a run")
        ->capture_default_str();
    aggregate->add_option("--dwell-out", ag.dwell_out, "Dwell CSV output")->capture_default_str();
    aggregate->add_option("--path-out", ag.path_out, "Path CSV output")->capture_default_str();

    RenderArgs rd;
    CLI::App* render = app.add_subcommand("render", "CSV -> SVG charts");
    render->add_option("--dwell-csv", rd.dwell_csv_path, "Dwell CSV input");
    render->add_option("--path-csv", rd.path_csv_path, "Path CSV input");
    render->add_option("--dwell-svg", rd.dwell_svg_path, "Dwell SVG output (default: input.svg)");
    render->add_option("--path-svg", rd.path_svg_path, "Path SVG output (default: input.svg)");

    SynthArgs sy;
    CLI::App* synth =
        app.add_subcommand("synth", "Generate a synthetic session with ground truth");
    synth->add_option("--spec", sy.spec_path, "Session spec JSON")->required();
    synth->add_option("--out", sy.out_dir, "Output directory")->required();
    synth->add_flag("--no-manifest", sy.no_manifest,
                    "Do not write templates/ and manifest.json alongside the frames");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    ex.threshold_given = extract->count("--threshold") > 0;
    ex.ocr_args_given = extract->count("--ocr-arg") > 0;

    try {
        if (app.got_subcommand(extract))
            return run_extract(ex);
        if (app.got_subcommand(aggregate))
            return run_aggregate(ag);
        if (app.got_subcommand(render))
            return run_render(rd);
        return run_synth(sy);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::EmptySession ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
