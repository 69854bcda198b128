#include <doctest.h>

#include <json.hpp>

#include "test_util.hpp"
#include "urltrace/synth.hpp"

using namespace urltrace;
using testutil::TempDir;
using testutil::run_command;

namespace {

const std::string cli = URLTRACE_CLI_PATH;

std::string q(const std::string& s) { return "'" + s + "'"; }

} // namespace

TEST_CASE("extract --dump-config reports the reference defaults") {
    const auto res = run_command(cli + " extract --dump-config");
    REQUIRE(res.exit_code == 0);
    const auto cfg = nlohmann::json::parse(res.out);
    CHECK(cfg.at("threshold").get<double>() == 0.8);
    CHECK(cfg.at("rescale").get<int>() == 3);
    CHECK(cfg.at("nlm_patch").get<int>() == 7);
    CHECK(cfg.at("nlm_window").get<int>() == 21);
    CHECK(cfg.at("nlm_h").get<double>() == 10.0);
    CHECK(cfg.at("crop_fraction").get<double>() == 1.0 / 3.0);
    CHECK(cfg.at("fps").get<double>() == 1.0);
    CHECK(cfg.at("smooth").get<bool>());
    CHECK(cfg.at("smooth_radius").get<int>() == 2);
    CHECK(cfg.at("smooth_edit").get<int>() == 2);
    CHECK(cfg.at("ocr").at("kind").get<std::string>() == "stub");
}

TEST_CASE("URLTRACE_OCR_EXE is the fallback for --ocr-exe") {
    const auto res =
        run_command("URLTRACE_OCR_EXE=/opt/bin/tesseract " + cli + " extract --dump-config");
    REQUIRE(res.exit_code == 0);
    const auto cfg = nlohmann::json::parse(res.out);
    CHECK(cfg.at("ocr").at("executable").get<std::string>() == "/opt/bin/tesseract");

    const auto flag_wins = run_command("URLTRACE_OCR_EXE=/opt/bin/tesseract " + cli +
                                       " extract --ocr-exe /usr/bin/other --dump-config");
    const auto cfg2 = nlohmann::json::parse(flag_wins.out);
    CHECK(cfg2.at("ocr").at("executable").get<std::string>() == "/usr/bin/other");
}

TEST_CASE("extract --help names the flags with their defaults") {
    const auto res = run_command(cli + " extract --help");
    REQUIRE(res.exit_code == 0);
    for (const char* flag :
         {"--frames", "--manifest", "--fps", "--crop-fraction", "--threshold", "--rescale",
          "--nlm-patch", "--nlm-window", "--nlm-h", "--ocr", "--ocr-exe", "--ocr-cmd-template",
          "--no-smooth", "--smooth-radius", "--smooth-edit", "--out"})
        CHECK_MESSAGE(res.out.find(flag) != std::string::npos, "missing ", flag);
    CHECK(res.out.find("0.8") != std::string::npos);
    CHECK(res.out.find("21") != std::string::npos);
}

TEST_CASE("extract exit codes") {
    TempDir dir;

    SUBCASE("empty session exits 2") {
        std::filesystem::create_directories(dir.file("empty"));
        write_builtin_manifest(dir.file("m"));
        const auto res = run_command(cli + " extract --frames " + q(dir.file("empty")) +
                                     " --manifest " + q(dir.file("m/manifest.json")) +
                                     " --out " + q(dir.file("r.jsonl")));
        CHECK(res.exit_code == 2);
    }

    SUBCASE("missing manifest exits 1 and names the path") {
        std::filesystem::create_directories(dir.file("frames"));
        const std::string missing = dir.file("nope/manifest.json");
        const auto res = run_command(cli + " extract --frames " + q(dir.file("frames")) +
                                     " --manifest " + q(missing));
        CHECK(res.exit_code == 1);
        CHECK(res.err.find(missing) != std::string::npos);
    }

    SUBCASE("missing required flags exit 1") {
        CHECK(run_command(cli + " extract").exit_code == 1);
    }
}

TEST_CASE("aggregate reports malformed JSONL lines") {
    TempDir dir;
    std::string text;
    for (int i = 0; i < 6; ++i)
        text += "{\"t\": " + std::to_string(i) +
                ", \"browser\": \"chrome\", \"raw\": \"a.com\", \"cleaned\": \"a.com\", "
                "\"domain\": \"a.com\", \"status\": \"ok\"}\n";
    text += "{broken\n";
    testutil::write_file(dir.file("r.jsonl"), text);

    const auto res = run_command(cli + " aggregate --records " + q(dir.file("r.jsonl")) +
                                 " --dwell-out " + q(dir.file("d.csv")) + " --path-out " +
                                 q(dir.file("p.csv")));
    CHECK(res.exit_code == 1);
    CHECK(res.err.find("line 7") != std::string::npos);
}

TEST_CASE("aggregate of an empty records file writes bare headers and exits 0") {
    TempDir dir;
    testutil::write_file(dir.file("r.jsonl"), "");
    const auto res = run_command(cli + " aggregate --records " + q(dir.file("r.jsonl")) +
                                 " --dwell-out " + q(dir.file("d.csv")) + " --path-out " +
                                 q(dir.file("p.csv")));
    CHECK(res.exit_code == 0);
    CHECK(testutil::read_file(dir.file("d.csv")) == "domain,seconds,frames\n");
    CHECK(testutil::read_file(dir.file("p.csv")) == "domain,start_s,end_s\n");
}

TEST_CASE("synth -> extract -> aggregate -> render end to end") {
    TempDir dir;
    testutil::write_file(dir.file("spec.json"), R"({
  "fps": 1, "frame_width": 640, "frame_height": 360, "noise_sigma": 0, "seed": 3,
  "events": [{"domain": "aa.com", "duration_s": 3, "browser": "chrome"},
             {"domain": "bb.net", "duration_s": 2, "browser": "tor"}]
})");

    const auto synth = run_command(cli + " synth --spec " + q(dir.file("spec.json")) + " --out " +
                                   q(dir.file("s")));
    REQUIRE(synth.exit_code == 0);
    CHECK(std::filesystem::exists(dir.file("s/truth.json")));
    CHECK(std::filesystem::exists(dir.file("s/manifest.json")));
    CHECK(std::filesystem::exists(dir.file("s/templates/chrome.png")));

    const auto extract = run_command(cli + " extract --frames " + q(dir.file("s")) +
                                     " --manifest " + q(dir.file("s/manifest.json")) +
                                     " --jobs 1 --out " + q(dir.file("r.jsonl")));
    REQUIRE(extract.exit_code == 0);

    const auto aggregate = run_command(cli + " aggregate --records " + q(dir.file("r.jsonl")) +
                                       " --dwell-out " + q(dir.file("d.csv")) + " --path-out " +
                                       q(dir.file("p.csv")));
    REQUIRE(aggregate.exit_code == 0);
    CHECK(testutil::read_file(dir.file("d.csv")) ==
          "domain,seconds,frames\naa.com,3,3\nbb.net,2,2\n");
    CHECK(testutil::read_file(dir.file("p.csv")) ==
          "domain,start_s,end_s\naa.com,0,2\nbb.net,3,4\n");

    const auto render = run_command(cli + " render --dwell-csv " + q(dir.file("d.csv")) +
                                    " --path-csv " + q(dir.file("p.csv")));
    REQUIRE(render.exit_code == 0);
    const std::string dwell_svg = testutil::read_file(dir.file("d.svg"));
    const std::string path_svg = testutil::read_file(dir.file("p.svg"));
    CHECK(dwell_svg.starts_with("<svg"));
    CHECK(dwell_svg.find("aa.com") != std::string::npos);
    CHECK(path_svg.find("bb.net") != std::string::npos);
}

TEST_CASE("render requires at least one input") {
    CHECK(run_command(cli + " render").exit_code == 1);
}

TEST_CASE("unknown subcommand fails") {
    CHECK(run_command(cli + " frobnicate").exit_code != 0);
}
