#include <doctest.h>

#include <chrono>
#include <random>

#include "test_util.hpp"
#include "urltrace/font5x7.hpp"
#include "urltrace/imgproc.hpp"
#include "urltrace/ocr.hpp"

using namespace urltrace;
using testutil::TempDir;

namespace {

GrayImage render_field(std::string_view text, int scale = 1, int margin = 4,
                       std::uint8_t ink = 0, std::uint8_t bg = 255) {
    const int w = std::max(text_width_px(text, scale), 1) + 2 * margin;
    const int h = text_height_px(scale) + 2 * margin;
    GrayImage field(w, h, bg);
    draw_text(field, margin, margin, text, scale, ink);
    return field;
}

std::string random_text(std::mt19937_64& rng, std::size_t len) {
    std::string s;
    for (std::size_t i = 0; i < len; ++i)
        s += kFontCharset[rng() % kFontCharset.size()];
    return s;
}

void make_engine_script(const std::string& path, const std::string& body) {
    testutil::write_file(path, "#!/bin/sh\n" + body + "\n");
    std::filesystem::permissions(path, std::filesystem::perms::owner_all |
                                           std::filesystem::perms::group_read |
                                           std::filesystem::perms::others_read);
}

int count_ocr_temp_files() {
    int n = 0;
    for (const auto& entry :
         std::filesystem::directory_iterator(std::filesystem::temp_directory_path()))
        if (entry.path().filename().string().starts_with("urltrace-ocr-"))
            ++n;
    return n;
}

} // namespace

TEST_CASE("font glyphs are distinct and inked") {
    CHECK(kFont5x7.size() == kFontCharset.size());
    for (std::size_t i = 0; i < kFont5x7.size(); ++i) {
        CHECK(kFont5x7[i].ch == kFontCharset[i]);
        int ink = 0;
        for (auto row : kFont5x7[i].rows)
            ink += __builtin_popcount(row);
        CHECK(ink > 0);
    }
    for (std::size_t i = 0; i < kFont5x7.size(); ++i)
        for (std::size_t j = i + 1; j < kFont5x7.size(); ++j) {
            int hamming = 0;
            for (int r = 0; r < kGlyphHeight; ++r)
                hamming += __builtin_popcount(kFont5x7[i].rows[r] ^ kFont5x7[j].rows[r]);
            CHECK_MESSAGE(hamming >= 2, "glyphs '", kFont5x7[i].ch, "' and '", kFont5x7[j].ch,
                          "' differ by only ", hamming, " pixels");
        }
}

TEST_CASE("stub recognizes every charset glyph at several scales") {
    for (int scale : {1, 2, 3})
        for (char c : kFontCharset) {
            const std::string text(1, c);
            CHECK(stub_recognize(render_field(text, scale)) == text);
        }
}

TEST_CASE("stub round-trips random strings") {
    std::mt19937_64 rng(123);
    for (int i = 0; i < 100; ++i) {
        const std::string text = random_text(rng, 1 + rng() % 18);
        const int scale = 1 + static_cast<int>(rng() % 2);
        CHECK(stub_recognize(render_field(text, scale)) == text);
    }
}

TEST_CASE("stub is deterministic") {
    const GrayImage field = render_field("abc-123.net/x:8", 2);
    CHECK(stub_recognize(field) == stub_recognize(field));
}

TEST_CASE("blank field reads as empty text") {
    CHECK(stub_recognize(GrayImage(40, 12, 255)) == "");
    CHECK(stub_recognize(GrayImage(40, 12, 129)) == "");
}

TEST_CASE("a few flipped pixels do not change the reading") {
    const std::string text = "abc.com";
    const int scale = 2, margin = 4;
    GrayImage field = render_field(text, scale, margin);
    // Flip 5% of the pixels inside the rendered glyph block.
    const int block_w = text_width_px(text, scale);
    const int block_h = text_height_px(scale);
    std::mt19937_64 rng(77);
    const int flips = block_w * block_h / 20;
    for (int i = 0; i < flips; ++i) {
        const int x = margin + static_cast<int>(rng() % block_w);
        const int y = margin + static_cast<int>(rng() % block_h);
        field.at(x, y) = field.at(x, y) < 128 ? 255 : 0;
    }
    CHECK(stub_recognize(field) == text);
}

TEST_CASE("a cell of pure noise reads as '?'") {
    // 'a' in the first cell, a coin-flip pattern filling the second.
    GrayImage field(46, 29, 255);
    draw_text(field, 4, 4, "a", 3, 0);
    std::mt19937_64 rng(99);
    for (int y = 0; y < kGlyphHeight * 3; ++y)
        for (int x = 0; x < kGlyphPitch * 3; ++x)
            field.at(4 + kGlyphPitch * 3 + x, 4 + y) = (rng() & 1) ? 0 : 255;
    CHECK(stub_recognize(field) == "a?");
}

TEST_CASE("stub survives the enhancement chain") {
    const std::string text = "tor.onion";
    GrayImage field = render_field(text, 2, 5, 20, 255);
    field = sharpen(nlm_denoise(rescale(field, 3), DenoiseParams{}));
    CHECK(stub_recognize(field) == text);
}

TEST_CASE("recognize with the stub engine") {
    EngineConfig cfg;
    const OcrResult res = recognize(render_field("example.com", 2), cfg);
    CHECK(res.ok);
    CHECK(res.text == "example.com");
    CHECK(res.engine_id == "stub");
}

TEST_CASE("recognize rejects fields smaller than 8x8") {
    EngineConfig cfg;
    const OcrResult res = recognize(GrayImage(7, 7, 255), cfg);
    CHECK_FALSE(res.ok);
    CHECK(res.text.empty());
}

TEST_CASE("external engine contract") {
    TempDir dir;
    const GrayImage field = render_field("x.y", 1);
    const int temps_before = count_ocr_temp_files();

    SUBCASE("engine output is captured and trimmed") {
        make_engine_script(dir.file("ok.sh"), "printf 'example.com\\n\\n' > \"$2.txt\"");
        EngineConfig cfg;
        cfg.kind = EngineKind::External;
        cfg.executable = dir.file("ok.sh");
        const OcrResult res = recognize(field, cfg);
        CHECK(res.ok);
        CHECK(res.text == "example.com");
        CHECK(res.engine_id == "ok");
    }

    SUBCASE("missing executable is EngineMissing, not a crash") {
        EngineConfig cfg;
        cfg.kind = EngineKind::External;
        cfg.executable = dir.file("does-not-exist");
        const OcrResult res = recognize(field, cfg);
        CHECK_FALSE(res.ok);
        CHECK(res.text.empty());
    }

    SUBCASE("unset executable is EngineMissing") {
        EngineConfig cfg;
        cfg.kind = EngineKind::External;
        const OcrResult res = recognize(field, cfg);
        CHECK_FALSE(res.ok);
    }

    SUBCASE("nonzero exit is EngineFailure") {
        make_engine_script(dir.file("fail.sh"), "exit 3");
        EngineConfig cfg;
        cfg.kind = EngineKind::External;
        cfg.executable = dir.file("fail.sh");
        CHECK_FALSE(recognize(field, cfg).ok);
    }

    SUBCASE("missing output file is EngineFailure") {
        make_engine_script(dir.file("silent.sh"), "exit 0");
        EngineConfig cfg;
        cfg.kind = EngineKind::External;
        cfg.executable = dir.file("silent.sh");
        CHECK_FALSE(recognize(field, cfg).ok);
    }

    SUBCASE("slow engine hits the timeout and is killed") {
        make_engine_script(dir.file("slow.sh"), "sleep 5");
        EngineConfig cfg;
        cfg.kind = EngineKind::External;
        cfg.executable = dir.file("slow.sh");
        cfg.timeout_s = 0.2;
        const auto t0 = std::chrono::steady_clock::now();
        CHECK_FALSE(recognize(field, cfg).ok);
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        CHECK(elapsed < 2.0);
    }

    SUBCASE("custom command template rearranges arguments") {
        make_engine_script(dir.file("swap.sh"), "printf 'swapped.ok\\n' > \"$1.txt\"");
        EngineConfig cfg;
        cfg.kind = EngineKind::External;
        cfg.executable = dir.file("swap.sh");
        cfg.cmd_template = "{exe} {outbase} {image}";
        const OcrResult res = recognize(field, cfg);
        CHECK(res.ok);
        CHECK(res.text == "swapped.ok");
    }

    CHECK(count_ocr_temp_files() == temps_before); // temp files cleaned either way
}
