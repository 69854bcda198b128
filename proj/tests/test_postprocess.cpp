#include <doctest.h>

#include <random>

#include "urltrace/postprocess.hpp"

using namespace urltrace;

namespace {

UrlRecord rec(double t, RecordStatus status, std::string domain = "",
              std::string cleaned = "") {
    UrlRecord r;
    r.timestamp_s = t;
    r.status = status;
    r.domain = std::move(domain);
    r.cleaned_url = std::move(cleaned);
    r.browser_id = status == RecordStatus::NoBrowser ? "none" : "chrome";
    return r;
}

std::vector<UrlRecord> ok_run(const std::vector<std::string>& domains) {
    std::vector<UrlRecord> records;
    for (std::size_t i = 0; i < domains.size(); ++i)
        records.push_back(rec(static_cast<double>(i), RecordStatus::Ok, domains[i],
                              "https://" + domains[i]));
    return records;
}

std::string random_domain(std::mt19937_64& rng) {
    static constexpr std::string_view alnum = "abcdefghijklmnopqrstuvwxyz0123456789";
    static constexpr std::string_view middle = "abcdefghijklmnopqrstuvwxyz0123456789-";
    const int labels = 2 + static_cast<int>(rng() % 3);
    std::string d;
    for (int l = 0; l < labels; ++l) {
        if (l)
            d += '.';
        const int len = 1 + static_cast<int>(rng() % 10);
        for (int i = 0; i < len; ++i) {
            const bool edge = i == 0 || i == len - 1;
            const std::string_view pool = edge ? alnum : middle;
            d += pool[rng() % pool.size()];
        }
    }
    return d;
}

} // namespace

TEST_CASE("clean_ocr_text examples") {
    CHECK(clean_ocr_text("@ https://www.Example.com") == "https://www.example.com");
    CHECK(clean_ocr_text("") == "");
    CHECK(clean_ocr_text("\xc2\xa2 duckduckgo..com") == "duckduckgo.com");
    CHECK(clean_ocr_text("|] example.com [|") == "example.com");
    CHECK(clean_ocr_text("....") == "");
    CHECK(clean_ocr_text("A lock \xf0\x9f\x94\x92 sign") == "alocksign");
    CHECK(clean_ocr_text("EXAMPLE.COM/Path?Q=1") == "example.com/path?q=1");
}

TEST_CASE("clean_ocr_text is idempotent") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 300; ++i) {
        std::string s;
        const int len = static_cast<int>(rng() % 40);
        for (int k = 0; k < len; ++k)
            s += static_cast<char>(rng() % 256);
        const std::string once = clean_ocr_text(s);
        CHECK(clean_ocr_text(once) == once);
    }
}

TEST_CASE("extract_domain examples") {
    CHECK(extract_domain("https://www.example.com/path?q=1") == "example.com");
    CHECK(extract_domain("http://3g2upl4pq6kufc4m.onion/") == "3g2upl4pq6kufc4m.onion");
    CHECK_FALSE(extract_domain("///").has_value());
    CHECK_FALSE(extract_domain("").has_value());
    CHECK(extract_domain("example.com:8080/x") == "example.com");
    CHECK(extract_domain("sub.example.co.uk") == "sub.example.co.uk");
    CHECK(extract_domain("www.example.com") == "example.com");
    CHECK(extract_domain("a-b.cd") == "a-b.cd");
}

TEST_CASE("extract_domain rejects non-hosts") {
    CHECK_FALSE(extract_domain("localhost").has_value());     // single label
    CHECK_FALSE(extract_domain("exa_mple.com").has_value());  // '_' not allowed in labels
    CHECK_FALSE(extract_domain("-ab.com").has_value());       // leading hyphen
    CHECK_FALSE(extract_domain("ab-.com").has_value());       // trailing hyphen
    CHECK_FALSE(extract_domain("a..com").has_value());        // empty label
    CHECK_FALSE(extract_domain("http://").has_value());
    CHECK_FALSE(extract_domain(":8080").has_value());
}

TEST_CASE("clean + extract round-trips generated domains") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 200; ++i) {
        const std::string d = random_domain(rng);
        CHECK(extract_domain(clean_ocr_text("https://www." + d)) == d);
        CHECK(extract_domain(clean_ocr_text(d + "/some/path")) == d);
    }
}

TEST_CASE("levenshtein distance") {
    CHECK(levenshtein("", "") == 0);
    CHECK(levenshtein("abc", "abc") == 0);
    CHECK(levenshtein("abc", "abd") == 1);
    CHECK(levenshtein("abc", "ab") == 1);
    CHECK(levenshtein("abc", "xabc") == 1);
    CHECK(levenshtein("kitten", "sitting") == 3);
    CHECK(levenshtein("", "abc") == 3);
    CHECK(levenshtein("exampl3.com", "example.com") == 1);
}

TEST_CASE("consensus_smooth repairs a lone misread") {
    auto records = ok_run({"example.com", "example.com", "exampl3.com", "example.com",
                           "example.com"});
    const auto out = consensus_smooth(records);
    CHECK(out[2].domain == "example.com");
    CHECK(out[2].status == RecordStatus::Smoothed);
    for (int i : {0, 1, 3, 4}) {
        CHECK(out[i].status == RecordStatus::Ok);
        CHECK(out[i].domain == "example.com");
    }
}

TEST_CASE("consensus_smooth repairs an unparseable frame from its window") {
    std::vector<UrlRecord> records = ok_run({"example.com", "example.com"});
    records.push_back(rec(2, RecordStatus::Unparseable, "", "examplecom"));
    records.push_back(rec(3, RecordStatus::Ok, "example.com"));
    records.push_back(rec(4, RecordStatus::Ok, "example.com"));
    const auto out = consensus_smooth(records);
    CHECK(out[2].status == RecordStatus::Smoothed);
    CHECK(out[2].domain == "example.com");
}

TEST_CASE("consensus_smooth leaves hopeless frames alone") {
    SUBCASE("pairwise distinct domains have no majority") {
        const auto records = ok_run({"a.com", "b.com", "c.com", "d.com", "e.com"});
        CHECK(consensus_smooth(records) == std::vector<UrlRecord>(records));
    }

    SUBCASE("empty input") {
        CHECK(consensus_smooth({}).empty());
    }

    SUBCASE("majority too far in edit distance stays put") {
        const auto records =
            ok_run({"example.com", "example.com", "other.net", "example.com", "example.com"});
        const auto out = consensus_smooth(records);
        CHECK(out[2].domain == "other.net");
        CHECK(out[2].status == RecordStatus::Ok);
    }

    SUBCASE("no_browser records are never modified") {
        std::vector<UrlRecord> records = ok_run({"a.com", "a.com"});
        records.push_back(rec(2, RecordStatus::NoBrowser));
        records.push_back(rec(3, RecordStatus::Ok, "a.com"));
        records.push_back(rec(4, RecordStatus::Ok, "a.com"));
        const auto out = consensus_smooth(records);
        CHECK(out[2].status == RecordStatus::NoBrowser);
        CHECK(out[2].domain.empty());
    }

    SUBCASE("a single supporter is not a majority") {
        std::vector<UrlRecord> records;
        records.push_back(rec(0, RecordStatus::Ok, "a.com"));
        records.push_back(rec(1, RecordStatus::Unparseable, "", "acom"));
        const auto out = consensus_smooth(records);
        CHECK(out[1].status == RecordStatus::Unparseable);
    }
}

TEST_CASE("consensus_smooth structural properties") {
    std::mt19937_64 rng(31);
    const std::vector<std::string> pool = {"aaa.com", "aab.com", "bbb.net", "ccc.org"};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<UrlRecord> records;
        const int n = static_cast<int>(rng() % 12);
        for (int i = 0; i < n; ++i) {
            const int kind = static_cast<int>(rng() % 4);
            if (kind == 0)
                records.push_back(rec(i, RecordStatus::NoBrowser));
            else if (kind == 1)
                records.push_back(rec(i, RecordStatus::Unparseable, "", "aaacom"));
            else
                records.push_back(rec(i, RecordStatus::Ok, pool[rng() % pool.size()]));
        }
        const auto out = consensus_smooth(records);
        REQUIRE(out.size() == records.size());
        for (int i = 0; i < n; ++i) {
            CHECK(out[i].timestamp_s == records[i].timestamp_s);
            if (records[i].status == RecordStatus::NoBrowser)
                CHECK(out[i] == records[i]);
            if (out[i].status == RecordStatus::Smoothed &&
                records[i].status != RecordStatus::Smoothed) {
                // The repair domain must come from the window.
                bool found = false;
                for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j)
                    if (j != i && records[j].has_domain() && records[j].domain == out[i].domain)
                        found = true;
                CHECK(found);
            }
            // A record agreeing with both neighbors is never touched.
            if (records[i].status == RecordStatus::Ok && i > 0 && i + 1 < n &&
                records[i - 1].has_domain() && records[i + 1].has_domain() &&
                records[i - 1].domain == records[i].domain &&
                records[i + 1].domain == records[i].domain)
                CHECK(out[i] == records[i]);
        }
    }
}
