// Core building blocks: util, url, origin metadata, hashing, recipes, crypto.

#include <doctest.h>

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "webpurge/crypto.hpp"
#include "webpurge/hash.hpp"
#include "webpurge/origin.hpp"
#include "webpurge/recipe.hpp"
#include "webpurge/url.hpp"
#include "webpurge/util.hpp"

#include "support/temp_dir.hpp"

using namespace webpurge;

// ---------------------------------------------------------------- util ----

TEST_CASE("rfc3339 formats and parses round-trip") {
    CHECK(format_rfc3339(0) == "1970-01-01T00:00:00Z");
    CHECK(format_rfc3339(1753999200) == "2025-07-31T22:00:00Z");

    auto t = parse_rfc3339("2026-08-01T00:00:00Z");
    REQUIRE(t.has_value());
    CHECK(format_rfc3339(*t) == "2026-08-01T00:00:00Z");

    // Offsets fold back to UTC.
    auto off = parse_rfc3339("2026-08-01T02:00:00+02:00");
    REQUIRE(off.has_value());
    CHECK(*off == *t);
    auto neg = parse_rfc3339("2026-07-31T22:00:00-02:00");
    REQUIRE(neg.has_value());
    CHECK(*neg == *t);

    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; i++) {
        UnixTime v = static_cast<UnixTime>(rng() % 4102444800ULL);  // < year 2100
        auto back = parse_rfc3339(format_rfc3339(v));
        REQUIRE(back.has_value());
        CHECK(*back == v);
    }
}

TEST_CASE("rfc3339 rejects junk") {
    CHECK(!parse_rfc3339("").has_value());
    CHECK(!parse_rfc3339("yesterday").has_value());
    CHECK(!parse_rfc3339("2026-08-01").has_value());
    CHECK(!parse_rfc3339("2026-08-01 00:00:00").has_value());
    CHECK(!parse_rfc3339("2026-08-01T00:00:00").has_value());
    CHECK(!parse_rfc3339("2026-08-01T00:00:00Q").has_value());
}

TEST_CASE("format_bytes_decimal pins the report renders") {
    CHECK(format_bytes_decimal(45600000ULL) == "45.6 MB");
    CHECK(format_bytes_decimal(7360000000ULL) == "7.36 GB");
    CHECK(format_bytes_decimal(1530000000ULL) == "1.53 GB");
    CHECK(format_bytes_decimal(3350000000ULL) == "3.35 GB");
    CHECK(format_bytes_decimal(5100000ULL) == "5.1 MB");
    CHECK(format_bytes_decimal(0) == "0 B");
    CHECK(format_bytes_decimal(999) == "999 B");
    CHECK(format_bytes_decimal(1000) == "1.0 kB");
    CHECK(format_bytes_decimal(27000000000ULL) == "27.00 GB");
    CHECK(format_bytes_decimal(1200000000000ULL) == "1.20 TB");
}

TEST_CASE("parse_bytes accepts sizes and rejects garbage") {
    CHECK(parse_bytes("12345") == 12345ULL);
    CHECK(parse_bytes("10GB") == 10000000000ULL);
    CHECK(parse_bytes("500MB") == 500000000ULL);
    CHECK(parse_bytes("500 MB") == 500000000ULL);
    CHECK(parse_bytes("1.5GiB") == 1610612736ULL);
    CHECK(parse_bytes("2k") == 2000ULL);
    CHECK(parse_bytes("4KiB") == 4096ULL);
    CHECK(parse_bytes("1tb") == 1000000000000ULL);
    CHECK(!parse_bytes("").has_value());
    CHECK(!parse_bytes("GB").has_value());
    CHECK(!parse_bytes("ten gigabytes").has_value());
    CHECK(!parse_bytes("10XB").has_value());
    CHECK(!parse_bytes("-5MB").has_value());
}

TEST_CASE("compute_stats handles odd and even medians") {
    auto odd = compute_stats({5, 1, 9});
    CHECK(odd.min == 1);
    CHECK(odd.max == 9);
    CHECK(odd.median == 5);
    CHECK(odd.mean == doctest::Approx(5.0));
    CHECK(odd.count == 3);

    auto even = compute_stats({4, 1, 9, 2});
    CHECK(even.median == doctest::Approx(3.0));
    CHECK(even.mean == doctest::Approx(4.0));

    auto empty = compute_stats({});
    CHECK(empty.count == 0);
    CHECK(empty.mean == 0);
}

TEST_CASE("sample_stddev uses n-1") {
    CHECK(sample_stddev({}) == 0.0);
    CHECK(sample_stddev({42}) == 0.0);
    // Known: stddev of {2,4,4,4,5,5,7,9} population is 2; sample is sqrt(32/7).
    CHECK(sample_stddev({2, 4, 4, 4, 5, 5, 7, 9}) == doctest::Approx(std::sqrt(32.0 / 7.0)));
    CHECK(sample_stddev({1, 5}) == doctest::Approx(std::sqrt(8.0)));
}

TEST_CASE("hex helpers") {
    unsigned char data[] = {0x00, 0xab, 0xff, 0x10};
    CHECK(to_hex(data, 4) == "00abff10");
    CHECK(is_hex_string("00abff10"));
    CHECK(is_hex_string("deadbeef"));
    CHECK(!is_hex_string(""));
    CHECK(!is_hex_string("DEADBEEF"));  // uppercase rejected: canonical form is lowercase
    CHECK(!is_hex_string("xyz"));
    CHECK(!is_hex_string("12 34"));
}

TEST_CASE("string helpers") {
    CHECK(trim("  a b \t\n") == "a b");
    CHECK(trim("") == "");
    CHECK(to_lower("AbC") == "abc");
    CHECK(starts_with_ci("File://x", "file://"));
    CHECK(!starts_with_ci("fil", "file"));
    CHECK(iequals("HostUrl", "hosturl"));
    CHECK(!iequals("HostUrl", "hosturl2"));
}

// ----------------------------------------------------------------- url ----

TEST_CASE("parse_url splits components") {
    auto u = parse_url("https://Example.COM:8443/a/b%20c?x=1&y=2#frag");
    REQUIRE(u.has_value());
    CHECK(u->scheme == "https");
    CHECK(u->host == "example.com");
    CHECK(u->port == "8443");
    CHECK(u->path == "/a/b%20c");
    CHECK(u->query == "x=1&y=2");
    CHECK(u->fragment == "frag");
    CHECK(u->origin() == "https://example.com:8443");
    CHECK(u->path_and_query() == "/a/b%20c?x=1&y=2");
    CHECK(u->str() == "https://example.com:8443/a/b%20c?x=1&y=2#frag");
}

TEST_CASE("parse_url defaults and odd inputs") {
    auto bare = parse_url("http://host.example");
    REQUIRE(bare.has_value());
    CHECK(bare->path == "/");
    CHECK(bare->port == "");
    CHECK(bare->path_and_query() == "/");

    auto user = parse_url("ftp://user:pw@files.example/pub");
    REQUIRE(user.has_value());
    CHECK(user->scheme == "ftp");
    CHECK(user->host == "files.example");
    CHECK(user->path == "/pub");

    auto fileu = parse_url("file:///C:/Users/p5/Videos/lecture01.mp4");
    REQUIRE(fileu.has_value());
    CHECK(fileu->scheme == "file");
    CHECK(fileu->host == "");
    CHECK(fileu->path == "/C:/Users/p5/Videos/lecture01.mp4");

    CHECK(!parse_url("not a url").has_value());
    CHECK(!parse_url("://nohost").has_value());
    CHECK(!parse_url("ht tp://x").has_value());
    CHECK(parse_url("  https://padded.example/x  ").has_value());
}

TEST_CASE("last_segment picks the final path piece") {
    CHECK(parse_url("https://h.example/a/b/file.bin")->last_segment() == "file.bin");
    CHECK(parse_url("https://h.example/a/b/")->last_segment() == "b");
    CHECK(parse_url("https://h.example/")->last_segment() == "");
    CHECK(parse_url("https://h.example")->last_segment() == "");
    CHECK(parse_url("https://h.example/one")->last_segment() == "one");
}

TEST_CASE("percent_decode") {
    CHECK(percent_decode("a%20b") == "a b");
    CHECK(percent_decode("%41%62%63") == "Abc");
    CHECK(percent_decode("100%") == "100%");     // dangling percent left alone
    CHECK(percent_decode("%zz") == "%zz");       // bad digits left alone
    CHECK(percent_decode("caf%C3%A9") == "caf\xc3\xa9");
}

TEST_CASE("remove_dot_segments follows rfc3986 examples") {
    CHECK(remove_dot_segments("/a/b/c/./../../g") == "/a/g");
    CHECK(remove_dot_segments("mid/content=5/../6") == "mid/6");
    CHECK(remove_dot_segments("/../x") == "/x");
    CHECK(remove_dot_segments("/a/..") == "/");
    CHECK(remove_dot_segments("/a/.") == "/a/");
    CHECK(remove_dot_segments(".") == "");
}

TEST_CASE("resolve_reference covers the usual href shapes") {
    Url base = *parse_url("https://h.example/dir/page.html?q=1#top");

    auto abs = resolve_reference(base, "https://other.example/x");
    REQUIRE(abs.has_value());
    CHECK(abs->str() == "https://other.example/x");

    auto rel = resolve_reference(base, "file2.bin");
    REQUIRE(rel.has_value());
    CHECK(rel->str() == "https://h.example/dir/file2.bin");

    auto up = resolve_reference(base, "../top.bin");
    REQUIRE(up.has_value());
    CHECK(up->str() == "https://h.example/top.bin");

    auto rooted = resolve_reference(base, "/abs/path.zip");
    REQUIRE(rooted.has_value());
    CHECK(rooted->str() == "https://h.example/abs/path.zip");

    auto proto = resolve_reference(base, "//cdn.example/lib.js");
    REQUIRE(proto.has_value());
    CHECK(proto->scheme == "https");
    CHECK(proto->host == "cdn.example");

    auto qonly = resolve_reference(base, "?page=2");
    REQUIRE(qonly.has_value());
    CHECK(qonly->path == "/dir/page.html");
    CHECK(qonly->query == "page=2");
    CHECK(qonly->fragment == "");

    auto fonly = resolve_reference(base, "#sec2");
    REQUIRE(fonly.has_value());
    CHECK(fonly->path == "/dir/page.html");
    CHECK(fonly->query == "q=1");  // query preserved from base
    CHECK(fonly->fragment == "sec2");

    auto empty = resolve_reference(base, "");
    REQUIRE(empty.has_value());
    CHECK(empty->str() == base.str());

    // mailto: and javascript: are scheme-qualified, not relative paths.
    auto mailto = resolve_reference(base, "mailto:someone@example.com");
    CHECK(!mailto.has_value());  // parse_url fails (no ://)
}

TEST_CASE("local reference detection") {
    CHECK(is_drive_letter_path("C:\\Users\\p4\\file.zip"));
    CHECK(is_drive_letter_path("d:/stuff/x"));
    CHECK(!is_drive_letter_path("C:file"));
    CHECK(!is_drive_letter_path("/usr/bin"));
    CHECK(is_local_reference("file:///C:/x.mp4"));
    CHECK(is_local_reference("FILE://server/share"));
    CHECK(is_local_reference("C:\\x\\y.bin"));
    CHECK(!is_local_reference("https://x.example/"));
}

TEST_CASE("host_matches_domain is suffix-at-label-boundary, not substring") {
    CHECK(host_matches_domain("mega.nz", "mega.nz"));
    CHECK(host_matches_domain("www.mega.nz", "mega.nz"));
    CHECK(host_matches_domain("uni.sharepoint.com", "sharepoint.com"));
    CHECK(host_matches_domain("UNI.SHAREPOINT.COM", "sharepoint.com"));  // case-blind
    CHECK(!host_matches_domain("notmega.nz", "mega.nz"));
    CHECK(!host_matches_domain("mega.nz.evil.example", "mega.nz"));
    CHECK(!host_matches_domain("nz", "mega.nz"));

    CHECK(host_in_list("drive.google.com", CategoryLists{}.big_tech_csp));
    CHECK(!host_in_list("groove.google.com", CategoryLists{}.big_tech_csp));
}

// -------------------------------------------------------------- origin ----

TEST_CASE("zone identifier parsing tolerates real-world mess") {
    auto m = parse_zone_identifier(
        "[ZoneTransfer]\r\nZoneId=3\r\nReferrerUrl=https://r.example/page\r\n"
        "HostUrl=https://h.example/f.bin\r\n");
    REQUIRE(m.has_value());
    CHECK(m->zone_id == 3);
    CHECK(m->referrer_url == "https://r.example/page");
    CHECK(m->host_url == "https://h.example/f.bin");
    CHECK(m->channel == OriginChannel::ads);

    // BOM + LF only + case-insensitive keys + junk keys.
    auto bom = parse_zone_identifier("\xEF\xBB\xBF[zonetransfer]\nzoneid=3\nExtra=1\n");
    REQUIRE(bom.has_value());
    CHECK(bom->zone_id == 3);
    CHECK(!bom->has_any_url());

    // Zone only.
    auto zonly = parse_zone_identifier("[ZoneTransfer]\r\nZoneId=4\r\n");
    REQUIRE(zonly.has_value());
    CHECK(zonly->zone_id == 4);
    CHECK(zonly->empty() == false);

    // Keys outside the section don't count.
    CHECK(!parse_zone_identifier("ZoneId=3\n").has_value());
    CHECK(!parse_zone_identifier("[Other]\nZoneId=3\n").has_value());
    CHECK(!parse_zone_identifier("").has_value());
    CHECK(!parse_zone_identifier("random text\nwith lines\n").has_value());

    // Malformed ZoneId is skipped but URLs still land.
    auto bad = parse_zone_identifier("[ZoneTransfer]\nZoneId=three\nHostUrl=https://x.example/\n");
    REQUIRE(bad.has_value());
    CHECK(!bad->zone_id.has_value());
    CHECK(bad->host_url == "https://x.example/");
}

TEST_CASE("zone identifier serialize/parse round-trip") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; i++) {
        OriginMetadata m;
        if (rng() % 2) m.zone_id = static_cast<int>(rng() % 5);
        if (rng() % 2) m.referrer_url = "https://r" + std::to_string(rng() % 100) + ".example/p";
        if (rng() % 2) m.host_url = "https://h" + std::to_string(rng() % 100) + ".example/f.bin";
        if (m.empty()) m.zone_id = 3;
        auto back = parse_zone_identifier(serialize_zone_identifier(m));
        REQUIRE(back.has_value());
        CHECK(back->zone_id == m.zone_id);
        CHECK(back->referrer_url == m.referrer_url);
        CHECK(back->host_url == m.host_url);
    }
}

TEST_CASE("read_origin picks up .zoneid sidecars in fixture mode only") {
    testsupport::TempDir td("origin");
    auto f = td / "download.pdf";
    testsupport::write_file(f, "payload");
    testsupport::write_file(td / "download.pdf.zoneid",
                     "[ZoneTransfer]\r\nZoneId=3\r\nHostUrl=https://files.example/download.pdf\r\n");

    auto with = read_origin(f, /*fixture_mode=*/true);
    REQUIRE(with.has_value());
    CHECK(with->channel == OriginChannel::sidecar);
    CHECK(with->zone_id == 3);
    CHECK(with->host_url == "https://files.example/download.pdf");

    auto without = read_origin(f, /*fixture_mode=*/false);
    CHECK(!without.has_value());

    auto missing = read_origin(td / "nothing.bin", true);
    CHECK(!missing.has_value());
}

TEST_CASE("file_extension") {
    CHECK(file_extension("report.PDF") == "pdf");
    CHECK(file_extension("archive.tar.gz") == "gz");
    CHECK(file_extension("noext") == "");
    CHECK(file_extension(".hidden") == "");
    CHECK(file_extension("trailingdot.") == "");
    CHECK(file_extension("a.b") == "b");
}

namespace {

OriginMetadata urls(std::optional<std::string> ru, std::optional<std::string> hu) {
    OriginMetadata m;
    m.referrer_url = std::move(ru);
    m.host_url = std::move(hu);
    return m;
}

}  // namespace

TEST_CASE("classify_source walks the cascade in order") {
    CategoryLists lists;

    CHECK(classify_source(std::nullopt, "pdf", lists) == SourceCategory::LinksNotRecorded);
    CHECK(classify_source(OriginMetadata{}, "pdf", lists) == SourceCategory::LinksNotRecorded);
    OriginMetadata zone_only;
    zone_only.zone_id = 3;
    CHECK(classify_source(zone_only, "pdf", lists) == SourceCategory::LinksNotRecorded);

    // Local references trump everything.
    CHECK(classify_source(urls("C:\\Users\\p4\\OldDrive\\backup.zip",
                               "https://mega.nz/file/x"), "zip", lists)
          == SourceCategory::LocalAccess);
    CHECK(classify_source(urls(std::nullopt, "file:///C:/Users/p5/v.mp4"), "mp4", lists)
          == SourceCategory::LocalAccess);

    CHECK(classify_source(urls(std::nullopt, "chrome-extension://abcdef/page"), "", lists)
          == SourceCategory::ApplicationsTools);

    CHECK(classify_source(urls("https://outlook.office.com/mail/inbox",
                               "https://attachments.office.net/owa/a.pdf"), "pdf", lists)
          == SourceCategory::Webmail);
    CHECK(classify_source(urls(std::nullopt, "https://mail.google.com/mail/u/0"), "", lists)
          == SourceCategory::Webmail);

    CHECK(classify_source(urls("https://uni.sharepoint.com/sites/x",
                               "https://uni.sharepoint.com/download.aspx?id=1"), "pptx", lists)
          == SourceCategory::CloudCollaboration);
    CHECK(classify_source(urls(std::nullopt, "https://teams.microsoft.com/l/file"), "", lists)
          == SourceCategory::CloudCollaboration);

    CHECK(classify_source(urls("https://www.icloud.com/iclouddrive", std::nullopt), "", lists)
          == SourceCategory::BigTechCSP);
    CHECK(classify_source(urls(std::nullopt, "https://drive.google.com/uc?id=x"), "", lists)
          == SourceCategory::BigTechCSP);

    CHECK(classify_source(urls(std::nullopt, "https://mega.nz/file/Kx7fQbwL"), "zip", lists)
          == SourceCategory::SmallCSP);

    CHECK(classify_source(urls("https://www.ilovepdf.com/compress_pdf", std::nullopt), "pdf", lists)
          == SourceCategory::ApplicationsTools);

    // Direct link: HU ends in the file's extension.
    CHECK(classify_source(urls(std::nullopt,
                               "https://mirror.opendata.example/pub/climate_2019.tar"),
                          "tar", lists)
          == SourceCategory::DirectLink);
    // Direct link via HU + page-like RU pair.
    CHECK(classify_source(urls("https://pubhost.example/downloads.html",
                               "https://files.pubhost.example/data/blob"), "pdf", lists)
          == SourceCategory::DirectLink);
    // HU alone, no extension match, no page RU: retail file host.
    CHECK(classify_source(urls(std::nullopt, "https://tinyshare.example/dl?id=9"), "pdf", lists)
          == SourceCategory::SmallCSP);
    // RU alone that matches nothing upstream.
    CHECK(classify_source(urls("https://www.bing.com/search?q=holiday", std::nullopt), "mp4", lists)
          == SourceCategory::ApplicationsTools);

    // HU is checked before RU inside each rule, but rules stay ordered:
    // webmail RU beats direct-link HU because the webmail rule runs first.
    CHECK(classify_source(urls("https://outlook.live.com/mail",
                               "https://cdn.example/report.pdf"), "pdf", lists)
          == SourceCategory::Webmail);
}

TEST_CASE("classify_url judges a single url") {
    CHECK(classify_url("https://mega.nz/file/x", "zip") == SourceCategory::SmallCSP);
    CHECK(classify_url("https://host.example/f.zip", "zip") == SourceCategory::DirectLink);
    CHECK(classify_url("file:///C:/x.mp4", "mp4") == SourceCategory::LocalAccess);
}

TEST_CASE("category names") {
    CHECK(std::string(to_string(SourceCategory::CloudCollaboration)) == "Cloud Collaboration");
    CHECK(std::string(to_string(SourceCategory::Webmail)) == "Webmail");
    CHECK(std::string(to_string(SourceCategory::BigTechCSP)) == "Big Tech CSPs");
    CHECK(std::string(to_string(SourceCategory::SmallCSP)) == "Small CSPs");
    CHECK(std::string(to_string(SourceCategory::ApplicationsTools)) == "Applications/Tools");
    CHECK(std::string(to_string(SourceCategory::LocalAccess)) == "Local Access");
    CHECK(std::string(to_string(SourceCategory::DirectLink)) == "Direct Links");
    CHECK(std::string(to_string(SourceCategory::LinksNotRecorded)) == "Links Not Recorded");
}

// ---------------------------------------------------------------- hash ----

TEST_CASE("sha256 known vectors") {
    CHECK(hash_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(hash_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(hash_hex("abc", "sha512").size() == 128);
    CHECK(hash_hex("abc", "SHA256") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("unsupported algorithms throw") {
    CHECK(!Hasher::supported("md5"));
    CHECK(Hasher::supported("sha256"));
    CHECK(Hasher::supported("SHA512"));
    CHECK_THROWS_AS(Hasher("md5"), HashError);
    CHECK_THROWS_AS(hash_hex("x", "crc32"), HashError);
}

TEST_CASE("incremental hashing equals one-shot and hex_digest is non-destructive") {
    std::string data = testsupport::random_bytes(3, 100000);
    Hasher h;
    h.update(data.substr(0, 1000));
    std::string early = h.hex_digest();
    CHECK(early == hash_hex(data.substr(0, 1000)));
    h.update(data.substr(1000));
    CHECK(h.hex_digest() == hash_hex(data));
    CHECK(h.bytes_consumed() == data.size());
}

TEST_CASE("hash_file partial window boundaries") {
    testsupport::TempDir td("hash");

    std::string small = testsupport::random_bytes(5, 512);
    std::string exact = testsupport::random_bytes(6, 4096);
    std::string big = testsupport::random_bytes(7, 10000);
    testsupport::write_file(td / "small.bin", small);
    testsupport::write_file(td / "exact.bin", exact);
    testsupport::write_file(td / "big.bin", big);

    auto hs = hash_file(td / "small.bin", "sha256", 4096);
    CHECK(hs.hash_full == hash_hex(small));
    REQUIRE(hs.partial_hash.has_value());
    CHECK(*hs.partial_hash == hash_hex(small));  // file shorter than window

    auto he = hash_file(td / "exact.bin", "sha256", 4096);
    CHECK(*he.partial_hash == he.hash_full);

    auto hb = hash_file(td / "big.bin", "sha256", 4096);
    CHECK(hb.hash_full == hash_hex(big));
    CHECK(*hb.partial_hash == hash_hex(big.substr(0, 4096)));
    CHECK(*hb.partial_hash != hb.hash_full);

    auto none = hash_file(td / "big.bin", "sha256", 0);
    CHECK(!none.partial_hash.has_value());

    CHECK_THROWS_AS(hash_file(td / "missing.bin"), HashError);
}

// -------------------------------------------------------------- recipe ----

namespace {

Recipe sample_recipe() {
    Recipe r;
    r.created_at = *parse_rfc3339("2026-08-01T12:00:00Z");
    r.last_maintained_at = r.created_at;
    r.referrer_url = "https://pubhost.example/downloads.html";
    r.host_url = "https://files.pubhost.example/data/course_reader.pdf";
    r.original_path = "/home/p1/Downloads/course_reader.pdf";
    r.file_name = "course_reader.pdf";
    r.size_bytes = 7600000;
    r.hash_full = hash_hex("course");
    r.hash_algo = "sha256";
    r.partial_hash = hash_hex("cour");
    r.partial_len = 1048576;
    return r;
}

}  // namespace

TEST_CASE("serialize_recipe emits exactly the eleven sorted keys") {
    auto j = nlohmann::json::parse(serialize_recipe(sample_recipe()));
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    std::vector<std::string> want = {
        "created_at", "file_name", "hash_algo", "hash_full", "host_url",
        "last_maintained_at", "original_path", "partial_hash", "partial_len",
        "referrer_url", "size_bytes"};
    CHECK(keys == want);  // nlohmann objects iterate sorted
    CHECK(j["created_at"] == "2026-08-01T12:00:00Z");
    CHECK(j["size_bytes"] == 7600000);

    Recipe nulls = sample_recipe();
    nulls.referrer_url.reset();
    nulls.partial_hash.reset();
    auto j2 = nlohmann::json::parse(serialize_recipe(nulls));
    CHECK(j2["referrer_url"].is_null());
    CHECK(j2["partial_hash"].is_null());
    CHECK(j2.size() == 11);
}

TEST_CASE("recipe round-trips exactly") {
    Recipe r = sample_recipe();
    CHECK(deserialize_recipe(serialize_recipe(r)) == r);

    r.referrer_url.reset();
    r.host_url.reset();
    r.partial_hash.reset();
    CHECK(deserialize_recipe(serialize_recipe(r)) == r);
}

TEST_CASE("deserialize_recipe flags unknown fields through the warn sink") {
    auto j = nlohmann::json::parse(serialize_recipe(sample_recipe()));
    j["extra_field"] = 1;
    std::vector<std::string> warnings;
    auto r = deserialize_recipe(j.dump(), [&](const std::string& w) { warnings.push_back(w); });
    CHECK(r == sample_recipe());
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("extra_field") != std::string::npos);

    // No sink: silently ignored.
    CHECK(deserialize_recipe(j.dump()) == sample_recipe());
}

TEST_CASE("deserialize_recipe rejects bad input with the offending field") {
    CHECK_THROWS_AS(deserialize_recipe("not json"), RecipeParseError);
    CHECK_THROWS_AS(deserialize_recipe("[1,2]"), RecipeParseError);

    auto base = nlohmann::json::parse(serialize_recipe(sample_recipe()));

    auto expect_field = [&](nlohmann::json j, const std::string& field) {
        try {
            deserialize_recipe(j.dump());
            FAIL_CHECK("expected RecipeParseError for field " << field);
        } catch (const RecipeParseError& e) {
            CHECK(e.field() == field);
        }
    };

    auto j = base; j.erase("hash_full");
    expect_field(j, "hash_full");
    j = base; j["size_bytes"] = nullptr;
    expect_field(j, "size_bytes");
    j = base; j["size_bytes"] = "big";
    expect_field(j, "size_bytes");
    j = base; j["size_bytes"] = -4;
    expect_field(j, "size_bytes");
    j = base; j["created_at"] = "lately";
    expect_field(j, "created_at");
    j = base; j["hash_full"] = "NOTHEX";
    expect_field(j, "hash_full");
    j = base; j["file_name"] = 9;
    expect_field(j, "file_name");
    j = base; j["referrer_url"] = 12;  // optional but typed
    expect_field(j, "referrer_url");
    j = base; j["partial_len"] = -1;
    expect_field(j, "partial_len");
}

TEST_CASE("partial_len defaults when null or absent") {
    auto j = nlohmann::json::parse(serialize_recipe(sample_recipe()));
    j["partial_len"] = nullptr;
    CHECK(deserialize_recipe(j.dump()).partial_len == kDefaultPartialLen);
    j.erase("partial_len");
    CHECK(deserialize_recipe(j.dump()).partial_len == kDefaultPartialLen);
    j["partial_len"] = 4096;
    CHECK(deserialize_recipe(j.dump()).partial_len == 4096);
}

TEST_CASE("recipe_id is the first 16 hex of the full hash") {
    Recipe r = sample_recipe();
    CHECK(r.recipe_id() == r.hash_full.substr(0, 16));
    CHECK(r.recipe_id().size() == 16);
}

TEST_CASE("create_recipe copies provenance and names the file") {
    FileHashes h{hash_hex("bytes"), hash_hex("by")};
    OriginMetadata o;
    o.referrer_url = "https://r.example/";
    o.host_url = "https://h.example/f.bin";
    UnixTime now = *parse_rfc3339("2026-08-15T00:00:00Z");

    auto r = create_recipe("C:\\Users\\p4\\Downloads\\f.bin", 42, o, h, now);
    CHECK(r.created_at == now);
    CHECK(r.last_maintained_at == now);
    CHECK(r.referrer_url == o.referrer_url);
    CHECK(r.host_url == o.host_url);
    CHECK(r.file_name == "f.bin");
    CHECK(r.original_path == "C:\\Users\\p4\\Downloads\\f.bin");
    CHECK(r.size_bytes == 42);
    CHECK(r.hash_full == h.hash_full);
    CHECK(r.partial_hash == h.partial_hash);
    CHECK(r.partial_len == kDefaultPartialLen);

    auto bare = create_recipe("/home/u/x/data.tar", 1, std::nullopt, h, now);
    CHECK(bare.file_name == "data.tar");
    CHECK(!bare.referrer_url);
    CHECK(!bare.host_url);

    CHECK(path_file_name("justname.bin") == "justname.bin");
    CHECK(path_file_name("a/b\\c/mixed.bin") == "mixed.bin");
}

// -------------------------------------------------------------- crypto ----

TEST_CASE("encrypt/decrypt round-trips and blob layout holds") {
    Recipe r = sample_recipe();
    auto blob = encrypt_recipe(r, "correct horse");
    CHECK(decrypt_recipe(blob, "correct horse") == r);

    std::string plain = serialize_recipe(r);
    CHECK(blob.size() == kMagicLen + kSaltLen + kNonceLen + plain.size() + kTagLen);
    CHECK(std::string(blob.begin(), blob.begin() + 5) == "WRCP1");
}

TEST_CASE("wrong passphrase raises AuthenticationError") {
    auto blob = encrypt_recipe(sample_recipe(), "right");
    CHECK_THROWS_AS(decrypt_recipe(blob, "wrong"), AuthenticationError);
    CHECK_THROWS_AS(decrypt_recipe(blob, "Right"), AuthenticationError);
}

TEST_CASE("any single-byte tamper is caught") {
    auto blob = encrypt_recipe(sample_recipe(), "pw");
    // Sample positions across header, ciphertext and tag (every 7th byte).
    for (size_t i = 0; i < blob.size(); i += 7) {
        auto copy = blob;
        copy[i] ^= 0x01;
        if (i < kMagicLen) {
            CHECK_THROWS_AS(decrypt_recipe(copy, "pw"), BlobFormatError);
        } else {
            CHECK_THROWS_AS(decrypt_recipe(copy, "pw"), AuthenticationError);
        }
    }
    // And explicitly the last byte of the tag.
    auto copy = blob;
    copy.back() ^= 0x80;
    CHECK_THROWS_AS(decrypt_recipe(copy, "pw"), AuthenticationError);
}

TEST_CASE("truncated or foreign blobs are a format error") {
    auto blob = encrypt_recipe(sample_recipe(), "pw");
    EncryptedRecipe tiny(blob.begin(), blob.begin() + 10);
    CHECK_THROWS_AS(decrypt_recipe(tiny, "pw"), BlobFormatError);
    CHECK_THROWS_AS(decrypt_recipe(EncryptedRecipe{}, "pw"), BlobFormatError);
    EncryptedRecipe foreign(blob);
    foreign[0] = 'X';
    CHECK_THROWS_AS(decrypt_recipe(foreign, "pw"), BlobFormatError);
    // Header-only (no room for tag) is truncated even with good magic.
    EncryptedRecipe header(blob.begin(), blob.begin() + kMagicLen + kSaltLen + kNonceLen);
    CHECK_THROWS_AS(decrypt_recipe(header, "pw"), BlobFormatError);
}

TEST_CASE("encryption is randomized per call") {
    Recipe r = sample_recipe();
    auto a = encrypt_recipe(r, "pw");
    auto b = encrypt_recipe(r, "pw");
    CHECK(a != b);
    CHECK(decrypt_recipe(a, "pw") == decrypt_recipe(b, "pw"));
}

TEST_CASE("empty passphrase is refused outright") {
    CHECK_THROWS_AS(encrypt_recipe(sample_recipe(), ""), CryptoError);
}
