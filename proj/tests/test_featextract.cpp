#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "pocshield/error.hpp"
#include "pocshield/featextract.hpp"

using namespace posh;

namespace {
// url feature indices
enum { kIp, kAt, kDash, kDots, kFakeHttps, kLength, kRedirect, kShortener, kDataUri };
// html feature indices
enum { kSfh, kAnchors, kFavicon, kIframe, kMailForm, kPopUp, kRightClick,
       kObjects, kStatusBar, kMetaScripts, kCss };
}  // namespace

TEST_CASE("URL features: benign-looking URL") {
    auto f = extract_url_features("http://www.example.com/page");
    CHECK(f[kIp] == -1.0);
    CHECK(f[kAt] == -1.0);
    CHECK(f[kDash] == -1.0);
    CHECK(f[kDots] == -1.0);
    CHECK(f[kFakeHttps] == -1.0);
    CHECK(f[kLength] == -1.0);
    CHECK(f[kRedirect] == -1.0);
    CHECK(f[kShortener] == -1.0);
    CHECK(f[kDataUri] == -1.0);
}

TEST_CASE("URL features: each phishing cue fires") {
    CHECK(extract_url_features("http://192.168.0.1/x")[kIp] == 1.0);
    CHECK(extract_url_features("http://user@evil.com/")[kAt] == 1.0);
    CHECK(extract_url_features("http://pay-pal.com/")[kDash] == 1.0);
    CHECK(extract_url_features("http://a.b.c.d.e.example.com/")[kDots] == 1.0);
    CHECK(extract_url_features("http://httpsecure-login.https.example.com/")[kFakeHttps] ==
          1.0);
    CHECK(extract_url_features("http://example.com/a//b")[kRedirect] == 1.0);
    CHECK(extract_url_features("http://bit.ly/x")[kShortener] == 1.0);
    CHECK(extract_url_features("data:text/html;base64,AAAA")[kDataUri] == 1.0);
}

TEST_CASE("URL length buckets: <54, 54..75, >75") {
    std::string base = "http://example.com/";  // 19 chars
    CHECK(extract_url_features(base)[kLength] == -1.0);
    CHECK(extract_url_features(base + std::string(54 - base.size(), 'a'))[kLength] == 0.0);
    CHECK(extract_url_features(base + std::string(75 - base.size(), 'a'))[kLength] == 0.0);
    CHECK(extract_url_features(base + std::string(80, 'a'))[kLength] == 1.0);
}

TEST_CASE("dots rule strips www. and a two-letter country suffix") {
    // www.shop.example.co.uk -> shop.example.co (2 dots) -> legitimate
    CHECK(extract_url_features("http://www.shop.example.co.uk/")[kDots] == -1.0);
    // one more level pushes past the threshold
    CHECK(extract_url_features("http://a.b.shop.example.co.uk/")[kDots] == 1.0);
}

TEST_CASE("unparsable URLs are rejected") {
    CHECK_THROWS_AS(extract_url_features(""), Error);
    CHECK_THROWS_AS(extract_url_features("http://"), Error);
    CHECK_THROWS_AS(extract_url_features("not a url"), Error);
}

TEST_CASE("HTML features: blank document is all-suspicious") {
    auto f = extract_html_features("", "http://example.com/");
    for (double v : f) CHECK(v == 0.0);
    auto g = extract_html_features("  \n\t ", "http://example.com/");
    for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("HTML features: anchor ratio buckets") {
    std::string base = "http://example.com/";
    // 1 external of 3 -> 33% -> suspicious
    std::string mid =
        "<a href='/home'>a</a><a href='about.html'>b</a>"
        "<a href='http://other.com/'>c</a>";
    CHECK(extract_html_features(mid, base)[kAnchors] == 0.0);
    // all internal -> legitimate
    std::string low = "<a href='/a'>a</a><a href='/b'>b</a>";
    CHECK(extract_html_features(low, base)[kAnchors] == -1.0);
    // all external -> phishing
    std::string high = "<a href='http://x.com/'>a</a><a href='http://y.com/'>b</a>";
    CHECK(extract_html_features(high, base)[kAnchors] == 1.0);
    // subdomain links count as internal
    std::string sub = "<a href='http://cdn.example.com/'>a</a>";
    CHECK(extract_html_features(sub, base)[kAnchors] == -1.0);
}

TEST_CASE("HTML features: script cues and tags") {
    std::string base = "http://example.com/";
    CHECK(extract_html_features("<form action=''>", base)[kSfh] == 1.0);
    CHECK(extract_html_features("<form action='about:blank'>", base)[kSfh] == 1.0);
    CHECK(extract_html_features("<form action='http://evil.com/p'>", base)[kSfh] == 0.0);
    CHECK(extract_html_features("<form action='/login'>", base)[kSfh] == -1.0);
    CHECK(extract_html_features("<iframe src='/f'>", base)[kIframe] == 1.0);
    CHECK(extract_html_features("<a href='mailto:x@y.z'>m</a>", base)[kMailForm] == 1.0);
    CHECK(extract_html_features("<script>window.open('x')</script>", base)[kPopUp] == 1.0);
    CHECK(extract_html_features("<body oncontextmenu='return false'>", base)[kRightClick] ==
          1.0);
    CHECK(extract_html_features("<script>window.status='hi'</script>", base)[kStatusBar] ==
          1.0);
    CHECK(extract_html_features("<link rel='stylesheet' href='http://c.dn/a.css'>",
                                base)[kCss] == 1.0);
    CHECK(extract_html_features("<link rel='icon' href='http://c.dn/i.ico'>",
                                base)[kFavicon] == 1.0);
    CHECK(extract_html_features("<link rel='icon' href='/i.ico'>", base)[kFavicon] ==
          -1.0);
}

TEST_CASE("HTML features: object and script/meta ratio buckets") {
    std::string base = "http://example.com/";
    // 2 of 3 images external -> 66.7% -> phishing
    std::string objs =
        "<img src='http://a.com/1.png'><img src='http://b.com/2.png'>"
        "<img src='/local.png'>";
    CHECK(extract_html_features(objs, base)[kObjects] == 1.0);
    // 1 of 3 external -> 33% -> suspicious
    std::string objs_mid =
        "<img src='http://a.com/1.png'><img src='/2.png'><img src='/3.png'>";
    CHECK(extract_html_features(objs_mid, base)[kObjects] == 0.0);
    std::string scripts =
        "<script src='http://cdn.other.com/x.js'></script>"
        "<script src='/local.js'></script>";
    CHECK(extract_html_features(scripts, base)[kMetaScripts] == 0.0);
}

TEST_CASE("reputation features: unknown facts are suspicious") {
    SiteSnapshot snap;
    snap.url = "http://example.com/";
    auto f = extract_rep_features(snap);
    for (double v : f) CHECK(v == 0.0);
}

TEST_CASE("reputation features: thresholds") {
    SiteSnapshot snap;
    snap.url = "http://example.com/";

    snap.domain_age_days = 180;
    CHECK(extract_rep_features(snap)[3] == -1.0);
    snap.domain_age_days = 179;
    CHECK(extract_rep_features(snap)[3] == 1.0);

    snap.page_rank = 0.2;
    CHECK(extract_rep_features(snap)[4] == -1.0);
    snap.page_rank = 0.19;
    CHECK(extract_rep_features(snap)[4] == 1.0);

    snap.redirect_count = 1;
    CHECK(extract_rep_features(snap)[6] == -1.0);
    snap.redirect_count = 2;
    CHECK(extract_rep_features(snap)[6] == 0.0);
    snap.redirect_count = 3;
    CHECK(extract_rep_features(snap)[6] == 0.0);
    snap.redirect_count = 4;
    CHECK(extract_rep_features(snap)[6] == 1.0);

    snap.ssl_state = SslState::Trusted;
    CHECK(extract_rep_features(snap)[0] == -1.0);
    snap.ssl_state = SslState::None;
    CHECK(extract_rep_features(snap)[0] == 1.0);

    snap.dns_record_present = true;
    CHECK(extract_rep_features(snap)[2] == -1.0);
    snap.dns_record_present = false;
    CHECK(extract_rep_features(snap)[2] == 1.0);
}

TEST_CASE("full vector is URL ++ REP ++ HTML and always in-domain") {
    SiteSnapshot snap;
    snap.url = "http://bit.ly/x";
    snap.html = "<iframe src='/f'>";
    snap.domain_age_days = 30;
    auto v = extract_features(snap);
    REQUIRE(v.size() == 27);
    CHECK(v[7] == 1.0);       // shortener (URL block)
    CHECK(v[9 + 3] == 1.0);   // domain_age (REP block)
    CHECK(v[16 + 3] == 1.0);  // iframe (HTML block)
    for (double x : v) CHECK((x == -1.0 || x == 0.0 || x == 1.0));
}

TEST_CASE("snapshot JSON round trip") {
    SiteSnapshot snap;
    snap.url = "http://example.com/";
    snap.html = "<p>hi</p>";
    snap.domain_age_days = 400;
    snap.ssl_state = SslState::Untrusted;
    snap.page_rank = 0.7;
    snap.redirect_count = 2;
    SiteSnapshot back = SiteSnapshot::from_json(snap.to_json(), ".");
    CHECK(back.url == snap.url);
    CHECK(back.html == snap.html);
    CHECK(back.domain_age_days == snap.domain_age_days);
    CHECK(back.ssl_state == snap.ssl_state);
    CHECK(back.page_rank == snap.page_rank);
    CHECK(back.redirect_count == snap.redirect_count);
    CHECK_FALSE(back.dns_record_present.has_value());
}

TEST_CASE("snapshot html_path resolves against the base directory") {
    std::string dir = testutil::temp_path("");
    testutil::write_text(testutil::temp_path("poshtest_page.html"), "<iframe src='/f'>");
    SiteSnapshot snap = SiteSnapshot::from_json(
        "{\"url\": \"http://example.com/\", \"html_path\": \"poshtest_page.html\"}", dir);
    REQUIRE(snap.html.has_value());
    CHECK(snap.html->find("iframe") != std::string::npos);
}

TEST_CASE("snapshot JSON errors") {
    CHECK_THROWS_AS(SiteSnapshot::from_json("{oops", "."), Error);
    CHECK_THROWS_AS(SiteSnapshot::from_json("{\"url\":\"x\",\"ssl_state\":\"blue\"}", "."),
                    Error);
}
