#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pocshield/schema.hpp"

namespace posh {

enum class SslState { Trusted, Untrusted, None };

// Raw material for one website. Optional fields distinguish "unknown"
// from "false/zero"; unknown reputation facts map to the suspicious value 0.
struct SiteSnapshot {
    std::string url;
    std::optional<std::string> html;
    std::optional<bool> dns_record_present;
    std::optional<int> domain_age_days;
    std::optional<SslState> ssl_state;
    std::optional<double> page_rank;
    std::optional<bool> open_nonstandard_ports;
    std::optional<int> redirect_count;
    std::optional<bool> url_dns_mismatch;

    std::string to_json() const;
    // base_dir resolves an html_path reference when the html is not inline
    static SiteSnapshot from_json(const std::string& text, const std::string& base_dir);
};

const std::vector<std::string>& default_shortener_domains();

// Discretization rule table (documented in docs/feature_rules.md):
//   url_length   <54 -> -1, 54..75 -> 0, >75 -> 1
//   dots_number  <=3 after stripping www./ccTLD -> -1, else 1
//   anchors      external ratio <31% -> -1, 31..67% -> 0, >67% -> 1
//   objects/meta_scripts   external ratio <22% -> -1, 22..61% -> 0, >61% -> 1
//   domain_age   >=180 days -> -1, else 1
//   redirections <=1 -> -1, 2..3 -> 0, >=4 -> 1
//   page_rank    <0.2 -> 1, else -1
// All three extractors are pure and emit values in {-1,0,1} in the
// canonical schema's group order.

std::array<double, 9> extract_url_features(
    const std::string& url,
    const std::vector<std::string>& shorteners = default_shortener_domains());

// Lenient: malformed markup is tolerated; an empty document yields the
// all-suspicious (all zero) profile.
std::array<double, 11> extract_html_features(const std::string& html,
                                             const std::string& base_url);

std::array<double, 7> extract_rep_features(const SiteSnapshot& snap);

// URL ++ REP ++ HTML, matching the canonical 27-feature schema order.
std::vector<double> extract_features(const SiteSnapshot& snap);

struct FetchOptions {
    int timeout_seconds = 10;
};

// Best-effort snapshot: DNS via the resolver, HTML via one GET. Remote
// failures leave fields unknown; only a syntactically invalid URL throws.
SiteSnapshot fetch_snapshot(const std::string& url, const FetchOptions& options = {});

}  // namespace posh
