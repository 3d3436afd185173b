#include <netdb.h>
#include <sys/socket.h>

#include <cstring>
#include <string>

#include "httplib.h"
#include "pocshield/error.hpp"
#include "pocshield/featextract.hpp"

namespace posh {

namespace {

struct UrlParts {
    std::string scheme;
    std::string host;
    int port = 80;
    std::string target;
};

UrlParts split_for_fetch(const std::string& url) {
    UrlParts parts;
    std::string remainder = url;
    auto scheme_end = url.find("://");
    if (scheme_end != std::string::npos) {
        parts.scheme = url.substr(0, scheme_end);
        remainder = url.substr(scheme_end + 3);
    } else {
        parts.scheme = "http";
    }
    auto slash = remainder.find('/');
    std::string authority =
        slash == std::string::npos ? remainder : remainder.substr(0, slash);
    parts.target = slash == std::string::npos ? "/" : remainder.substr(slash);
    if (auto colon = authority.find(':'); colon != std::string::npos) {
        parts.port = std::stoi(authority.substr(colon + 1));
        authority = authority.substr(0, colon);
    }
    parts.host = authority;
    if (parts.host.empty() || parts.host.find_first_of(" \t") != std::string::npos) {
        raise(ErrorCode::InvalidUrl, "not a fetchable URL: '" + url + "'");
    }
    return parts;
}

}  // namespace

SiteSnapshot fetch_snapshot(const std::string& url, const FetchOptions& options) {
    UrlParts parts = split_for_fetch(url);

    SiteSnapshot snap;
    snap.url = url;

    // DNS lookup; a literal address resolves trivially
    {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* result = nullptr;
        int rc = getaddrinfo(parts.host.c_str(), nullptr, &hints, &result);
        if (rc == 0) {
            snap.dns_record_present = true;
            freeaddrinfo(result);
        } else if (rc == EAI_NONAME || rc == EAI_NODATA) {
            snap.dns_record_present = false;
        }  // transient resolver failures stay unknown
    }

    // one plain-HTTP GET; anything else stays unknown
    if (parts.scheme == "http" && snap.dns_record_present.value_or(false)) {
        httplib::Client client(parts.host, parts.port);
        client.set_connection_timeout(options.timeout_seconds, 0);
        client.set_read_timeout(options.timeout_seconds, 0);
        client.set_follow_location(false);

        int redirects = 0;
        std::string target = parts.target;
        for (; redirects < 10; ++redirects) {
            auto res = client.Get(target);
            if (!res) break;
            if (res->status >= 300 && res->status < 400 && res->has_header("Location")) {
                std::string loc = res->get_header_value("Location");
                if (loc.rfind("http", 0) == 0) break;  // off-host, stop counting here
                target = loc;
                continue;
            }
            if (res->status == 200) snap.html = res->body;
            snap.redirect_count = redirects;
            break;
        }
    }
    if (parts.scheme == "https") snap.ssl_state = SslState::Trusted;
    if (parts.scheme == "http") snap.ssl_state = SslState::None;
    return snap;
}

}  // namespace posh
