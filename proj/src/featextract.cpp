#include "pocshield/featextract.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pocshield/error.hpp"

#include <netdb.h>
#include <sys/socket.h>

namespace posh {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

struct ParsedUrl {
    std::string scheme;  // lowercased; "http" when absent
    std::string host;    // lowercased, no port
    std::string rest;    // path + query + fragment, with leading '/'
};

ParsedUrl parse_url(const std::string& url) {
    if (url.empty() || url.find_first_of(" \t\n") != std::string::npos) {
        raise(ErrorCode::UnparsableUrl, "not a URL: '" + url + "'");
    }
    ParsedUrl p;
    std::string remainder = url;
    auto scheme_end = url.find("://");
    if (scheme_end != std::string::npos) {
        p.scheme = lower(url.substr(0, scheme_end));
        remainder = url.substr(scheme_end + 3);
    } else if (url.rfind("data:", 0) == 0) {
        p.scheme = "data";
        p.host = "";
        p.rest = url.substr(5);
        return p;
    } else {
        p.scheme = "http";
    }
    auto slash = remainder.find('/');
    std::string authority =
        slash == std::string::npos ? remainder : remainder.substr(0, slash);
    p.rest = slash == std::string::npos ? "" : remainder.substr(slash);
    // userinfo and port are not part of the host
    if (auto at = authority.find_last_of('@'); at != std::string::npos) {
        authority = authority.substr(at + 1);
    }
    if (auto colon = authority.find(':'); colon != std::string::npos) {
        authority = authority.substr(0, colon);
    }
    p.host = lower(authority);
    if (p.host.empty()) raise(ErrorCode::UnparsableUrl, "no host in URL: '" + url + "'");
    return p;
}

bool is_ip_host(const std::string& host) {
    if (host.rfind("0x", 0) == 0) return true;
    bool any_alpha = false;
    for (char c : host) {
        if (std::isalpha(static_cast<unsigned char>(c))) any_alpha = true;
    }
    return !any_alpha && !host.empty();
}

// host with leading www. and a two-letter ccTLD label removed
std::string stripped_host(std::string host) {
    if (host.rfind("www.", 0) == 0) host = host.substr(4);
    auto last_dot = host.find_last_of('.');
    if (last_dot != std::string::npos && host.size() - last_dot - 1 == 2) {
        host = host.substr(0, last_dot);
    }
    return host;
}

bool host_matches_domain(const std::string& host, const std::string& domain) {
    if (host == domain) return true;
    return host.size() > domain.size() &&
           host.compare(host.size() - domain.size() - 1, domain.size() + 1,
                        "." + domain) == 0;
}

double ratio_bucket(double external, double total, double lo, double hi) {
    if (total == 0.0) return -1.0;
    double r = 100.0 * external / total;
    if (r < lo) return -1.0;
    if (r <= hi) return 0.0;
    return 1.0;
}

// --- minimal lenient tag scanner ------------------------------------------

struct TagRef {
    std::string name;            // lowercased
    std::string attributes_raw;  // original-case slice between name and '>'
};

std::vector<TagRef> scan_tags(const std::string& html) {
    std::vector<TagRef> tags;
    std::size_t pos = 0;
    while ((pos = html.find('<', pos)) != std::string::npos) {
        std::size_t end = html.find('>', pos);
        if (end == std::string::npos) break;
        std::size_t name_start = pos + 1;
        if (name_start < end && (html[name_start] == '/' || html[name_start] == '!')) {
            pos = end + 1;
            continue;
        }
        std::size_t name_end = name_start;
        while (name_end < end && (std::isalnum(static_cast<unsigned char>(html[name_end])))) {
            ++name_end;
        }
        if (name_end > name_start) {
            TagRef tag;
            tag.name = lower(html.substr(name_start, name_end - name_start));
            tag.attributes_raw = html.substr(name_end, end - name_end);
            tags.push_back(std::move(tag));
        }
        pos = end + 1;
    }
    return tags;
}

std::string attribute(const TagRef& tag, const std::string& name) {
    std::string hay = lower(tag.attributes_raw);
    std::size_t pos = 0;
    while ((pos = hay.find(name, pos)) != std::string::npos) {
        // must be a word boundary followed by '='
        bool boundary = pos == 0 || !std::isalnum(static_cast<unsigned char>(hay[pos - 1]));
        std::size_t after = pos + name.size();
        while (after < hay.size() && std::isspace(static_cast<unsigned char>(hay[after])))
            ++after;
        if (!boundary || after >= hay.size() || hay[after] != '=') {
            pos += name.size();
            continue;
        }
        ++after;
        while (after < hay.size() && std::isspace(static_cast<unsigned char>(hay[after])))
            ++after;
        if (after >= hay.size()) return "";
        char quote = hay[after];
        std::size_t value_start, value_end;
        if (quote == '"' || quote == '\'') {
            value_start = after + 1;
            value_end = tag.attributes_raw.find(quote, value_start);
        } else {
            value_start = after;
            value_end = value_start;
            while (value_end < hay.size() &&
                   !std::isspace(static_cast<unsigned char>(hay[value_end])))
                ++value_end;
        }
        if (value_end == std::string::npos) value_end = tag.attributes_raw.size();
        return tag.attributes_raw.substr(value_start, value_end - value_start);
    }
    return "";
}

// internal / external / neither (relative counts as internal)
enum class Origin { Internal, External, None };

Origin origin_of(const std::string& ref_raw, const std::string& base_host) {
    std::string ref = ref_raw;
    if (ref.empty() || ref[0] == '#') return Origin::None;
    if (ref.rfind("javascript:", 0) == 0 || ref.rfind("mailto:", 0) == 0) {
        return Origin::None;
    }
    if (ref.find("://") == std::string::npos && ref.rfind("//", 0) != 0) {
        return Origin::Internal;  // relative reference
    }
    if (ref.rfind("//", 0) == 0) ref = "http:" + ref;
    try {
        ParsedUrl p = parse_url(ref);
        return host_matches_domain(p.host, base_host) ||
                       host_matches_domain(base_host, p.host)
                   ? Origin::Internal
                   : Origin::External;
    } catch (const Error&) {
        return Origin::Internal;
    }
}

double tri(std::optional<bool> fact, double when_true, double when_false) {
    if (!fact) return 0.0;
    return *fact ? when_true : when_false;
}

}  // namespace

const std::vector<std::string>& default_shortener_domains() {
    static const std::vector<std::string> list = {
        "tinyurl.com", "bit.ly", "goo.gl", "t.co", "ow.ly",
    };
    return list;
}

std::array<double, 9> extract_url_features(const std::string& url,
                                           const std::vector<std::string>& shorteners) {
    ParsedUrl p = parse_url(url);
    std::array<double, 9> f{};

    // ip_address
    f[0] = is_ip_host(p.host) ? 1.0 : -1.0;
    // at_symbol
    f[1] = url.find('@') != std::string::npos ? 1.0 : -1.0;
    // dash_symbol
    f[2] = p.host.find('-') != std::string::npos ? 1.0 : -1.0;
    // dots_number
    std::string core = stripped_host(p.host);
    f[3] = std::count(core.begin(), core.end(), '.') <= 3 ? -1.0 : 1.0;
    // fake_https: the token "https" inside the host
    f[4] = p.host.find("https") != std::string::npos ? 1.0 : -1.0;
    // url_length
    std::size_t len = url.size();
    f[5] = len < 54 ? -1.0 : (len <= 75 ? 0.0 : 1.0);
    // redirect: "//" beyond the scheme separator
    f[6] = p.rest.find("//") != std::string::npos ? 1.0 : -1.0;
    // shortener
    f[7] = -1.0;
    for (const auto& dom : shorteners) {
        if (host_matches_domain(p.host, dom)) {
            f[7] = 1.0;
            break;
        }
    }
    // data_uri
    f[8] = p.scheme == "data" || url.find("data:") != std::string::npos ? 1.0 : -1.0;
    return f;
}

std::array<double, 11> extract_html_features(const std::string& html,
                                             const std::string& base_url) {
    std::array<double, 11> f{};
    bool blank = html.find_first_not_of(" \t\r\n") == std::string::npos;
    if (blank) return f;  // all suspicious

    std::string base_host;
    try {
        base_host = parse_url(base_url).host;
    } catch (const Error&) {
        base_host = "";
    }

    auto tags = scan_tags(html);
    std::string script = lower(html);

    // sfh
    double sfh = -1.0;
    // anchors
    double anchors_total = 0.0, anchors_external = 0.0;
    // favicon
    double favicon = -1.0;
    bool iframe = false;
    // objects
    double obj_total = 0.0, obj_external = 0.0;
    // meta / script references
    double ms_total = 0.0, ms_external = 0.0;
    // css
    double css = -1.0;

    for (const auto& tag : tags) {
        if (tag.name == "form") {
            std::string action = attribute(tag, "action");
            std::string action_l = lower(action);
            if (action.empty() || action_l == "about:blank" || action == "#") {
                sfh = 1.0;
            } else if (sfh != 1.0 && origin_of(action, base_host) == Origin::External) {
                sfh = std::max(sfh, 0.0);
            }
        } else if (tag.name == "a") {
            Origin o = origin_of(attribute(tag, "href"), base_host);
            if (o != Origin::None) {
                anchors_total += 1.0;
                if (o == Origin::External) anchors_external += 1.0;
            }
        } else if (tag.name == "link") {
            std::string rel = lower(attribute(tag, "rel"));
            Origin o = origin_of(attribute(tag, "href"), base_host);
            if (rel.find("icon") != std::string::npos) {
                if (o == Origin::External) favicon = 1.0;
            } else if (rel.find("stylesheet") != std::string::npos) {
                if (o == Origin::External) css = 1.0;
            }
        } else if (tag.name == "iframe") {
            iframe = true;
        } else if (tag.name == "img" || tag.name == "embed" || tag.name == "object" ||
                   tag.name == "source" || tag.name == "video" || tag.name == "audio") {
            Origin o = origin_of(attribute(tag, "src"), base_host);
            if (o != Origin::None) {
                obj_total += 1.0;
                if (o == Origin::External) obj_external += 1.0;
            }
        } else if (tag.name == "script") {
            std::string src = attribute(tag, "src");
            if (!src.empty()) {
                Origin o = origin_of(src, base_host);
                if (o != Origin::None) {
                    ms_total += 1.0;
                    if (o == Origin::External) ms_external += 1.0;
                }
            }
        } else if (tag.name == "meta") {
            std::string content = attribute(tag, "content");
            if (content.find("http") != std::string::npos) {
                Origin o = origin_of(content, base_host);
                if (o != Origin::None) {
                    ms_total += 1.0;
                    if (o == Origin::External) ms_external += 1.0;
                }
            }
        }
    }

    bool mail_form = script.find("mailto:") != std::string::npos ||
                     script.find("mail(") != std::string::npos;
    bool pop_up = script.find("window.open(") != std::string::npos ||
                  script.find("prompt(") != std::string::npos;
    bool right_click = script.find("event.button==2") != std::string::npos ||
                       script.find("event.button == 2") != std::string::npos ||
                       script.find("oncontextmenu") != std::string::npos;
    bool status_bar = script.find("window.status") != std::string::npos;

    f[0] = sfh;
    f[1] = ratio_bucket(anchors_external, anchors_total, 31.0, 67.0);
    f[2] = favicon;
    f[3] = iframe ? 1.0 : -1.0;
    f[4] = mail_form ? 1.0 : -1.0;
    f[5] = pop_up ? 1.0 : -1.0;
    f[6] = right_click ? 1.0 : -1.0;
    f[7] = ratio_bucket(obj_external, obj_total, 22.0, 61.0);
    f[8] = status_bar ? 1.0 : -1.0;
    f[9] = ratio_bucket(ms_external, ms_total, 22.0, 61.0);
    f[10] = css;
    return f;
}

std::array<double, 7> extract_rep_features(const SiteSnapshot& snap) {
    std::array<double, 7> f{};
    // ssl_final_state
    if (snap.ssl_state) {
        switch (*snap.ssl_state) {
            case SslState::Trusted: f[0] = -1.0; break;
            case SslState::Untrusted: f[0] = 0.0; break;
            case SslState::None: f[0] = 1.0; break;
        }
    }
    // url_dns_mismatch
    f[1] = tri(snap.url_dns_mismatch, 1.0, -1.0);
    // dns_record (absence is phishing-indicating)
    f[2] = tri(snap.dns_record_present, -1.0, 1.0);
    // domain_age
    if (snap.domain_age_days) f[3] = *snap.domain_age_days >= 180 ? -1.0 : 1.0;
    // page_rank
    if (snap.page_rank) f[4] = *snap.page_rank < 0.2 ? 1.0 : -1.0;
    // port_status
    f[5] = tri(snap.open_nonstandard_ports, 1.0, -1.0);
    // redirections
    if (snap.redirect_count) {
        int r = *snap.redirect_count;
        f[6] = r <= 1 ? -1.0 : (r <= 3 ? 0.0 : 1.0);
    }
    return f;
}

std::vector<double> extract_features(const SiteSnapshot& snap) {
    auto url = extract_url_features(snap.url);
    auto rep = extract_rep_features(snap);
    auto html = extract_html_features(snap.html.value_or(""), snap.url);
    std::vector<double> out;
    out.reserve(27);
    out.insert(out.end(), url.begin(), url.end());
    out.insert(out.end(), rep.begin(), rep.end());
    out.insert(out.end(), html.begin(), html.end());
    return out;
}

std::string SiteSnapshot::to_json() const {
    nlohmann::json doc;
    doc["url"] = url;
    if (html) doc["html"] = *html;
    if (dns_record_present) doc["dns_record_present"] = *dns_record_present;
    if (domain_age_days) doc["domain_age_days"] = *domain_age_days;
    if (ssl_state) {
        doc["ssl_state"] = *ssl_state == SslState::Trusted
                               ? "trusted"
                               : (*ssl_state == SslState::Untrusted ? "untrusted" : "none");
    }
    if (page_rank) doc["page_rank"] = *page_rank;
    if (open_nonstandard_ports) doc["open_nonstandard_ports"] = *open_nonstandard_ports;
    if (redirect_count) doc["redirect_count"] = *redirect_count;
    if (url_dns_mismatch) doc["url_dns_mismatch"] = *url_dns_mismatch;
    return doc.dump(2);
}

SiteSnapshot SiteSnapshot::from_json(const std::string& text, const std::string& base_dir) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorCode::ParseError, std::string("snapshot JSON: ") + e.what());
    }
    SiteSnapshot snap;
    snap.url = doc.at("url").get<std::string>();
    if (doc.contains("html")) {
        snap.html = doc["html"].get<std::string>();
    } else if (doc.contains("html_path")) {
        std::string path = base_dir + "/" + doc["html_path"].get<std::string>();
        std::ifstream in(path);
        if (!in) raise(ErrorCode::IoError, "snapshot html_path not readable: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        snap.html = buf.str();
    }
    if (doc.contains("dns_record_present")) {
        snap.dns_record_present = doc["dns_record_present"].get<bool>();
    }
    if (doc.contains("domain_age_days")) {
        snap.domain_age_days = doc["domain_age_days"].get<int>();
    }
    if (doc.contains("ssl_state")) {
        std::string s = doc["ssl_state"].get<std::string>();
        if (s == "trusted") snap.ssl_state = SslState::Trusted;
        else if (s == "untrusted") snap.ssl_state = SslState::Untrusted;
        else if (s == "none") snap.ssl_state = SslState::None;
        else raise(ErrorCode::ParseError, "snapshot JSON: bad ssl_state: " + s);
    }
    if (doc.contains("page_rank")) snap.page_rank = doc["page_rank"].get<double>();
    if (doc.contains("open_nonstandard_ports")) {
        snap.open_nonstandard_ports = doc["open_nonstandard_ports"].get<bool>();
    }
    if (doc.contains("redirect_count")) {
        snap.redirect_count = doc["redirect_count"].get<int>();
    }
    if (doc.contains("url_dns_mismatch")) {
        snap.url_dns_mismatch = doc["url_dns_mismatch"].get<bool>();
    }
    return snap;
}

}  // namespace posh
