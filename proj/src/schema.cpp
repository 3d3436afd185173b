#include "pocshield/schema.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pocshield/error.hpp"

namespace posh {

namespace {

FeatureGroup group_from_name(const std::string& s) {
    if (s == "URL") return FeatureGroup::Url;
    if (s == "REP") return FeatureGroup::Rep;
    if (s == "HTML") return FeatureGroup::Html;
    raise(ErrorCode::ParseError, "unknown feature group: " + s);
}

FeatureDomain domain_from_name(const std::string& s) {
    if (s == "discrete") return FeatureDomain::Discrete;
    if (s == "real") return FeatureDomain::Real;
    raise(ErrorCode::ParseError, "unknown feature domain: " + s);
}

}  // namespace

const char* group_name(FeatureGroup g) {
    switch (g) {
        case FeatureGroup::Url: return "URL";
        case FeatureGroup::Rep: return "REP";
        case FeatureGroup::Html: return "HTML";
    }
    return "?";
}

FeatureSchema::FeatureSchema(std::vector<FeatureDescriptor> features)
    : features_(std::move(features)) {
    for (std::size_t i = 0; i < features_.size(); ++i) {
        for (std::size_t j = i + 1; j < features_.size(); ++j) {
            if (features_[i].name == features_[j].name) {
                raise(ErrorCode::ParseError,
                      "duplicate feature name: " + features_[i].name);
            }
        }
        const auto& f = features_[i];
        if (f.benign_reference && !value_in_domain(i, *f.benign_reference)) {
            raise(ErrorCode::DomainViolation,
                  "benign_reference outside domain for feature " + f.name);
        }
    }
}

int FeatureSchema::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (features_[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

std::uint64_t FeatureSchema::fingerprint() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const std::string& s) {
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
        h ^= 0xff;
        h *= 1099511628211ULL;
    };
    for (const auto& f : features_) {
        mix(f.name);
        mix(group_name(f.group));
        mix(f.domain == FeatureDomain::Discrete ? "discrete" : "real");
    }
    return h;
}

bool FeatureSchema::value_in_domain(std::size_t feature, double value) const {
    const auto& f = features_.at(feature);
    if (f.domain == FeatureDomain::Discrete) {
        return value == -1.0 || value == 0.0 || value == 1.0;
    }
    return std::isfinite(value);
}

bool FeatureSchema::operator==(const FeatureSchema& other) const {
    if (features_.size() != other.features_.size()) return false;
    for (std::size_t i = 0; i < features_.size(); ++i) {
        const auto& a = features_[i];
        const auto& b = other.features_[i];
        if (a.name != b.name || a.group != b.group || a.domain != b.domain ||
            a.benign_reference != b.benign_reference) {
            return false;
        }
    }
    return true;
}

std::string FeatureSchema::to_json() const {
    nlohmann::json doc;
    doc["features"] = nlohmann::json::array();
    for (const auto& f : features_) {
        nlohmann::json item;
        item["name"] = f.name;
        item["group"] = group_name(f.group);
        item["domain"] = f.domain == FeatureDomain::Discrete ? "discrete" : "real";
        if (f.benign_reference) item["benign_reference"] = *f.benign_reference;
        doc["features"].push_back(std::move(item));
    }
    return doc.dump(2);
}

FeatureSchema FeatureSchema::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorCode::ParseError, std::string("schema JSON: ") + e.what());
    }
    if (!doc.contains("features") || !doc["features"].is_array()) {
        raise(ErrorCode::ParseError, "schema JSON: missing 'features' array");
    }
    std::vector<FeatureDescriptor> features;
    for (const auto& item : doc["features"]) {
        FeatureDescriptor f;
        f.name = item.at("name").get<std::string>();
        f.group = group_from_name(item.at("group").get<std::string>());
        f.domain = domain_from_name(item.at("domain").get<std::string>());
        if (item.contains("benign_reference")) {
            f.benign_reference = item["benign_reference"].get<double>();
        }
        features.push_back(std::move(f));
    }
    return FeatureSchema(std::move(features));
}

FeatureSchema FeatureSchema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open schema file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

void FeatureSchema::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) raise(ErrorCode::IoError, "cannot write schema file: " + path);
    out << to_json() << "\n";
}

const FeatureSchema& canonical_schema() {
    static const FeatureSchema schema = [] {
        auto d = [](const char* name, FeatureGroup g) {
            FeatureDescriptor f;
            f.name = name;
            f.group = g;
            f.domain = FeatureDomain::Discrete;
            return f;
        };
        std::vector<FeatureDescriptor> fs = {
            // URL group
            d("ip_address", FeatureGroup::Url),
            d("at_symbol", FeatureGroup::Url),
            d("dash_symbol", FeatureGroup::Url),
            d("dots_number", FeatureGroup::Url),
            d("fake_https", FeatureGroup::Url),
            d("url_length", FeatureGroup::Url),
            d("redirect", FeatureGroup::Url),
            d("shortener", FeatureGroup::Url),
            d("data_uri", FeatureGroup::Url),
            // REP group
            d("ssl_final_state", FeatureGroup::Rep),
            d("url_dns_mismatch", FeatureGroup::Rep),
            d("dns_record", FeatureGroup::Rep),
            d("domain_age", FeatureGroup::Rep),
            d("page_rank", FeatureGroup::Rep),
            d("port_status", FeatureGroup::Rep),
            d("redirections", FeatureGroup::Rep),
            // HTML group
            d("sfh", FeatureGroup::Html),
            d("anchors", FeatureGroup::Html),
            d("favicon", FeatureGroup::Html),
            d("iframe", FeatureGroup::Html),
            d("mail_form", FeatureGroup::Html),
            d("pop_up", FeatureGroup::Html),
            d("right_click", FeatureGroup::Html),
            d("objects", FeatureGroup::Html),
            d("status_bar", FeatureGroup::Html),
            d("meta_scripts", FeatureGroup::Html),
            d("css", FeatureGroup::Html),
        };
        return FeatureSchema(std::move(fs));
    }();
    return schema;
}

}  // namespace posh
