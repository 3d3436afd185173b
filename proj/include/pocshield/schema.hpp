#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace posh {

enum class FeatureGroup { Url, Rep, Html };

enum class FeatureDomain { Discrete, Real };  // Discrete = {-1, 0, 1}

struct FeatureDescriptor {
    std::string name;
    FeatureGroup group = FeatureGroup::Url;
    FeatureDomain domain = FeatureDomain::Discrete;
    std::optional<double> benign_reference;
};

// Ordered feature list; the index of a descriptor is the feature id.
class FeatureSchema {
public:
    FeatureSchema() = default;
    explicit FeatureSchema(std::vector<FeatureDescriptor> features);

    std::size_t size() const { return features_.size(); }
    const FeatureDescriptor& at(std::size_t i) const { return features_.at(i); }
    const std::vector<FeatureDescriptor>& features() const { return features_; }

    // Index of a feature by name; -1 when absent.
    int index_of(const std::string& name) const;

    // Stable content hash over names/groups/domains; used as the schema
    // fingerprint stored in models and feature maps.
    std::uint64_t fingerprint() const;

    bool value_in_domain(std::size_t feature, double value) const;

    bool operator==(const FeatureSchema& other) const;

    std::string to_json() const;
    static FeatureSchema from_json(const std::string& text);
    static FeatureSchema load(const std::string& path);
    void save(const std::string& path) const;

private:
    std::vector<FeatureDescriptor> features_;
};

// The canonical 27-feature phishing schema: 9 URL, 7 REP and 11 HTML
// features, all over the discrete domain {-1, 0, 1} where -1 is
// legitimate-indicating, 0 suspicious and 1 phishing-indicating.
const FeatureSchema& canonical_schema();

const char* group_name(FeatureGroup g);

}  // namespace posh
