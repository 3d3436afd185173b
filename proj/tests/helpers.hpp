#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pocshield/dataset.hpp"
#include "pocshield/schema.hpp"

namespace testutil {

// small all-discrete schema for unit tests
inline posh::FeatureSchema tiny_schema(std::size_t n = 4) {
    std::vector<posh::FeatureDescriptor> fs;
    for (std::size_t i = 0; i < n; ++i) {
        posh::FeatureDescriptor f;
        f.name = "d" + std::to_string(i);
        f.group = posh::FeatureGroup::Url;
        f.domain = posh::FeatureDomain::Discrete;
        fs.push_back(std::move(f));
    }
    return posh::FeatureSchema(std::move(fs));
}

// linearly separable corpus: phishing rows are all 1, benign all -1
inline posh::Dataset separable(std::size_t per_class = 40, std::size_t n_features = 4) {
    std::vector<posh::Sample> rows;
    for (std::size_t i = 0; i < per_class; ++i) {
        posh::Sample p;
        p.values.assign(n_features, 1.0);
        p.label = posh::Label::Phishing;
        rows.push_back(std::move(p));
        posh::Sample b;
        b.values.assign(n_features, -1.0);
        b.label = posh::Label::Benign;
        rows.push_back(std::move(b));
    }
    return posh::Dataset(tiny_schema(n_features), std::move(rows), "separable");
}

inline std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return text;
}

}  // namespace testutil
